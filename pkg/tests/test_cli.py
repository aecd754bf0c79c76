# ============================================================================
# tests/test_cli.py
# ============================================================================
"""Tests for the command-line entry point."""

import pandas as pd
import pytest
import main as cli
from src.bench.reports import COLUMNS
from src.geometry.point import PairResult


def test_gen_writes_points(tmp_path, capsys):
    out = tmp_path / 'pts.txt'
    assert cli.main(['gen', '--n', '100', '--k', '3', '--dist', 'varden', '--out', str(out), '--stats']) == 0
    lines = [l for l in out.read_text().splitlines() if not l.startswith('#')]
    assert len(lines) == 100 and all(len(l.split()) == 3 for l in lines)
    assert "nearest-neighbor distance" in capsys.readouterr().out


def test_static_with_csv(tmp_path):
    csv = tmp_path / 'static.csv'
    code = cli.main(['static', '--n', '300', '--k', '2', '--algo', 'all', '--quiet', '--csv', str(csv)])
    assert code == 0
    df = pd.read_csv(csv)
    assert list(df.columns) == COLUMNS
    assert sorted(df['algorithm']) == sorted(['divide-conquer', 'rabin', 'sieve', 'incremental', 'brute'])
    assert df['verified'].all()


def test_static_speedup(capsys):
    assert cli.main(['static', '--n', '200', '--algo', 'sieve', '--speedup', '--threads', '2', '--quiet']) == 0
    assert "at 2 workers" in capsys.readouterr().out


@pytest.mark.parametrize("mode", ['theoretical', 'simplified'])
def test_dynamic_both_ops(mode, tmp_path):
    csv = tmp_path / 'dyn.csv'
    code = cli.main(['dynamic', '--n', '200', '--batch', '50', '--op', 'both', '--mode', mode,
                     '--quiet', '--csv', str(csv)])
    assert code == 0
    df = pd.read_csv(csv)
    assert set(df['algorithm']) == {f'dynamic-insert/{mode}', f'dynamic-delete/{mode}'}
    assert len(df) == 8


def test_dynamic_from_input_file(tmp_path):
    pts = tmp_path / 'pts.txt'
    assert cli.main(['gen', '--n', '120', '--k', '2', '--out', str(pts)]) == 0
    assert cli.main(['dynamic', '--input', str(pts), '--batch', '40', '--op', 'insert',
                     '--protocol', 'naive', '--quiet']) == 0


def test_verify(capsys):
    assert cli.main(['verify', '--n', '150', '--k', '3', '--batch', '50', '--quiet']) == 0
    out = capsys.readouterr().out
    assert "VERIFY STATIC" in out and "VERIFY DYNAMIC" in out


def test_crossover_csv(tmp_path):
    csv = tmp_path / 'cross.csv'
    assert cli.main(['crossover', '--n', '300', '--batches', '10', '50', '--quiet', '--csv', str(csv)]) == 0
    df = pd.read_csv(csv)
    assert list(df['op']) == ['insert', 'delete', 'insert', 'delete']


def test_failed_check_returns_one(monkeypatch, capsys):
    monkeypatch.setattr('src.bench.runner.brute_force', lambda points: PairResult(0, 1, 0.0))
    assert cli.main(['static', '--n', '100', '--algo', 'sieve', '--quiet']) == 1
    assert "Verification failed" in capsys.readouterr().out


@pytest.mark.parametrize("argv", [
    [],
    ['static', '--algo', 'quadtree'],
    ['dynamic', '--op', 'upsert'],
    ['crossover', '--n', '100'],
])
def test_usage_errors_return_two(argv):
    assert cli.main(argv) == 2


def test_bad_thread_count():
    assert cli.main(['static', '--n', '100', '--threads', '0']) == 2


def test_missing_input_file(tmp_path):
    assert cli.main(['static', '--input', str(tmp_path / 'nope.txt'), '--quiet']) == 2


def test_bad_input_file(tmp_path, capsys):
    bad = tmp_path / 'bad.txt'
    bad.write_text("1 2\n3\n")
    assert cli.main(['verify', '--input', str(bad), '--quiet']) == 2
    assert "bad.txt:2:" in capsys.readouterr().out


def test_crossover_batch_too_large():
    assert cli.main(['crossover', '--n', '100', '--batches', '90', '--quiet']) == 2
