import json
import subprocess
import sys

import pytest

from flatflow.cli import main
from flatflow.report import SCHEMAS, read_table


def _files(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_validate(capsys):
    assert main(["validate", "l3"]) == 0
    out = capsys.readouterr().out
    assert "genus 2" in out and "euler characteristic -2" in out
    assert "6.0000" in out


def test_validate_file(tmp_path, capsys):
    from flatflow.surfacefile import bundled_path

    f = tmp_path / "oct.surf"
    f.write_bytes(bundled_path("octagon").read_bytes())
    assert main(["validate", str(f)]) == 0
    assert "gauss-bonnet residual" in capsys.readouterr().out


def test_saddles(tmp_path):
    assert main(["saddles", "l3", "--max-length", "4", "--out", str(tmp_path)]) == 0
    rows = read_table(tmp_path / "saddles.csv")
    assert len(rows) == 48
    assert list(rows[0]) == list(SCHEMAS["saddles.csv"]) + ["seed"]
    meta = json.loads((tmp_path / "meta.json").read_text())
    assert meta["command"] == "saddles" and meta["max_length"] == 4.0


def test_cylinders(tmp_path):
    assert main(["cylinders", "octagon", "--max-length", "3", "--out", str(tmp_path)]) == 0
    rows = read_table(tmp_path / "cylinders.csv")
    assert len(rows) == 8


def test_entropy_and_shadows(tmp_path):
    assert main(["entropy", "l3", "--radius", "3", "--out", str(tmp_path / "e")]) == 0
    row = read_table(tmp_path / "e" / "entropy.csv")[0]
    assert float(row["e_hat"]) > 0
    assert len(read_table(tmp_path / "e" / "counts.csv")) == 24
    assert main(["shadows", "l3", "--radius", "3", "--out", str(tmp_path / "s")]) == 0
    assert read_table(tmp_path / "s" / "shadows.csv")


def test_flow_and_report(tmp_path, capsys):
    args = ["flow", "l3", "--samples", "120", "--radius", "3", "--arcs", "10", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    for name in ("freq.csv", "regression.csv", "typicality.csv", "meta.json"):
        assert (tmp_path / "a" / name).exists()
    assert len(read_table(tmp_path / "a" / "freq.csv")) == 10
    capsys.readouterr()
    assert main(["report", str(tmp_path / "a")]) == 0
    out = capsys.readouterr().out
    assert "freq.csv: 10 rows" in out


@pytest.mark.parametrize(
    "cmd",
    [
        ["saddles", "octagon", "--max-length", "5"],
        ["cylinders", "l3", "--max-length", "3"],
        ["entropy", "octagon", "--radius", "3"],
        ["shadows", "l3", "--radius", "3", "--seed", "4"],
        ["flow", "l3", "--samples", "40", "--radius", "3", "--arcs", "6", "--seed", "9"],
    ],
)
def test_rerun_is_byte_identical(cmd, tmp_path):
    assert main(cmd + ["--out", str(tmp_path / "1")]) == 0
    assert main(cmd + ["--out", str(tmp_path / "2")]) == 0
    assert _files(tmp_path / "1") == _files(tmp_path / "2")


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    cmd = ["flow", "l3", "--samples", "40", "--radius", "3", "--arcs", "6"]
    monkeypatch.setenv("FLATFLOW_THREADS", "1")
    assert main(cmd + ["--out", str(tmp_path / "1")]) == 0
    monkeypatch.setenv("FLATFLOW_THREADS", "3")
    assert main(cmd + ["--out", str(tmp_path / "3")]) == 0
    assert _files(tmp_path / "1") == _files(tmp_path / "3")


def test_domain_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.surf"
    bad.write_text("flatflow-surface 1\npolygon 0 : 0 0 | 1 x | 0 1\n")
    assert main(["validate", str(bad)]) == 1
    assert "error: SyntaxError: line 2" in capsys.readouterr().err
    assert main(["validate", str(tmp_path / "missing.surf")]) == 1
    assert main(["report", str(tmp_path / "nowhere")]) == 1
    assert main(["entropy", "l3", "--radius", "5", "--max-nodes", "100", "--out", str(tmp_path)]) == 1
    assert "PatchBudgetExceeded" in capsys.readouterr().err


def test_usage_errors():
    assert main([]) == 2
    assert main(["saddles", "l3"]) == 2
    assert main(["saddles", "l3", "--max-length", "-1"]) == 2
    assert main(["flow", "l3", "--samples", "0", "--radius", "3", "--arcs", "3"]) == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "flatflow", "validate", "octagon"], capture_output=True, text=True)
    assert r.returncode == 0
    assert "polygons 1" in r.stdout
