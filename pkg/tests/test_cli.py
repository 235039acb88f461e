import json
import subprocess
import sys

import pytest

from benney_sym.cli import main
from benney_sym.formats import load_operators
from benney_sym.graded_poly import parse_polynomial as P


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_generate_defaults_match_golden(capsys, golden_dir):
    code, out, _ = run(capsys, "generate")
    assert code == 0
    generated = load_operators(out)
    golden = load_operators((golden_dir / "eta_table.txt").read_text())
    assert [op.coords for op in generated] == [op.coords for op in golden]


def test_generate_prints_degree_nine_entry(capsys, golden_dir):
    code, out, _ = run(capsys, "generate", "--k", "1", "--n", "10")
    assert code == 0
    line = next(l for l in out.splitlines() if l.startswith("eta^10 = ") and "A7" in l)
    assert P(line.split("=", 1)[1]) == P((golden_dir / "eta10_row1.txt").read_text())


def test_output_is_byte_identical(capsys):
    for fmt in ("text", "json", "latex"):
        _, first, _ = run(capsys, "generate", "--k", "2", "--n", "8", "--format", fmt)
        _, second, _ = run(capsys, "generate", "--k", "2", "--n", "8", "--format", fmt)
        assert first == second


@pytest.mark.parametrize("fmt", ["text", "json"])
def test_generate_verify_round_trip(tmp_path, capsys, fmt):
    path = tmp_path / f"eta.{fmt}"
    assert main(["generate", "--k", "4", "--n", "12", "--format", fmt, "--out", str(path)]) == 0
    code, out, _ = run(capsys, "verify", "--input", str(path))
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "pass" and len(report["operators"]) == 5
    assert run(capsys, "verify", "--input", str(path), "--jet")[0] == 0


def test_verify_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("# N=6\n[k=0]\neta^0 = 1\neta^2 = -A0\neta^3 = -A1\neta^4 = -A2 + 2*A0^2\n")
    code, out, _ = run(capsys, "verify", "--input", str(path))
    assert code == 1
    report = json.loads(out)["operators"]["k=0"]
    assert report["failures"]["vector:i=3"] == "2*A0"


def test_malformed_inputs_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "generate", "--k", "0", "--n", "0")
    assert code == 2 and "HorizonTooSmall" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("[k=0]\neta^0 = 1 +\n")
    assert run(capsys, "verify", "--input", str(bad))[0] == 2
    bad.write_text("{not json")
    assert run(capsys, "verify", "--input", str(bad))[0] == 2
    assert run(capsys, "verify", "--input", str(tmp_path / "missing.txt"))[0] == 2
    assert run(capsys, "no-such-command")[0] == 2
    h = tmp_path / "h.txt"
    h.write_text("A0 + A1")
    assert run(capsys, "kupershmidt", "--h", str(h), "--s", "3")[0] == 2


def test_point_ops(capsys):
    code, out, _ = run(capsys, "point-ops", "--n", "6")
    assert code == 0
    ops = load_operators(out)
    assert [op.name for op in ops] == ["X1", "X2", "X3", "X4", "X5"]
    assert ops[4].coords[0] == P("2*A0 - x*A0_x")
    assert ops[0].coords[6] is None
    assert out.count(": pass") == 5
    code, out, _ = run(capsys, "point-ops", "--n", "6", "--format", "json")
    assert json.loads(out)["verdict"] == "pass"


def test_bracket(capsys):
    code, out, _ = run(capsys, "bracket", "--row", "0", "--row", "1", "--n", "8")
    assert code == 0
    (op,) = load_operators(out)
    assert op.coords[3] == P("-1")
    assert "pass" in out
    assert run(capsys, "bracket", "--row", "0", "--n", "8")[0] == 2


def test_kupershmidt_chain(capsys, golden_dir):
    code, out, _ = run(capsys, "kupershmidt", "--h", str(golden_dir / "H7.txt"), "--s", "7", "--chain", "3")
    assert code == 0
    steps = json.loads(out)["steps"]
    assert [s["s"] for s in steps] == [7, 6, 5]
    assert [s["weighted_degree"] for s in steps] == [8, 7, 6]
    assert all(s["divisible"] for s in steps)
    assert P(steps[1]["H_prev"]) == P("A5 + 5*A0*A3 + 5*A1*A2 + 10*A0^2*A1")


def test_simulate_writes_snapshots(tmp_path, capsys, golden_dir):
    out_dir = tmp_path / "sim"
    assert main(["simulate", "--config", str(golden_dir / "shallow_water.json"), "--out", str(out_dir)]) == 0
    index = json.loads((out_dir / "snapshots.json").read_text())
    assert index["times"] == pytest.approx([0.0, 0.01, 0.02])
    lines = (out_dir / "A0_snap002.csv").read_text().splitlines()
    assert lines[0] == "x,A0" and len(lines) == 65
    assert sorted(p.name for p in out_dir.glob("*.csv")) == [
        f"A{i}_snap{k:03d}.csv" for i in range(2) for k in range(3)]


def test_defect_reports_refinement(tmp_path, capsys, golden_dir):
    code, out, _ = run(capsys, "defect", "--config", str(golden_dir / "two_stream.json"),
                       "--gen", "X3", "--a", "0.1", "--refine", "1")
    assert code == 0
    result = json.loads(out)
    assert result["M"] == [128, 256] and result["ratio"][0] > 12
    code, out, _ = run(capsys, "defect", "--config", str(golden_dir / "two_stream.json"),
                       "--gen", "X5", "--a", "0.2", "--weight-offset", "1")
    assert json.loads(out)["defect"][0] > 1e-3


def test_module_entry_point(golden_dir):
    proc = subprocess.run([sys.executable, "-m", "benney_sym", "generate", "--k", "0", "--n", "3"],
                          capture_output=True, text=True, check=True)
    assert "eta^2 = -A0" in proc.stdout
