import json
import subprocess
import sys

import pytest

from edsrestore.cli import main


def run_cli(*argv):
    return main([str(a) for a in argv])


def test_idp_fig3(capsys):
    assert run_cli("idp", "--scenario", "fig3_mas", "--at-min", 0) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["ccps"] == [[1, 2, 3, 4], [5, 6]]
    assert out["elapsed_ms"] == out["rounds"]


def test_idp_non_convergence_exit(capsys):
    assert run_cli("idp", "--scenario", "fig3_mas", "--max-iter", 2) == 2


def test_run_verify_compare(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run_cli("run", "--scenario", "path13", "--out", a, "--no-figures") == 0
    assert run_cli("run", "--scenario", "path13", "--out", b, "--no-figures", "--seed", 3) == 0
    assert (a / "timeline.csv").read_bytes() == (b / "timeline.csv").read_bytes()
    assert run_cli("verify", "--result", a) == 0
    capsys.readouterr()
    assert run_cli("compare", "--result", a, "--result", b, "--at-min", 40, "--out", tmp_path / "c.json") == 0
    block = json.loads((tmp_path / "c.json").read_text())
    assert block["difference"]["total_load"] == 0.0


def test_verify_detects_tampering(tmp_path):
    out = tmp_path / "r"
    assert run_cli("run", "--scenario", "tri3", "--out", out, "--no-figures") == 0
    f = out / "schedule_0_1.json"
    doc = json.loads(f.read_text())
    doc["schedule"]["series"]["PL1"]["1"][1] += 5.0
    f.write_text(json.dumps(doc))
    assert run_cli("verify", "--result", out) == 3


def test_solve_ccp_and_export(tmp_path, capsys):
    lp = tmp_path / "m.lp"
    assert run_cli("solve-ccp", "--scenario", "tri3", "--ccp", 1, "--export-lp", lp,
                   "--out", tmp_path / "s.json") == 0
    res = json.loads(capsys.readouterr().out)
    assert res["status"] == "optimal"
    assert lp.read_text().startswith("\\")
    assert run_cli("solve-ccp", "--scenario", "tri3", "--ccp", 1, "--solver", "none") == 0


def test_solve_ccp_external(capsys):
    assert run_cli("solve-ccp", "--scenario", "tri3", "--ccp", 1, "--solver", "external") == 0
    assert json.loads(capsys.readouterr().out)["backend"] == "external"


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "nope", "--out", "x"],
    ["run", "--scenario", "tri3"],
    ["solve-ccp", "--scenario", "tri3", "--ccp", 2],
    ["verify", "--result", "/nonexistent"],
    ["compare", "--result", "a", "--at-min", "90"],
    ["frobnicate"],
])
def test_input_errors_exit_1(argv, capsys):
    assert run_cli(*argv) == 1


def test_console_script():
    out = subprocess.run([sys.executable, "-m", "edsrestore.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and "edsrestore" in out.stdout
