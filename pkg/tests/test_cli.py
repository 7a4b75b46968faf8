import json
import os
import subprocess
import sys

from condex import __version__
from condex.cli import main
from condex.scenario import bundled_scenarios


def test_list(capsys):
    assert main(["list"]) == 0
    names = capsys.readouterr().out.split()
    assert "s3ex" in names and len(names) == len(bundled_scenarios())


def test_run_bundled_by_name(tmp_path, capsys):
    assert main(["run", "s3ex", "--out", str(tmp_path)]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["scenario"] == "s3ex" and "closed_form" in rep["solvers"]
    assert (tmp_path / "s3ex_summary.json").exists()


def test_missing_file_is_input_error(capsys):
    assert main(["run", "no_such_scenario.json"]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"]["type"] == "FileNotFoundError"


def test_bad_scenario_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "name": "bad",\n  "manifold": {"kind": "spaceform"},\n  "prior": {"type": "zero"},\n'
                 '  "solver": "wrong"\n}\n')
    assert main(["run", str(p)]) == 2
    err = json.loads(capsys.readouterr().err)["error"]
    assert err["type"] == "ScenarioError" and err["line"] == 5


def test_inapplicable_solver_is_solver_error(capsys):
    assert main(["run", "refex", "--solver", "closed_form"]) == 3
    assert json.loads(capsys.readouterr().err)["error"]["type"] == "SolverError"


def test_console_script_version():
    out = subprocess.run([sys.executable, "-m", "condex.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == f"condex {__version__}"
