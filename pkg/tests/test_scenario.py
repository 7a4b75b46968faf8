import json
import math
import os

import numpy as np
import pytest

from condex import scenario as sc
from condex.geom import S2


def _base(**over):
    d = {
        "name": "demo",
        "manifold": {"kind": "spaceform", "sigma": 1},
        "prior": {"type": "symmetric", "beta": -1.0, "gamma": 0.0},
        "waypoints": [{"t": 0.0, "x": [1.0, 0.0, 0.0]}, {"t": 1.0, "x": [0.0, 0.6, 0.8]}],
        "solver": "variational",
        "grid": {"N": 40},
    }
    d.update(over)
    return json.dumps(d, indent=2)


def test_parse_and_digest():
    cfg = sc.parse_scenario(_base())
    assert cfg.name == "demo" and cfg.manifold is S2 and cfg.N == 40
    assert len(cfg.digest) == 16
    # key order and whitespace do not change the digest
    again = sc.parse_scenario(json.dumps(json.loads(_base()), sort_keys=True))
    assert again.digest == cfg.digest
    assert sc.parse_scenario(_base(seed=3)).digest != cfg.digest


def test_invalid_json_reports_line():
    text = _base().replace('"solver": "variational",', '"solver": "variational"')
    with pytest.raises(sc.ScenarioError) as exc:
        sc.parse_scenario(text)
    assert exc.value.line == text.splitlines().index('  "grid": {') + 1


def test_schema_errors_report_line():
    text = _base(solver="magic")
    with pytest.raises(sc.ScenarioError) as exc:
        sc.parse_scenario(text)
    line = [i + 1 for i, l in enumerate(text.splitlines()) if '"solver"' in l][0]
    assert exc.value.line == line
    bad = json.loads(_base())
    bad["waypoints"][1]["x"] = [0.0, 2.0, 0.0]
    with pytest.raises(sc.ScenarioError, match="off S2"):
        sc.parse_scenario(json.dumps(bad))
    bad["waypoints"][1]["x"] = [0.0, 1.0]
    with pytest.raises(sc.ScenarioError, match="coordinates"):
        sc.parse_scenario(json.dumps(bad))
    with pytest.raises(sc.ScenarioError, match="kind"):
        sc.parse_scenario(_base(manifold={"kind": "torus"}))
    with pytest.raises(sc.ScenarioError, match="prior"):
        sc.parse_scenario(_base(prior={"type": "affine", "B": [[1.0]]}))
    with pytest.raises(sc.ScenarioError, match="increasing"):
        sc.parse_scenario(_base(waypoints=[{"t": 1.0, "x": [1, 0, 0]}, {"t": 0.0, "x": [0, 1, 0]}]))
    with pytest.raises(sc.ScenarioError, match="missing"):
        sc.parse_scenario(json.dumps({"name": "x"}))


def test_auto_projection_warns():
    d = json.loads(_base())
    d["waypoints"][1]["x"] = [0.0, 0.6, 0.8004]
    cfg = sc.parse_scenario(json.dumps(d))
    assert any("projected onto S2" in w for w in cfg.warnings)
    assert abs(np.linalg.norm(cfg.waypoints[1]) - 1) < 1e-15
    d["initial"] = {"x0": [1.0, 0.0, 0.0], "v0": [0.3, 1.0, 0.0], "t1": 1.0}
    cfg = sc.parse_scenario(json.dumps(d))
    assert any("tangent space" in w for w in cfg.warnings)
    np.testing.assert_allclose(cfg.initial["v0"], [0.0, 1.0, 0.0])


def test_run_writes_outputs_and_csv_roundtrip(tmp_path):
    cfg = sc.parse_scenario(_base())
    report = sc.run_scenario(cfg, out_dir=str(tmp_path))
    summ = report["solvers"]["variational"]
    assert summ["converged"]
    files = sorted(os.listdir(tmp_path))
    assert files == ["demo.svg", "demo_summary.json", "demo_variational.csv"]
    header, cols, data = sc.read_csv(str(tmp_path / "demo_variational.csv"))
    assert header.startswith("# condex ") and f"sha256={cfg.digest}" in header
    assert cols[:4] == ["t", "x1", "x2", "x3"] and cols[-3:] == ["integrand", "energy_residual", "rotation_residual"]
    assert data.shape == (41, len(cols))
    # %.17g round-trips every double
    text = (tmp_path / "demo_variational.csv").read_text()
    _, _, again = sc.read_csv(text)
    np.testing.assert_array_equal(again, data)
    np.testing.assert_allclose(np.linalg.norm(data[:, 1:4], axis=1), 1.0, atol=1e-12)
    saved = json.loads((tmp_path / "demo_summary.json").read_text())
    assert saved == report


def test_solver_applicability():
    cfg = sc.parse_scenario(_base())
    with pytest.raises(sc.SolverError):
        sc.run_scenario(cfg, solver="closed_form")
    with pytest.raises(sc.ScenarioError):
        sc.run_scenario(cfg, solver="bogus")


def test_closed_form_and_shooting_agree():
    d = json.loads(_base(solver="all"))
    d["waypoints"] = []
    d["initial"] = {"x0": [1.0, 0.0, 0.0], "v0": [0.0, -1.0, 2.0], "t1": 1.0}
    d["grid"] = {"sample": 0.01, "step": 1e-3}
    cfg = sc.parse_scenario(json.dumps(d))
    rep = sc.run_scenario(cfg, solver="all")
    cf, sh = rep["solvers"]["closed_form"], rep["solvers"]["shoot"]
    assert cf["J"] == pytest.approx(sh["J"], rel=1e-6)
    assert cf["b"] == pytest.approx(sh["b"], rel=1e-9)


@pytest.mark.parametrize("path", sc.bundled_scenarios(), ids=lambda p: os.path.basename(p))
def test_bundled_scenarios_parse(path):
    cfg = sc.load_scenario(path)
    assert cfg.name == os.path.splitext(os.path.basename(path))[0]
    sc.build_prior(cfg)
