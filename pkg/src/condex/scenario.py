"""Scenario files: parsing, dispatch to the solvers, and output writing.

A scenario is one JSON document. Recognised keys:

    name        identifier used for output file names
    manifold    {"kind": "spaceform", "sigma": 1} | {"kind": "euclidean", "dim": m}
                | {"kind": "quaternions"}
    prior       {"type": "symmetric", "beta": b, "gamma": g}
                | {"type": "affine", "B": [[...]], "c": [...]}
                | {"type": "constant", "c": [...]}
                | {"type": "left_invariant", "alpha": [a1, a2, a3] or "fit"}
                | {"type": "zero"}
    waypoints   [{"t": t_k, "x": [...]}, ...]           boundary data
    initial     {"t0", "t1", "x0", "v0"}                 initial data
    horizontal  {"lam", "eps", "v0", "psi0", "t0", "t1"} gamma = 0 parameters
    solver      "closed_form" | "shoot" | "variational" | "all"
    grid        {"N": 400, "step": 1e-3, "sample": 0.01}
    reverse     true to also minimise for the reversed data
    seed        integer seed for shooting restarts
    init        "geodesic" (default) or "flow" start for variational solves
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from . import extremal as ex
from . import figures
from . import quatgroup as qg
from . import spaceforms as sf
from . import variational as var
from .euclid import affine_cost, affine_extremal_eval, affine_extremal_velocity, solve_endpoint_d
from .fields import (AffineField, ConstantField, LeftInvariantField, PriorField, SymmetricField)
from .geom import Manifold, ManifoldError, S3, euclidean, space_form

log = logging.getLogger(__name__)

SOLVERS = ("closed_form", "shoot", "variational", "all")
PROJECT_TOL = 1e-3
CSV_FORMAT = "%.17g"


class ScenarioError(ValueError):
    """Bad scenario input; ``line`` points into the JSON text when known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(message if line is None else f"line {line}: {message}")


class SolverError(RuntimeError):
    pass


@dataclass
class Curve:
    """One solver output, ready for CSV and figure emission."""

    label: str
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    segments: List[int] = field(default_factory=list)


@dataclass
class ScenarioConfig:
    name: str
    manifold: Manifold
    prior: Dict
    waypoints: List[np.ndarray]
    times: List[float]
    initial: Optional[Dict]
    horizontal: Optional[Dict]
    solver: str
    N: int
    step: float
    sample: float
    reverse: bool
    seed: int
    digest: str
    init: str = "geodesic"
    warnings: List[str] = field(default_factory=list)


def _line_of(text: str, key: str) -> Optional[int]:
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def _manifold(spec, text) -> Manifold:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError("manifold needs a 'kind'", _line_of(text, "manifold"))
    kind = spec["kind"]
    if kind == "spaceform":
        sigma = int(spec.get("sigma", 1))
        if sigma not in (1, -1):
            raise ScenarioError("sigma must be +1 or -1", _line_of(text, "sigma"))
        return space_form(sigma)
    if kind == "euclidean":
        return euclidean(int(spec.get("dim", 3)))
    if kind == "quaternions":
        return S3
    raise ScenarioError(f"unknown manifold kind {kind!r}", _line_of(text, "kind"))


def _check_point(M: Manifold, x, label: str, warnings: List[str], text: str, key: str) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (M.ambient_dim,):
        raise ScenarioError(f"{label} needs {M.ambient_dim} coordinates", _line_of(text, key))
    res = M.constraint_residual(x)
    if res > PROJECT_TOL:
        raise ScenarioError(f"{label} is {res:.3g} off {M.name} (limit {PROJECT_TOL})", _line_of(text, key))
    if res > 0 and M.kind != "euclidean":
        y = M.retract(x)
        if res > 1e-12:
            msg = f"{label} projected onto {M.name} (constraint residual {res:.3g})"
            log.warning(msg)
            warnings.append(msg)
        return y
    return x


def parse_scenario(text: str) -> ScenarioConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    if not isinstance(raw, dict):
        raise ScenarioError("scenario must be a JSON object", 1)
    digest = hashlib.sha256(json.dumps(raw, sort_keys=True).encode()).hexdigest()[:16]
    for key in ("name", "manifold", "prior"):
        if key not in raw:
            raise ScenarioError(f"missing required key {key!r}")
    M = _manifold(raw["manifold"], text)
    warnings: List[str] = []
    wps, times = [], []
    for k, w in enumerate(raw.get("waypoints", [])):
        if "t" not in w or "x" not in w:
            raise ScenarioError(f"waypoint {k} needs 't' and 'x'", _line_of(text, "waypoints"))
        times.append(float(w["t"]))
        wps.append(_check_point(M, w["x"], f"waypoint {k}", warnings, text, "waypoints"))
    if any(b <= a for a, b in zip(times[:-1], times[1:])):
        raise ScenarioError("waypoint times must be strictly increasing", _line_of(text, "waypoints"))
    initial = raw.get("initial")
    if initial is not None:
        initial = dict(initial)
        x0 = _check_point(M, initial["x0"], "initial x0", warnings, text, "x0")
        v0 = np.asarray(initial["v0"], dtype=float)
        v0p = M.project(x0, v0)
        if np.linalg.norm(v0p - v0) > 1e-12 * max(1.0, np.linalg.norm(v0)):
            msg = f"initial v0 projected to the tangent space (moved by {np.linalg.norm(v0p - v0):.3g})"
            log.warning(msg)
            warnings.append(msg)
        initial["x0"], initial["v0"] = x0, v0p
        if float(initial["t1"]) == float(initial.get("t0", 0.0)):
            raise ScenarioError("initial t1 must differ from t0", _line_of(text, "t1"))
    solver = raw.get("solver", "all")
    if solver not in SOLVERS:
        raise ScenarioError(f"unknown solver {solver!r}; choose from {SOLVERS}", _line_of(text, "solver"))
    grid = raw.get("grid", {})
    cfg = ScenarioConfig(
        name=str(raw["name"]), manifold=M, prior=dict(raw["prior"]), waypoints=wps, times=times,
        initial=initial, horizontal=raw.get("horizontal"), solver=solver,
        N=int(grid.get("N", var.N_DEFAULT)), step=float(grid.get("step", 1e-3)),
        sample=float(grid.get("sample", 0.01)), reverse=bool(raw.get("reverse", False)),
        seed=int(raw.get("seed", 0)), digest=digest, warnings=warnings,
        init=str(raw.get("init", "geodesic")))
    if cfg.init not in ("geodesic", "flow"):
        raise ScenarioError(f"unknown init {cfg.init!r}", _line_of(text, "init"))
    build_prior(cfg)  # validate early
    return cfg


def load_scenario(path: str) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def build_prior(cfg: ScenarioConfig, alpha=None) -> PriorField:
    p = cfg.prior
    M = cfg.manifold
    kind = p.get("type")
    if kind == "zero":
        if M.kind == "spaceform":
            return SymmetricField(M.sigma)
        if M.kind == "quaternions":
            return LeftInvariantField(np.zeros(3))
        return ConstantField(np.zeros(M.dim))
    if kind == "symmetric":
        if M.kind != "spaceform":
            raise ScenarioError("symmetric priors live on S2 or H2")
        return SymmetricField(M.sigma, float(p.get("beta", 0.0)), float(p.get("gamma", 0.0)))
    if kind == "affine":
        if M.kind != "euclidean":
            raise ScenarioError("affine priors live on E^m")
        f = AffineField(np.asarray(p["B"], dtype=float), np.asarray(p.get("c", np.zeros(M.dim)), dtype=float))
        if f.B.shape[0] != M.dim:
            raise ScenarioError("affine B does not match the dimension")
        return f
    if kind == "constant":
        if M.kind != "euclidean":
            raise ScenarioError("constant priors live on E^m")
        return ConstantField(np.asarray(p["c"], dtype=float))
    if kind == "left_invariant":
        if M.kind != "quaternions":
            raise ScenarioError("left-invariant priors live on S3")
        a = p.get("alpha", "fit")
        if alpha is not None:
            return LeftInvariantField(alpha)
        return LeftInvariantField(np.zeros(3) if a == "fit" else np.asarray(a, dtype=float))
    raise ScenarioError(f"unknown prior type {kind!r}")


def _sample_times(t0: float, t1: float, spacing: float) -> np.ndarray:
    n = max(2, int(math.ceil(abs(t1 - t0) / spacing - 1e-9)))
    n += n % 2  # even interval count for Simpson
    return np.linspace(t0, t1, n + 1)


# -- solvers ------------------------------------------------------------------


def _closed_form(cfg: ScenarioConfig, A: PriorField, summary: Dict) -> Curve:
    M = cfg.manifold
    if M.kind == "quaternions":
        alpha = A.alpha
        if cfg.prior.get("alpha", "fit") == "fit":
            fit = qg.optimize_prior_AL(cfg.waypoints, cfg.times)
            alpha = fit.A_L
            summary["A_L"] = fit.A_L.tolist()
        res = qg.stationarity_residual(alpha, cfg.waypoints, cfg.times)
        summary["B_L"] = [b.tolist() for b in res.B_list]
        summary["sum_B_norm"] = float(np.linalg.norm(res.sum_B))
        summary["gradient_norm"] = float(np.linalg.norm(res.gradient))
        segs = qg.interpolant(alpha, cfg.waypoints, cfg.times)
        summary["J"] = float(sum(qg.segment_cost(s) for s in segs))
        ts, xs, vs, knots = [], [], [], [0]
        for k, s in enumerate(segs):
            tt = _sample_times(s.t_start, s.t_end, cfg.sample)
            if k:
                tt = tt[1:]
            ts.extend(tt)
            xs.extend(qg.segment_eval(s, t) for t in tt)
            vs.extend(qg.segment_velocity(s, t) for t in tt)
            knots.append(len(ts) - 1)
        return Curve("closed_form", np.array(ts), np.array(xs), np.array(vs), knots)

    if M.kind == "euclidean":
        if not isinstance(A, (AffineField, ConstantField)):
            raise SolverError("closed forms on E^m need an affine or constant prior")
        B = A.B if isinstance(A, AffineField) else np.zeros((M.dim, M.dim))
        c = A.c
        ts, xs, vs, knots, J = [], [], [], [0], 0.0
        for k in range(len(cfg.waypoints) - 1):
            e = solve_endpoint_d(B, c, cfg.waypoints[k], cfg.waypoints[k + 1], cfg.times[k], cfg.times[k + 1])
            J += affine_cost(e, cfg.times[k + 1])
            tt = _sample_times(cfg.times[k], cfg.times[k + 1], cfg.sample)
            if k:
                tt = tt[1:]
            ts.extend(tt)
            xs.extend(np.atleast_2d(affine_extremal_eval(e, tt)))
            vs.extend(np.atleast_2d(affine_extremal_velocity(e, tt)))
            knots.append(len(ts) - 1)
        summary["J"] = float(J)
        return Curve("closed_form", np.array(ts), np.array(xs), np.array(vs), knots)

    if not isinstance(A, SymmetricField) or not A.is_constant:
        raise SolverError("closed forms on space forms need constant beta and gamma")
    beta, gamma = A.beta_const, A.gamma_const
    if cfg.horizontal is not None:
        h = cfg.horizontal
        if gamma != 0:
            raise SolverError("horizontal parameters need gamma = 0")
        form = sf.HorizontalForm(M.sigma, float(h["lam"]), float(h["eps"]), float(h.get("v0", 0.0)),
                                 float(h.get("psi0", 0.0)), beta)
        tt = _sample_times(float(h.get("t0", 0.0)), float(h["t1"]), cfg.sample)
        pts, vel = sf.horizontal_closed_form(form, tt), sf.horizontal_velocity(form, tt)
        summary.update(b=form.b, c=form.c, J=float(form.integrand * (tt[-1] - tt[0])),
                       integrand=form.integrand, lam=form.lam, eps=form.eps)
        return Curve("closed_form", tt, pts, vel)
    if cfg.initial is None:
        raise SolverError("closed forms on space forms need initial data or horizontal parameters")
    x0, v0 = cfg.initial["x0"], cfg.initial["v0"]
    t0, t1 = float(cfg.initial.get("t0", 0.0)), float(cfg.initial["t1"])
    if t0 != 0.0:
        raise SolverError("closed forms are parameterised from t0 = 0")
    tt = _sample_times(t0, t1, cfg.sample)
    if gamma == 0:
        form = sf.horizontal_from_initial(M.sigma, beta, x0, v0)
        pts, vel = sf.horizontal_closed_form(form, tt), sf.horizontal_velocity(form, tt)
        summary.update(b=form.b, c=form.c, lam=form.lam, eps=form.eps)
    else:
        form = sf.weierstrass_from_initial(M.sigma, beta, gamma, x0, v0)
        pts, vel = sf.weierstrass_curve(form, tt)
        summary.update(b=form.b, c=form.c, d=form.d, delta=form.delta, dbar=form.dbar,
                       g2=form.g2, g3=form.g3, a=[form.a.real, form.a.imag],
                       wp_period=form.wp_period, x3_period=form.x3_period)
    f = M.inner(vel - A.values(pts), vel - A.values(pts))
    summary["J"] = float(_simpson(f, tt))
    return Curve("closed_form", tt, pts, vel)


def _simpson(f, t) -> float:
    from scipy.integrate import simpson
    return float(simpson(f, x=t))


def _shoot(cfg: ScenarioConfig, A: PriorField, summary: Dict) -> Curve:
    segs = []
    if cfg.initial is not None:
        ini = cfg.initial
        c = ex.integrate_ivp(A, ini["x0"], ini["v0"], float(ini.get("t0", 0.0)), float(ini["t1"]), step=cfg.step)
    elif len(cfg.waypoints) >= 2:
        segs = [ex.shoot_bvp(A, cfg.waypoints[k], cfg.waypoints[k + 1], cfg.times[k], cfg.times[k + 1],
                             step=cfg.step, seed=cfg.seed + k)
                for k in range(len(cfg.waypoints) - 1)]
        c = ex.track_sum(segs)
    else:
        raise SolverError("shooting needs initial data or at least two waypoints")
    pieces = segs if cfg.initial is None else [c]
    summary["J"] = ex.functional_J(c, A)
    # space forms report sigma |v|^2 - (beta^2 + gamma^2)(1 - x3^2), the closed-form convention
    sig = cfg.manifold.sigma if cfg.manifold.kind == "spaceform" else 1
    summary["b"] = [sig * float(p.b) for p in pieces] if len(pieces) > 1 else sig * float(c.b)
    if c.c is not None:
        summary["c"] = [float(p.c) for p in pieces] if len(pieces) > 1 else float(c.c)
    summary["energy_drift"] = max(float(np.max(np.abs(p.energy_residual(A)))) for p in pieces)
    if isinstance(A, SymmetricField):
        summary["rotation_drift"] = max(float(np.max(np.abs(p.rotation_residual(A)))) for p in pieces)
    # thin to the sampling grid for output
    stride = max(1, int(round(cfg.sample / cfg.step)))
    keep = sorted(set(range(0, len(c), stride)) | set(c.segments))
    seg_idx = [keep.index(s) for s in c.segments]
    return Curve("shoot", c.times[keep], c.points[keep], c.velocities[keep], seg_idx)


def _variational_curve(label: str, curve: var.DiscreteCurve) -> Curve:
    M = curve.manifold
    V = np.empty_like(curve.points)
    for a, b in zip(curve.pinned[:-1], curve.pinned[1:]):
        sl = slice(a, b + 1)
        V[sl] = np.gradient(curve.points[sl], curve.times[sl], axis=0, edge_order=2)
    V = M.project(curve.points, V)
    return Curve(label, curve.times, curve.points, V, list(curve.pinned))


def _variational(cfg: ScenarioConfig, A: PriorField, summary: Dict) -> List[Curve]:
    if len(cfg.waypoints) < 2:
        raise SolverError("variational solves need at least two waypoints")
    res = var.minimize_scenario(A, cfg.waypoints, cfg.times, N=cfg.N, init=cfg.init)
    summary.update(J=res.J, J_simpson=var.simpson_J(res.curve, A), iterations=res.iterations,
                   converged=res.converged, grad_norm=res.grad_norm)
    out = [_variational_curve("variational", res.curve)]
    if cfg.reverse:
        W, T = var.reverse_scenario(cfg.waypoints, cfg.times)
        rev = var.minimize_scenario(A, W, T, N=cfg.N, init=cfg.init)
        summary["reverse_data_J"] = rev.J
        summary["reverse_data_converged"] = rev.converged
        summary["reversed_forward_J"] = var.discrete_J(var.reverse_data(res.curve), A)
        out.append(_variational_curve("reverse_data", rev.curve))
    return out


def _applicable(cfg: ScenarioConfig) -> List[str]:
    M = cfg.manifold
    out = []
    if M.kind == "quaternions" and len(cfg.waypoints) >= 2:
        out.append("closed_form")
    elif M.kind == "euclidean" and cfg.prior.get("type") in ("affine", "constant") and len(cfg.waypoints) >= 2:
        out.append("closed_form")
    elif M.kind == "spaceform" and (cfg.initial is not None or cfg.horizontal is not None):
        out.append("closed_form")
    if cfg.initial is not None or (len(cfg.waypoints) >= 2 and M.kind != "quaternions"):
        out.append("shoot")
    if len(cfg.waypoints) >= 2:
        out.append("variational")
    return out


# -- output -------------------------------------------------------------------


def csv_text(cfg: ScenarioConfig, A: PriorField, curve: Curve, b: Optional[float] = None) -> str:
    M = cfg.manifold
    p = M.ambient_dim
    X, V = curve.points, curve.velocities
    Av = A.values(X)
    f = M.inner(V - Av, V - Av)
    vv = M.inner(V, V) - np.array([A.norm_sq(x) for x in X])
    e_res = vv - (vv[0] if b is None else b)
    if isinstance(A, SymmetricField):
        w = ex.rotational_w(A.sigma, X, V) - np.array([float(A.beta(x[2])) for x in X]) * (1 - X[:, 2] ** 2)
        r_res = w - w[0]
    else:
        r_res = np.full(len(X), np.nan)
    cols = (["t"] + [f"x{i + 1}" for i in range(p)] + [f"v{i + 1}" for i in range(p)]
            + ["integrand", "energy_residual", "rotation_residual"])
    data = np.column_stack([curve.times, X, V, f, e_res, r_res])
    lines = [f"# condex {__version__} scenario={cfg.name} sha256={cfg.digest} solver={curve.label} columns=1",
             ",".join(cols)]
    lines += [",".join(CSV_FORMAT % v for v in row) for row in data]
    return "\n".join(lines) + "\n"


def read_csv(path_or_text: str):
    """(header comment, column names, float array) from an emitted CSV."""
    text = path_or_text
    if "\n" not in path_or_text and os.path.exists(path_or_text):
        with open(path_or_text, encoding="utf-8") as fh:
            text = fh.read()
    lines = text.splitlines()
    if not lines or not lines[0].startswith("#"):
        raise ScenarioError("CSV is missing its header comment", 1)
    cols = lines[1].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[2:]])
    return lines[0], cols, data


def _orbits(cfg: ScenarioConfig, A: PriorField, starts, span: float):
    M = cfg.manifold
    if isinstance(A, SymmetricField) and A.gamma_const == 0.0:
        return figures.latitude_orbits(M)
    out = []
    n = 200
    h = span / n
    for x in starts:
        pts = [x]
        for _ in range(n):
            k1 = A.value(x)
            k2 = A.value(M.retract(x + 0.5 * h * k1))
            k3 = A.value(M.retract(x + 0.5 * h * k2))
            k4 = A.value(M.retract(x + h * k3))
            x = M.retract(x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6)
            pts.append(x)
        out.append(np.array(pts))
    return out


def _clean(v):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer, int)):
        return int(v)
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def run_scenario(cfg: ScenarioConfig, out_dir: Optional[str] = None, solver: Optional[str] = None,
                 seed: Optional[int] = None) -> Dict:
    """Run the requested solver(s); write CSV, SVG and summary JSON if ``out_dir``."""
    solver = solver or cfg.solver
    if solver not in SOLVERS:
        raise ScenarioError(f"unknown solver {solver!r}")
    if seed is not None:
        cfg.seed = int(seed)
    A = build_prior(cfg)
    wanted = _applicable(cfg) if solver == "all" else [solver]
    if solver != "all" and solver not in _applicable(cfg):
        raise SolverError(f"solver {solver!r} does not apply to scenario {cfg.name!r}")
    report = {"scenario": cfg.name, "manifold": cfg.manifold.name, "version": __version__,
              "sha256": cfg.digest, "warnings": list(cfg.warnings), "solvers": {}}
    curves: List[Curve] = []
    field_for_csv = A
    for s in wanted:
        summ: Dict = {}
        if s == "closed_form":
            curves.append(_closed_form(cfg, A, summ))
            if "A_L" in summ:
                field_for_csv = build_prior(cfg, alpha=np.asarray(summ["A_L"]))
        elif s == "shoot":
            curves.append(_shoot(cfg, A, summ))
        else:
            curves.extend(_variational(cfg, A, summ))
        report["solvers"][s] = summ
    report = _clean(report)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        for c in curves:
            with open(os.path.join(out_dir, f"{cfg.name}_{c.label}.csv"), "w", encoding="utf-8", newline="\n") as fh:
                fh.write(csv_text(cfg, field_for_csv, c))
        starts = [c.points[0] for c in curves[:1]]
        span = float(curves[0].times[-1] - curves[0].times[0]) if curves else 1.0
        svg = figures.emit_figure(cfg.manifold, [c.points for c in curves],
                                  orbits=_orbits(cfg, field_for_csv, starts, span), title=cfg.name)
        with open(os.path.join(out_dir, f"{cfg.name}.svg"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
        with open(os.path.join(out_dir, f"{cfg.name}_summary.json"), "w", encoding="utf-8", newline="\n") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return report


def bundled_dir() -> str:
    return os.path.join(os.path.dirname(os.path.abspath(__file__)), "scenarios")


def bundled_scenarios() -> List[str]:
    d = bundled_dir()
    return sorted(os.path.join(d, f) for f in os.listdir(d) if f.endswith(".json"))
