"""Numerical conditional extrema: the Euler-Lagrange flow and its boundary-value problem.

The second-order equation is integrated in ambient coordinates as a first-order
system (x, v) with classical fixed-step RK4; after every step x is pulled back
to the manifold and v re-projected to the tangent space. The energy-like
constant b = |v|^2 - |A(x)|^2 and, for rotationally symmetric priors, the
rotational constant c are recorded from the initial data and monitored.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np
from scipy.integrate import simpson

from .fields import PriorField, SymmetricField
from .geom import Manifold, ManifoldError, TOL_MANIFOLD

logger = logging.getLogger(__name__)

DRIFT_TOL = 1e-6
DRIFT_TOL_FAIL = 1e-3
BVP_TOL = 1e-9
MAX_ITER = 50


class IntegrationError(RuntimeError):
    def __init__(self, message: str, time: float):
        super().__init__(f"{message} at t={time:.6g}")
        self.time = time


class ShootingError(RuntimeError):
    def __init__(self, message: str, best_residual: float, best_velocity=None):
        super().__init__(f"{message} (best endpoint residual {best_residual:.3g})")
        self.best_residual = best_residual
        self.best_velocity = best_velocity


@dataclass
class ExtremalCurve:
    """A sampled curve with velocities; ``segments`` lists the knot indices."""

    manifold: Manifold
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    b: float = float("nan")
    c: Optional[float] = None
    segments: List[int] = field(default_factory=list)
    jumps: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.asarray(self.points, dtype=float)
        self.velocities = np.asarray(self.velocities, dtype=float)
        if not self.segments:
            self.segments = [0, len(self.times) - 1]

    def __len__(self):
        return len(self.times)

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    def energy_residual(self, A: PriorField) -> np.ndarray:
        M = self.manifold
        vv = M.inner(self.velocities, self.velocities)
        aa = np.array([A.norm_sq(x) for x in self.points])
        return vv - aa - self.b

    def rotation_residual(self, A: SymmetricField) -> np.ndarray:
        return rotational_w(A.sigma, self.points, self.velocities) - _beta_vals(A, self.points) * (
            1 - self.points[:, 2] ** 2) - self.c

    def segment_slices(self):
        for a, b in zip(self.segments[:-1], self.segments[1:]):
            yield slice(a, b + 1)


def rotational_w(sigma: int, x, v) -> np.ndarray:
    x = np.asarray(x)
    v = np.asarray(v)
    return sigma * (x[..., 0] * v[..., 1] - x[..., 1] * v[..., 0])


def _beta_vals(A: SymmetricField, pts) -> np.ndarray:
    return np.array([float(A.beta(p[2])) for p in pts])


def el_rhs(A: PriorField, x, v, generic: bool = False) -> np.ndarray:
    """Ambient acceleration of a solution of the Euler-Lagrange equation.

    Fields with a closed-form ``acceleration`` use it unless ``generic`` is
    set, in which case the tangential forcing is assembled from
    ``half_grad_norm_sq`` and ``theta`` plus the constraint term.
    """
    M = A.manifold
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if x.shape[-1] != M.ambient_dim:
        raise ManifoldError(f"field lives on {M.name}, point has {x.shape[-1]} coordinates")
    if not generic and hasattr(A, "acceleration"):
        return A.acceleration(x, v)
    acc = A.half_grad_norm_sq(x) + A.theta(x, v)
    k = M.curvature
    if k:
        acc = acc - k * M.inner(v, v) * x
    return acc


def conserved_b(A: PriorField, x, v) -> float:
    M = A.manifold
    return float(M.inner(v, v) - A.norm_sq(x))


def conserved_c(A: PriorField, x, v) -> Optional[float]:
    if not isinstance(A, SymmetricField):
        return None
    return float(rotational_w(A.sigma, x, v) - float(A.beta(x[2])) * (1 - x[2] ** 2))


def _rhs_fn(A):
    if hasattr(A, "acceleration"):
        return A.acceleration
    return lambda x, v: el_rhs(A, x, v)


def _rk4_step(f, x, v, h):
    k1x, k1v = v, f(x, v)
    k2x, k2v = v + 0.5 * h * k1v, f(x + 0.5 * h * k1x, v + 0.5 * h * k1v)
    k3x, k3v = v + 0.5 * h * k2v, f(x + 0.5 * h * k2x, v + 0.5 * h * k2v)
    k4x, k4v = v + h * k3v, f(x + h * k3x, v + h * k3v)
    xn = x + (h / 6.0) * (k1x + 2 * k2x + 2 * k3x + k4x)
    vn = v + (h / 6.0) * (k1v + 2 * k2v + 2 * k3v + k4v)
    return xn, vn


def integrate_ivp(A: PriorField, x0, v0, t0: float, t1: float, step: float = 1e-3,
                  project: bool = True, monitor: bool = True) -> ExtremalCurve:
    """Fixed-step RK4 from (x0, v0) at t0 to t1 (t1 may precede t0)."""
    M = A.manifold
    x = M.check_point(np.asarray(x0, dtype=float), tol=1e-8)
    v = M.check_tangent(x, np.asarray(v0, dtype=float), tol=1e-8)
    n = max(1, int(math.ceil(abs(t1 - t0) / step - 1e-9)))
    h = (t1 - t0) / n
    times = t0 + h * np.arange(n + 1)
    times[-1] = t1
    xs = np.empty((n + 1, M.ambient_dim))
    vs = np.empty_like(xs)
    xs[0], vs[0] = x, v
    b = conserved_b(A, x, v)
    f = _rhs_fn(A)
    warned = False
    for i in range(n):
        x, v = _rk4_step(f, x, v, h)
        if project:
            x = M.retract(x)
            v = M.project(x, v)
        if not np.all(np.isfinite(x)) or not np.all(np.isfinite(v)):
            raise IntegrationError("non-finite state", times[i + 1])
        xs[i + 1], vs[i + 1] = x, v
        if monitor:
            drift = abs(conserved_b(A, x, v) - b)
            if drift > DRIFT_TOL_FAIL:
                raise IntegrationError(f"energy drift {drift:.3g} exceeds {DRIFT_TOL_FAIL}", times[i + 1])
            if drift > DRIFT_TOL and not warned:
                logger.warning("energy drift %.3g at t=%.6g", drift, times[i + 1])
                warned = True
    return ExtremalCurve(M, times, xs, vs, b=b, c=conserved_c(A, xs[0], vs[0]))


def endpoint(A: PriorField, x0, v0, t0, t1, step) -> np.ndarray:
    M = A.manifold
    x, v = np.asarray(x0, dtype=float), np.asarray(v0, dtype=float)
    n = max(1, int(math.ceil(abs(t1 - t0) / step - 1e-9)))
    h = (t1 - t0) / n
    f = _rhs_fn(A)
    for _ in range(n):
        x, v = _rk4_step(f, x, v, h)
        x = M.retract(x)
        v = M.project(x, v)
        if not np.all(np.isfinite(x)):
            return x
    return x


def _newton(A, x0, x1, t0, t1, p0, basis, step, tol, max_iter):
    """Damped Gauss-Newton on the tangent coordinates p of the initial velocity."""
    def resid(p):
        return endpoint(A, x0, p @ basis, t0, t1, step) - x1

    p = np.asarray(p0, dtype=float)
    r = resid(p)
    rn = np.linalg.norm(r) if np.all(np.isfinite(r)) else np.inf
    best = (rn, p.copy())
    for _ in range(max_iter):
        if rn < tol:
            return p, rn
        J = np.empty((len(r), len(p)))
        for j in range(len(p)):
            hj = 1e-7 * max(1.0, abs(p[j]))
            pj = p.copy()
            pj[j] += hj
            J[:, j] = (resid(pj) - r) / hj
        if not np.all(np.isfinite(J)):
            break
        dp = np.linalg.lstsq(J, -r, rcond=None)[0]
        lam = 1.0
        while lam > 1e-4:
            pn = p + lam * dp
            rnew = resid(pn)
            nn = np.linalg.norm(rnew) if np.all(np.isfinite(rnew)) else np.inf
            if nn < rn:
                p, r, rn = pn, rnew, nn
                break
            lam *= 0.5
        else:
            break
        if rn < best[0]:
            best = (rn, p.copy())
    if rn < tol:
        return p, rn
    raise ShootingError("shooting did not converge", best[0], best[1] @ basis)


def shoot_bvp(A: PriorField, x0, x1, t0: float, t1: float, v0_init=None, step: float = 1e-3,
              tol: float = BVP_TOL, max_iter: int = MAX_ITER, n_starts: int = 8,
              seed: int = 0) -> ExtremalCurve:
    """Two-point boundary-value solve of the Euler-Lagrange equation by shooting.

    The initial velocity is parameterised in an orthonormal tangent basis at
    x0. Starts are tried in order: ``v0_init`` (or the geodesic guess
    log(x0, x1)/(t1 - t0)), then ``n_starts`` seeded random perturbations of
    it. The first converged start wins.
    """
    M = A.manifold
    x0 = M.check_point(np.asarray(x0, dtype=float), tol=1e-8)
    x1 = M.check_point(np.asarray(x1, dtype=float), tol=1e-8)
    basis = M.tangent_basis(x0)
    if v0_init is None:
        v0_init = M.log_map(x0, x1) / (t1 - t0)
    v0_init = M.project(x0, np.asarray(v0_init, dtype=float))
    p_init = np.array([M.inner(v0_init, e) for e in basis])
    rng = np.random.default_rng(seed)
    scale = max(1.0, float(np.linalg.norm(p_init)))
    starts = [p_init] + [p_init + scale * rng.normal(size=len(p_init)) for _ in range(n_starts)]
    best = ShootingError("no start attempted", np.inf)
    for p0 in starts:
        try:
            p, _ = _newton(A, x0, x1, t0, t1, p0, basis, step, tol, max_iter)
        except ShootingError as exc:
            if exc.best_residual < best.best_residual:
                best = exc
            continue
        return integrate_ivp(A, x0, p @ basis, t0, t1, step=step)
    raise ShootingError(f"shooting failed from {len(starts)} starts", best.best_residual, best.best_velocity)


def shoot_multistart(A: PriorField, x0, x1, t0, t1, v0_inits: Sequence, step=1e-3,
                     tol=BVP_TOL, max_iter=MAX_ITER) -> List[ExtremalCurve]:
    """Converged extremals from every start, duplicates removed, sorted by J."""
    found = []
    for v in v0_inits:
        try:
            c = shoot_bvp(A, x0, x1, t0, t1, v0_init=v, step=step, tol=tol, max_iter=max_iter, n_starts=0)
        except (ShootingError, IntegrationError):
            continue
        if all(np.linalg.norm(c.velocities[0] - f.velocities[0]) > 1e-6 for f in found):
            found.append(c)
    return sorted(found, key=lambda c: functional_J(c, A))


def track_sum(segments: Sequence[ExtremalCurve], tol: float = TOL_MANIFOLD) -> ExtremalCurve:
    """Concatenate abutting segments; velocity jumps are kept in ``jumps``."""
    if not segments:
        raise ValueError("track_sum needs at least one segment")
    if len(segments) == 1:
        return segments[0]
    M = segments[0].manifold
    times = [segments[0].times]
    pts = [segments[0].points]
    vels = [segments[0].velocities]
    knots = [0, len(segments[0]) - 1]
    jumps = []
    for prev, seg in zip(segments[:-1], segments[1:]):
        if np.linalg.norm(prev.end - seg.start) > max(tol, 1e-8):
            raise ValueError(f"junction mismatch at t={seg.times[0]:.6g}")
        if abs(prev.times[-1] - seg.times[0]) > 1e-12:
            raise ValueError(f"segment times do not abut at t={seg.times[0]:.6g}")
        jumps.append(seg.velocities[0] - prev.velocities[-1])
        # the junction sample carries the right-hand velocity
        vels[-1] = vels[-1][:-1]
        pts[-1] = pts[-1][:-1]
        times[-1] = times[-1][:-1]
        times.append(seg.times)
        pts.append(seg.points)
        vels.append(seg.velocities)
        knots.append(knots[-1] + len(seg) - 1)
    return ExtremalCurve(M, np.concatenate(times), np.concatenate(pts), np.concatenate(vels),
                         b=segments[0].b, c=segments[0].c, segments=knots, jumps=jumps)


def integrand(curve: ExtremalCurve, A: PriorField) -> np.ndarray:
    M = curve.manifold
    d = curve.velocities - np.array([A.value(x) for x in curve.points])
    return M.inner(d, d)


def functional_J(curve: ExtremalCurve, A: PriorField) -> float:
    """Composite Simpson quadrature of |x' - A(x)|^2, segment by segment."""
    if len(curve) < 3:
        raise ValueError("functional_J needs at least 3 samples")
    f = integrand(curve, A)
    nseg = len(curve.segments) - 1
    total = 0.0
    for k, sl in enumerate(curve.segment_slices()):
        fk = f[sl].copy()
        if k < nseg - 1 and curve.jumps:
            # junction samples carry the right limit; this segment needs the left one
            i = sl.stop - 1
            d = curve.velocities[i] - curve.jumps[k] - A.value(curve.points[i])
            fk[-1] = float(curve.manifold.inner(d, d))
        total += float(simpson(fk, x=curve.times[sl]))
    return total


def sample_curve(manifold: Manifold, x_fn, v_fn, times, b=float("nan"), c=None) -> ExtremalCurve:
    times = np.asarray(times, dtype=float)
    return ExtremalCurve(manifold, times, np.array([x_fn(t) for t in times]),
                         np.array([v_fn(t) for t in times]), b=b, c=c)
