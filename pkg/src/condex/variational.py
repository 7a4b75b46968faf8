"""Direct minimisation of the discretised functional J over sampled curves.

A curve is a list of ambient points on a uniform grid per segment, with
the waypoints pinned. The objective is the forward-difference rectangle
sum

    J_h = sum_i h_i |(p_{i+1} - p_i)/h_i - A(p_i)|^2

so its gradient is exact and the descent below is consistent with it.
Simpson's rule is only used to report J on a converged curve.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import solve_banded

from .fields import PriorField
from .geom import Manifold

log = logging.getLogger(__name__)

GRAD_TOL = 1e-8
MAX_ITER = 20000
N_DEFAULT = 400


class VariationalError(ValueError):
    pass


@dataclass
class DiscreteCurve:
    """Samples ``points[i]`` at ``times[i]``; ``pinned`` indexes the waypoints."""

    manifold: Manifold
    times: np.ndarray
    points: np.ndarray
    pinned: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.points = np.array(self.points, dtype=float)
        self.pinned = np.asarray(self.pinned, dtype=int)
        if self.points.shape != (len(self.times), self.manifold.ambient_dim):
            raise VariationalError("points and times disagree in length or dimension")
        if np.any(np.diff(self.times) <= 0):
            raise VariationalError("times must be strictly increasing")
        if len(self.pinned) < 2 or self.pinned[0] != 0 or self.pinned[-1] != len(self.times) - 1:
            raise VariationalError("both endpoints must be pinned")
        if np.any(np.diff(self.pinned) < 2):
            raise VariationalError("need at least two samples per segment")

    @property
    def waypoints(self) -> np.ndarray:
        return self.points[self.pinned]

    @property
    def waypoint_times(self) -> np.ndarray:
        return self.times[self.pinned]

    def copy(self) -> "DiscreteCurve":
        return DiscreteCurve(self.manifold, self.times.copy(), self.points.copy(), self.pinned.copy())


def _grid(times: Sequence[float], N: int):
    times = np.asarray(times, dtype=float)
    if N < 2:
        raise VariationalError("need N >= 2 intervals per segment")
    grid = [times[0]]
    for a, b in zip(times[:-1], times[1:]):
        grid.extend(np.linspace(a, b, N + 1)[1:])
    return np.array(grid), np.arange(len(times)) * N


def geodesic_init(manifold: Manifold, waypoints, times, N: int = N_DEFAULT) -> DiscreteCurve:
    """Piecewise minimal-geodesic interpolant with N intervals per segment."""
    W = np.asarray(waypoints, dtype=float)
    grid, pinned = _grid(times, N)
    pts = [W[0]]
    for k in range(len(W) - 1):
        v = manifold.log_map(W[k], W[k + 1])
        for s in np.linspace(0.0, 1.0, N + 1)[1:-1]:
            pts.append(manifold.geodesic_point(W[k], v, s))
        pts.append(W[k + 1])
    return DiscreteCurve(manifold, grid, np.array(pts), pinned)


def integral_curve_init(A: PriorField, waypoints, times, N: int = N_DEFAULT,
                        substeps: int = 4) -> DiscreteCurve:
    """Follow the flow of A from each waypoint, then bend it onto the next.

    The endpoint mismatch is removed by a linear-in-time correction followed
    by reprojection, so the start lies in the basin of extrema that ride
    along the orbits of A.
    """
    M = A.manifold
    W = np.asarray(waypoints, dtype=float)
    grid, pinned = _grid(times, N)
    pts = [W[0]]
    for k in range(len(W) - 1):
        ts = grid[pinned[k]:pinned[k + 1] + 1]
        flow = [W[k]]
        x = W[k]
        for a, b in zip(ts[:-1], ts[1:]):
            h = (b - a) / substeps
            for _ in range(substeps):
                k1 = A.value(x)
                k2 = A.value(M.retract(x + 0.5 * h * k1))
                k3 = A.value(M.retract(x + 0.5 * h * k2))
                k4 = A.value(M.retract(x + h * k3))
                x = M.retract(x + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6)
            flow.append(x)
        flow = np.array(flow)
        s = (ts - ts[0]) / (ts[-1] - ts[0])
        bent = M.retract(flow + s[:, None] * (W[k + 1] - flow[-1]))
        pts.extend(bent[1:-1])
        pts.append(W[k + 1])
    return DiscreteCurve(M, grid, np.array(pts), pinned)


def _residuals(curve: DiscreteCurve, A: PriorField):
    h = np.diff(curve.times)
    P = curve.points
    r = np.diff(P, axis=0) / h[:, None] - A.values(P[:-1])
    return h, r


def discrete_J(curve: DiscreteCurve, A: PriorField) -> float:
    """Rectangle-rule sum of h |forward velocity - A(left point)|^2."""
    h, r = _residuals(curve, A)
    return float(np.sum(h * curve.manifold.inner(r, r)))


def discrete_J_gradient(curve: DiscreteCurve, A: PriorField) -> np.ndarray:
    """Ambient (Euclidean) gradient of discrete_J with respect to every point.

    dJ/dp_j = 2 S r_{j-1} - 2 S r_j - 2 h_j DA(p_j)^T S r_j.
    """
    S = curve.manifold.signature
    h, r = _residuals(curve, A)
    Sr = r * S
    JA = A.jacobians(curve.points[:-1])
    G = np.zeros_like(curve.points)
    G[1:] += 2 * Sr
    G[:-1] -= 2 * Sr + 2 * h[:, None] * np.einsum("nij,ni->nj", JA, Sr)
    return G


def _delta_J(curve: DiscreteCurve, r_old, new_points, A) -> float:
    """J(new) - J(old) as one sum, which keeps small decreases above rounding."""
    h = np.diff(curve.times)
    r_new = np.diff(new_points, axis=0) / h[:, None] - A.values(new_points[:-1])
    return float(np.sum(h * curve.manifold.inner(r_new - r_old, r_new + r_old))), r_new


def _tangent_covector(M: Manifold, P, G):
    """P_x^T g: the part of the covector g seen by tangent directions."""
    if M.kind == "euclidean":
        return G
    S = M.signature
    return G - M.curvature * (S * P) * np.sum(P * G, axis=1)[:, None]


def _preconditioner(curve: DiscreteCurve, mu: float):
    """Banded form of (2/h) * discrete Laplacian + mu, pinned rows set to 1."""
    n = len(curve.times)
    w = 2.0 / np.diff(curve.times)
    diag = np.full(n, mu)
    diag[:-1] += w
    diag[1:] += w
    off = -w.copy()
    free = np.ones(n, dtype=bool)
    free[curve.pinned] = False
    ab = np.zeros((3, n))
    upper = off * free[:-1] * free[1:]
    ab[0, 1:] = upper
    ab[1] = np.where(free, diag, 1.0)
    ab[2, :-1] = upper
    return ab, free


@dataclass
class MinimizeResult:
    curve: DiscreteCurve
    J: float
    iterations: int
    converged: bool
    grad_norm: float
    message: str
    history: list = field(default_factory=list)


def minimize_curve(curve_init: DiscreteCurve, A: PriorField, tol: float = GRAD_TOL,
                   max_iter: int = MAX_ITER, armijo: float = 1e-4,
                   record_history: bool = False) -> MinimizeResult:
    """Projected, Laplacian-preconditioned gradient descent on discrete_J.

    Each step moves the free points along d_j = -P_j (M^-1 P^T g)_j, where M
    is the tridiagonal leading part of the Hessian, and reprojects onto the
    manifold. The Euclidean pairing g . d is then negative for any positive
    definite M, so backtracking always finds a decrease away from
    stationarity. Stops when the projected gradient norm drops below ``tol``.
    """
    curve = curve_init.copy()
    M = curve.manifold
    if curve.points.shape[1] != A.manifold.ambient_dim:
        raise VariationalError("curve and field live on different manifolds")
    mu = 2.0 * float(np.mean(np.diff(curve.times)))
    ab, free = _preconditioner(curve, mu)
    _, r = _residuals(curve, A)
    J = discrete_J(curve, A)
    history = [J] if record_history else []
    alpha = 1.0
    gnorm = np.inf
    for it in range(max_iter + 1):
        g = _tangent_covector(M, curve.points, discrete_J_gradient(curve, A))
        g[~free] = 0.0
        gnorm = float(np.linalg.norm(g))
        if gnorm < tol:
            return MinimizeResult(curve, J, it, True, gnorm, "converged", history)
        if it == max_iter:
            break
        d = -M.project(curve.points, solve_banded((1, 1), ab, g))
        d[~free] = 0.0
        slope = float(np.sum(g * d))
        if slope >= 0:
            raise VariationalError("preconditioned direction is not a descent direction")
        step = min(1.0, 2.0 * alpha)
        while True:
            trial = curve.points.copy()
            trial[free] = M.retract(curve.points[free] + step * d[free])
            dJ, r_new = _delta_J(curve, r, trial, A)
            if dJ <= armijo * step * slope:
                break
            step *= 0.5
            if step < 1e-14:
                msg = f"line search stalled at iteration {it} with projected gradient {gnorm:.3g}"
                log.warning(msg)
                return MinimizeResult(curve, J, it, False, gnorm, msg, history)
        alpha = step
        curve.points = trial
        r = r_new
        J += dJ
        if record_history:
            history.append(J)
    msg = f"max_iter={max_iter} reached with projected gradient {gnorm:.3g}"
    log.warning(msg)
    return MinimizeResult(curve, discrete_J(curve, A), max_iter, False, gnorm, msg, history)


def simpson_J(curve: DiscreteCurve, A: PriorField) -> float:
    """J on a converged curve: second-order velocities, Simpson per segment."""
    M = curve.manifold
    total = 0.0
    for a, b in zip(curve.pinned[:-1], curve.pinned[1:]):
        t = curve.times[a:b + 1]
        P = curve.points[a:b + 1]
        V = M.project(P, np.gradient(P, t, axis=0, edge_order=2))
        r = V - A.values(P)
        total += float(simpson(M.inner(r, r), x=t))
    return total


def reverse_data(curve: DiscreteCurve) -> DiscreteCurve:
    """x_bar(u) = x(-u) on the negated, reversed grid."""
    n = len(curve.times)
    return DiscreteCurve(curve.manifold, -curve.times[::-1], curve.points[::-1].copy(),
                         np.sort(n - 1 - curve.pinned))


def reverse_scenario(waypoints, times):
    """Waypoints in reverse order at the negated, reversed times."""
    W = np.asarray(waypoints, dtype=float)
    t = np.asarray(times, dtype=float)
    return W[::-1].copy(), -t[::-1]


def minimize_scenario(A: PriorField, waypoints, times, N: int = N_DEFAULT,
                      init: str = "geodesic", **opts) -> MinimizeResult:
    """Convenience wrapper: build the initial curve and minimise."""
    if init == "geodesic":
        c0 = geodesic_init(A.manifold, waypoints, times, N)
    elif init == "flow":
        c0 = integral_curve_init(A, waypoints, times, N)
    else:
        raise VariationalError(f"unknown initialisation {init!r}")
    return minimize_curve(c0, A, **opts)


def resample(curve: DiscreteCurve, N: int) -> DiscreteCurve:
    """Linear-in-ambient resampling onto N intervals per segment, reprojected."""
    M = curve.manifold
    grid, pinned = _grid(curve.waypoint_times, N)
    P = np.column_stack([np.interp(grid, curve.times, curve.points[:, i])
                         for i in range(curve.points.shape[1])])
    P = M.retract(P) if M.kind != "euclidean" else P
    P[pinned] = curve.waypoints
    return DiscreteCurve(M, grid, P, pinned)
