"""Closed-form conditional extrema on S^3 for left-invariant priors.

A segment from x0 over a duration s is the pointwise product

    x(t) = exp((t - t0) B) exp((t - t0) A) x0,

with A the generator of the prior and B fixed by the endpoint condition
exp(s B) exp(s A) = x1 x0^-1. Costs use the round metric of E^4, so the
Lie-algebra norm is the Euclidean norm of the 3-vector.

Because the product is right-translated by x0, a segment starting at x0
follows the Euler-Lagrange flow of the left-invariant field generated by
x0^-1 A x0 (see :func:`segment_field`); for x0 = 1 this is A itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .quaternion import AntipodeError, qconj, qexp, qlog, qmul, qrotate


@dataclass(frozen=True)
class SegmentSolution:
    A_L: np.ndarray
    B_L: np.ndarray
    x_start: np.ndarray
    t_start: float
    t_end: float

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start


class SegmentError(ValueError):
    pass


def solve_segment_BL(A_L, x0, x1, s: float) -> np.ndarray:
    """B_L with exp(s B_L) exp(s A_L) = x1 x0^-1, on the principal branch."""
    if s <= 0:
        raise SegmentError("segment duration must be positive")
    y = qmul(x1, qconj(x0))
    target = qmul(y, qexp(A_L, -s))
    try:
        return qlog(target, antipode_tol=1e-10) / s
    except AntipodeError:
        # both half-turns about any axis reach -1; report the ambiguity
        raise SegmentError(
            "y exp(-sA) is antipodal to 1: the minimal arc is not unique "
            "(every +/- pi rotation is a candidate branch)"
        ) from None


def segment_eval(seg: SegmentSolution, t) -> np.ndarray:
    tau = np.atleast_1d(np.asarray(t, dtype=float)) - seg.t_start
    out = np.array([qmul(qmul(qexp(seg.B_L, u), qexp(seg.A_L, u)), seg.x_start) for u in tau])
    return out[0] if np.ndim(t) == 0 else out


def segment_velocity(seg: SegmentSolution, t) -> np.ndarray:
    """d/dt of :func:`segment_eval`."""
    tau = np.atleast_1d(np.asarray(t, dtype=float)) - seg.t_start
    B = np.concatenate([[0.0], seg.B_L])
    A = np.concatenate([[0.0], seg.A_L])
    out = []
    for u in tau:
        eb, ea = qexp(seg.B_L, u), qexp(seg.A_L, u)
        out.append(qmul(qmul(qmul(B, eb), ea), seg.x_start)
                   + qmul(qmul(qmul(eb, ea), A), seg.x_start))
    out = np.array(out)
    return out[0] if np.ndim(t) == 0 else out


def segment_field(seg: SegmentSolution) -> np.ndarray:
    """Generator of the left-invariant prior whose flow this segment follows."""
    return qrotate(qconj(seg.x_start), seg.A_L)


def segment_cost(seg: SegmentSolution) -> float:
    return seg.duration * float(np.dot(seg.B_L, seg.B_L))


def transport_operator(A_L, s: float, w) -> np.ndarray:
    """Apply (1 - exp(-s ad A)) / ad A to w, with ad_A w = 2 A x w."""
    A = np.asarray(A_L, dtype=float)
    w = np.asarray(w, dtype=float)
    n = np.linalg.norm(A)
    theta = 2.0 * n
    if theta * abs(s) < 1e-4:
        # sum_k (-s ad)^k s / (k+1)!
        out = np.zeros(3)
        term = w.copy()
        for k in range(8):
            out += term * s / math.factorial(k + 1)
            term = -s * 2.0 * np.cross(A, term)
        return out
    a = A / n
    par = np.dot(a, w) * a
    perp = w - par
    st = s * theta
    return s * par + (math.sin(st) / theta) * perp - ((1 - math.cos(st)) / theta) * np.cross(a, perp)


def _durations(times: Sequence[float]) -> np.ndarray:
    s = np.diff(np.asarray(times, dtype=float))
    if np.any(s <= 0):
        raise ValueError("observation times must be strictly increasing")
    return s


def segment_Bs(A_L, points: Sequence, times: Sequence[float]) -> List[np.ndarray]:
    s = _durations(times)
    return [solve_segment_BL(A_L, points[k - 1], points[k], s[k - 1]) for k in range(1, len(points))]


def interpolant(A_L, points: Sequence, times: Sequence[float]) -> List[SegmentSolution]:
    """Track-sum of segments through every observation."""
    A_L = np.asarray(A_L, dtype=float)
    Bs = segment_Bs(A_L, points, times)
    return [SegmentSolution(A_L, B, np.asarray(points[k], dtype=float), float(times[k]), float(times[k + 1]))
            for k, B in enumerate(Bs)]


def prior_cost(A_L, points, times) -> float:
    s = _durations(times)
    return float(sum(sk * np.dot(B, B) for sk, B in zip(s, segment_Bs(A_L, points, times))))


@dataclass
class StationarityResidual:
    B_list: List[np.ndarray]
    B_bar: np.ndarray
    sum_B: np.ndarray
    gradient: np.ndarray
    cost: float


def stationarity_residual(A_L, points, times) -> StationarityResidual:
    """Quantities that vanish at a prior optimal over all left-invariant fields.

    ``B_bar`` is sum_k s_k T_k B_k with T_k = (1 - exp(-s_k ad A)) / ad A.
    ``gradient`` is the exact gradient of sum_k s_k |B_k|^2 with respect to
    A, namely -2 sum_k T_k B_k; the two agree up to scale when the s_k are
    equal. ``sum_B`` is the plain sum of the B_k.
    """
    if len(points) < 2:
        raise ValueError("need at least two observations")
    s = _durations(times)
    Bs = segment_Bs(A_L, points, times)
    T = [transport_operator(A_L, sk, B) for sk, B in zip(s, Bs)]
    return StationarityResidual(
        B_list=Bs,
        B_bar=np.sum([sk * t for sk, t in zip(s, T)], axis=0),
        sum_B=np.sum(Bs, axis=0),
        gradient=-2.0 * np.sum(T, axis=0),
        cost=float(sum(sk * np.dot(B, B) for sk, B in zip(s, Bs))),
    )


@dataclass
class PriorFit:
    A_L: np.ndarray
    cost: float
    iterations: int
    gradient_norm: float


class OptimizationError(RuntimeError):
    pass


def optimize_prior_AL(points, times, A_L_init=None, gtol: float = 1e-9, max_iter: int = 200,
                      gradient: str = "analytic") -> PriorFit:
    """Minimise sum_k s_k |B_k(A)|^2 over A in R^3 with BFGS.

    ``gradient="fd"`` switches to central differences (step 1e-7).
    """
    A0 = np.zeros(3) if A_L_init is None else np.asarray(A_L_init, dtype=float)

    def f(A):
        return prior_cost(A, points, times)

    if gradient == "analytic":
        def g(A):
            return stationarity_residual(A, points, times).gradient
    elif gradient == "fd":
        def g(A):
            h = 1e-7
            return np.array([(f(A + h * e) - f(A - h * e)) / (2 * h) for e in np.eye(3)])
    else:
        raise ValueError("gradient must be 'analytic' or 'fd'")

    try:
        res = minimize(f, A0, jac=g, method="BFGS", options={"gtol": gtol, "maxiter": max_iter})
    except SegmentError as exc:
        raise OptimizationError(f"segment became unsolvable during descent: {exc}") from exc
    gn = float(np.linalg.norm(g(res.x)))
    if gn > max(gtol * 100, 1e-7):
        raise OptimizationError(f"BFGS stopped with gradient norm {gn:.3g}: {res.message}")
    return PriorFit(np.asarray(res.x), float(res.fun), int(res.nit), gn)


def geodesic_midpoint(y1, y2) -> np.ndarray:
    """Midpoint of the minimal geodesic joining two unit quaternions."""
    try:
        half = qexp(qlog(qmul(qconj(y1), y2), antipode_tol=1e-10), 0.5)
    except AntipodeError:
        raise SegmentError("antipodal points: geodesic midpoint is ambiguous") from None
    return qmul(y1, half)


def three_point_AL(x0, x1, x2, s: float) -> Tuple[np.ndarray, np.ndarray]:
    """Optimal generator for three equally spaced observations.

    exp(s A) is the geodesic midpoint of y1 = x1 x0^-1 and y2 = x2 x1^-1, and
    B_1 solves exp(s B_1) exp(s A) = y1.
    """
    y1 = qmul(x1, qconj(x0))
    y2 = qmul(x2, qconj(x1))
    g = geodesic_midpoint(y1, y2)
    A = qlog(g) / s
    B1 = qlog(qmul(y1, qconj(g))) / s
    return A, B1


def lie_velocity(seg: SegmentSolution, t) -> np.ndarray:
    """Left-reduced velocity x^-1 x' at time t, as a 3-vector."""
    return qmul(qconj(segment_eval(seg, t)), segment_velocity(seg, t))[1:]
