"""The acceptance criteria as executable checks.

Each ``check_N`` returns a :class:`Check` with the measured numbers in
``detail``. Printed reference values live in the module constants; every
computed constant is derived from initial or boundary data only.
"""

from __future__ import annotations

import filecmp
import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from . import extremal as ex
from . import quatgroup as qg
from . import spaceforms as sf
from . import variational as var
from .euclid import affine_extremal_eval, affine_extremal_velocity, solve_endpoint_d
from .fields import (AffineField, CustomField, LeftInvariantField, SymmetricField, closedness_check,
                     random_point, random_tangent_samples)
from .geom import H2, S2, S3

# printed reference values
S3EX_A = np.array([-0.5, -0.5, 0.3])
S3EX_B = np.array([0.2, 0.2, 0.2])
S3EX_X1 = np.array([-0.0359448, -0.228089, -0.937324, -0.260972])

S3EX2_POINTS = np.array([
    [1.0, 0.0, 0.0, 0.0],
    [0.1304, 0.7923, 0.4574, 0.3821],
    [0.5809, 0.0381, 0.3385, 0.7393],
    [0.5523, 0.6251, 0.5513, 0.0172],
    [0.2810, 0.1241, 0.6817, 0.6640],
])
S3EX2_TIMES = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
S3EX2_A = np.array([1.40398, 0.196766, 1.05334])
S3EX2_B = np.array([
    [2.7669, 2.3129, 2.0736],
    [-1.0075, -4.2867, -1.4298],
    [-2.1680, 3.6097, -2.4150],
    [0.4086, -1.6359, 1.7713],
])

LAMEX_X0 = np.array([math.sqrt(3) / 2, 0.0, 0.5])
LAMEX_V0 = np.array([0.0, 1.0, 0.0])

POIN2_X0 = np.array([0.1, 0.1, math.sqrt(1.02)])
POIN2_V0_PRINTED = np.array([0.9 * math.sqrt(1.002), 0.0, 0.9])
# tangent reading of the printed velocity; it reproduces the printed x1
POIN2_V0 = np.array([0.9 * math.sqrt(1.02), 0.0, 0.09])
POIN2_X1 = np.array([8.99009, -7.34992, 11.6552])
POIN2_G2, POIN2_G3 = 1.17393, -0.220814

REFEX_X0 = np.array([0.866, 0.0, 0.5])
REFEX_X1 = np.array([0.5187, 0.8486, 0.1039])
REFEX_REVERSE, REFEX_FORWARD = 0.18, 0.44

HOR2_J7, HOR2_JSQRT2 = 0.519, 2.011


@dataclass
class Check:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"criterion {self.number:>2} {'PASS' if self.passed else 'FAIL'}  {self.title}: {self.detail}"


def _unit(x):
    x = np.asarray(x, dtype=float)
    return x / np.linalg.norm(x)


# -- 1 -------------------------------------------------------------------------


def check_1() -> Check:
    seg = qg.SegmentSolution(S3EX_A, S3EX_B, np.array([1.0, 0, 0, 0]), 0.0, math.pi)
    x1 = qg.segment_eval(seg, math.pi)
    B = qg.solve_segment_BL(S3EX_A, seg.x_start, x1, math.pi)
    runs = []
    for _ in range(50):
        t = time.perf_counter()
        y = qg.segment_eval(seg, math.pi)
        qg.solve_segment_BL(S3EX_A, seg.x_start, y, math.pi)
        runs.append(time.perf_counter() - t)
    ms = 1e3 * float(np.median(runs))
    ex1 = float(np.max(np.abs(x1 - S3EX_X1)))
    eb = float(np.max(np.abs(B - S3EX_B)))
    ok = ex1 <= 1e-4 and eb <= 1e-6 and ms < 1.0
    return Check(1, "S3 round trip", ok, f"|x1 - printed| = {ex1:.2e}, |B - B_L| = {eb:.2e}, {ms:.3f} ms")


# -- 2 -------------------------------------------------------------------------


def check_2() -> Check:
    pts = [_unit(p) for p in S3EX2_POINTS]
    t = time.perf_counter()
    fit = qg.optimize_prior_AL(pts, S3EX2_TIMES)
    secs = time.perf_counter() - t
    res = qg.stationarity_residual(fit.A_L, pts, S3EX2_TIMES)
    ea = float(np.max(np.abs(fit.A_L - S3EX2_A)))
    eb = float(np.max(np.abs(np.array(res.B_list) - S3EX2_B)))
    sb = float(np.linalg.norm(res.sum_B))
    ok = ea <= 1e-3 and eb <= 2e-3 and sb <= 1e-6 and secs < 1.0
    return Check(2, "S3 prior optimisation", ok,
                 f"A_L = {np.round(fit.A_L, 6).tolist()}, |A - printed| = {ea:.2e}, "
                 f"|B - printed| = {eb:.2e}, |sum B| = {sb:.2e}, {secs:.3f} s")


# -- 3 -------------------------------------------------------------------------


def check_3() -> Check:
    beta, gamma = 0.0, 1.0
    form = sf.weierstrass_from_initial(1, beta, gamma, LAMEX_X0, LAMEX_V0)
    errs = {
        "b": abs(form.b - 0.25), "d": abs(form.d + 0.5), "delta": abs(form.delta + 0.75),
        "g2": abs(form.g2 - 4.75), "g3": abs(form.g3 - 1.875),
    }
    A = SymmetricField(1, beta, gamma)
    curve = ex.integrate_ivp(A, LAMEX_X0, LAMEX_V0, 0.0, 14.0, step=1e-3)
    idx = np.arange(0, len(curve), 10)
    x3 = sf.weierstrass_x3(form, curve.times[idx])
    e_ode = float(np.max(np.abs(x3 - curve.points[idx, 2])))
    ts = np.linspace(0.0, 6.0, 61)
    P = form.x3_period
    e_per = float(np.max(np.abs(sf.weierstrass_x3(form, ts + P) - sf.weierstrass_x3(form, ts))))
    e_abs = float(np.max(np.abs(np.abs(sf.weierstrass_x3(form, ts + form.wp_period))
                                - np.abs(sf.weierstrass_x3(form, ts)))))
    ok = errs["b"] <= 1e-12 and max(errs.values()) <= 1e-10 and e_ode <= 1e-6 and max(e_per, e_abs) <= 1e-8
    return Check(3, "Weierstrass constants, conservative prior", ok,
                 f"b={form.b:.15g} d={form.d:.12g} delta={form.delta:.12g} g2={form.g2:.12g} "
                 f"g3={form.g3:.12g}, x3 vs RK4 {e_ode:.2e}, periodicity {max(e_per, e_abs):.2e} "
                 f"(wp period {form.wp_period:.6f}, x3 period {P:.6f})")


# -- 4 -------------------------------------------------------------------------


def check_4() -> Check:
    beta, gamma = -1.0, 2.0
    form = sf.weierstrass_from_initial(-1, beta, gamma, POIN2_X0, POIN2_V0)
    r2 = abs(form.g2 - POIN2_G2) / abs(POIN2_G2)
    r3 = abs(form.g3 - POIN2_G3) / abs(POIN2_G3)
    A = SymmetricField(-1, beta, gamma)
    curve = ex.integrate_ivp(A, POIN2_X0, POIN2_V0, 0.0, 1.0, step=1e-3, monitor=False)
    idx = np.arange(0, len(curve), 5)
    e_ode = float(np.max(np.abs(sf.weierstrass_x3(form, curve.times[idx]) - curve.points[idx, 2])))
    e_x1 = float(np.max(np.abs(curve.points[-1] - POIN2_X1)))
    lit = H2.project(POIN2_X0, POIN2_V0_PRINTED)
    b, c, d = sf.conserved_constants(-1, beta, gamma, POIN2_X0, lit)
    _, _, g2l, g3l = sf.weierstrass_invariants(gamma, beta, b, c, d)
    ok = r2 <= 1e-2 and r3 <= 1e-2 and e_ode <= 1e-6
    return Check(4, "Weierstrass constants, spiral prior on H2", ok,
                 f"g2={form.g2:.8g} (rel {r2:.1e}) g3={form.g3:.8g} (rel {r3:.1e}) a={form.a.real:.8g}, "
                 f"x3 vs RK4 {e_ode:.2e}, |x(1) - printed x1| = {e_x1:.1e}; "
                 f"literal projection of printed v0 gives g2={g2l:.6g} g3={g3l:.6g}")


# -- 5 -------------------------------------------------------------------------


def _compare(closed_pts, curve_pts) -> float:
    return float(np.max(np.linalg.norm(closed_pts - curve_pts, axis=1)))


def _family_affine(rng):
    B = 0.7 * rng.normal(size=(3, 3))
    c = rng.normal(size=3)
    x0, x1 = rng.normal(size=3), rng.normal(size=3)
    e = solve_endpoint_d(B, c, x0, x1, 0.0, 1.0)
    curve = ex.integrate_ivp(AffineField(B, c), x0, affine_extremal_velocity(e, 0.0), 0.0, 1.0)
    idx = np.arange(0, len(curve), 50)
    err = _compare(affine_extremal_eval(e, curve.times[idx]), curve.points[idx])
    return err, float(np.max(np.abs(curve.energy_residual(AffineField(B, c)))))


def _family_s3(rng):
    A, B = rng.normal(size=3), rng.normal(size=3)
    x0 = _unit(rng.normal(size=4))
    seg = qg.SegmentSolution(A, B, x0, 0.0, 1.0)
    F = LeftInvariantField(qg.segment_field(seg))
    curve = ex.integrate_ivp(F, x0, qg.segment_velocity(seg, 0.0), 0.0, 1.0)
    idx = np.arange(0, len(curve), 50)
    closed = np.array([qg.segment_eval(seg, t) for t in curve.times[idx]])
    return _compare(closed, curve.points[idx]), float(np.max(np.abs(curve.energy_residual(F))))


def _draw_space_form(rng, sigma):
    M = S2 if sigma == 1 else H2
    while True:
        if sigma == 1:
            x0 = random_point(S2, rng)
            if abs(x0[2]) > 0.9:
                continue
            v0 = M.project(x0, rng.normal(size=3))
        else:
            x0 = random_point(H2, rng, 0.3)
            v0 = M.project(x0, 0.3 * rng.normal(size=3))
        return x0, v0


def _space_form_residual(sigma, beta, gamma, x0, v0, curve):
    b, c, d = sf.conserved_constants(sigma, beta, gamma, x0, v0)
    r = sf.conservation_residuals(sigma, beta, gamma, b, c, d, curve.points, curve.velocities)
    return max(r.values())


def _family_horizontal(rng, sigma):
    while True:
        x0, v0 = _draw_space_form(rng, sigma)
        beta = rng.uniform(-1.5, 1.5)
        try:
            form = sf.horizontal_from_initial(sigma, beta, x0, v0)
        except sf.ClosedFormError:
            continue
        break
    A = SymmetricField(sigma, beta, 0.0)
    curve = ex.integrate_ivp(A, x0, v0, 0.0, 1.0)
    idx = np.arange(0, len(curve), 10)
    err = _compare(sf.horizontal_closed_form(form, curve.times[idx]), curve.points[idx])
    return err, _space_form_residual(sigma, beta, 0.0, x0, v0, curve)


def _family_weierstrass(rng, sigma):
    while True:
        x0, v0 = _draw_space_form(rng, sigma)
        beta = rng.uniform(-1.0, 1.0)
        gamma = rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.5)
        A = SymmetricField(sigma, beta, gamma)
        # on H2, x3^2 = wp - delta can reach a pole of wp in finite time; keep
        # draws whose solution stays moderate on [0, 1]
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                curve = ex.integrate_ivp(A, x0, v0, 0.0, 1.0, monitor=False)
        except ex.IntegrationError:
            continue
        if np.max(np.abs(curve.points[:, 2])) < 3.0:
            break
    form = sf.weierstrass_from_initial(sigma, beta, gamma, x0, v0)
    idx = np.arange(0, len(curve), 5)
    pts, _ = sf.weierstrass_curve(form, curve.times[idx])
    return _compare(pts, curve.points[idx]), _space_form_residual(sigma, beta, gamma, x0, v0, curve)


FAMILIES = {
    "affine/E3": _family_affine,
    "left-invariant/S3": _family_s3,
    "horizontal/S2": lambda rng: _family_horizontal(rng, 1),
    "horizontal/H2": lambda rng: _family_horizontal(rng, -1),
    "Weierstrass/S2": lambda rng: _family_weierstrass(rng, 1),
    "Weierstrass/H2": lambda rng: _family_weierstrass(rng, -1),
}


def check_5(n: int = 20) -> Check:
    parts, ok = [], True
    for k, (name, fn) in enumerate(FAMILIES.items()):
        rng = np.random.default_rng(1000 + k)
        errs, cons = zip(*(fn(rng) for _ in range(n)))
        e, r = max(errs), max(cons)
        ok &= e <= 1e-6 and r <= 1e-8
        parts.append(f"{name} {e:.1e}/{r:.1e}")
    return Check(5, "closed form vs integrator (max pointwise / conservation)", ok, ", ".join(parts))


# -- 6 -------------------------------------------------------------------------


def refex_values(N: int):
    A = SymmetricField(1, -1.0, 0.0)
    x0, x1 = _unit(REFEX_X0), _unit(REFEX_X1)
    fwd = var.minimize_scenario(A, [x0, x1], [0.0, 1.0], N=N)
    W, T = var.reverse_scenario([x0, x1], [0.0, 1.0])
    rev = var.minimize_scenario(A, W, T, N=N)
    return rev.J, var.discrete_J(var.reverse_data(fwd.curve), A), fwd.J


def check_6() -> Check:
    t = time.perf_counter()
    r4, f4, j4 = refex_values(400)
    r8, f8, _ = refex_values(800)
    secs = time.perf_counter() - t
    conv = max(abs(r8 - r4), abs(f8 - f4))
    ok_rev = abs(r4 - REFEX_REVERSE) <= 0.02
    ok_fwd = abs(f4 - REFEX_FORWARD) <= 0.02
    ok = ok_rev and ok_fwd and conv < 0.005 and f4 - r4 > 0.1 and secs < 30
    return Check(6, "reverse-data experiment on S2", ok,
                 f"reverse-data min {r4:.4f} ({'ok' if ok_rev else 'off'} vs {REFEX_REVERSE}), "
                 f"reversed forward min {f4:.4f} ({'ok' if ok_fwd else 'off'} vs {REFEX_FORWARD}), "
                 f"forward J {j4:.4f}, N=800 shift {conv:.1e}, margin {f4 - r4:.3f}, {secs:.1f} s")


# -- 7 -------------------------------------------------------------------------


def hor2_values(eps: float, N: int = 400):
    A = SymmetricField(1, -1.0, 0.0)
    form = sf.HorizontalForm(1, 1.0, eps, 0.0, 0.0, -1.0)
    x0 = sf.horizontal_closed_form(form, 0.0)
    x1 = sf.horizontal_closed_form(form, 1.0)
    res = var.minimize_scenario(A, [x0, x1], [0.0, 1.0], N=N)
    closed = sf.horizontal_closed_form(form, res.curve.times)
    dist = float(np.max(np.linalg.norm(closed - res.curve.points, axis=1)))
    return res.J, form.integrand, dist


def check_7() -> Check:
    j7, c7, _ = hor2_values(7.0)
    js, cs, dist = hor2_values(math.sqrt(2))
    ok = (abs(j7 - HOR2_J7) <= 0.02 and abs(c7 - 49.0) <= 1e-12
          and abs(js - HOR2_JSQRT2) <= 0.02 and abs(cs - 2.0) <= 1e-12 and dist <= 5e-3)
    return Check(7, "distinct extrema of the polar horizontal family", ok,
                 f"eps=7: min {j7:.4f} vs extremal {c7:.12g}; eps=sqrt2: min {js:.4f} vs {cs:.12g}, "
                 f"distance to closed form {dist:.1e}")


# -- 8 -------------------------------------------------------------------------


def _latlon_curve(rng):
    """Smooth random curve on S^2 from latitude/longitude polynomials, with exact velocity."""
    a = rng.normal(size=3) * np.array([0.4, 0.8, 0.5])
    b = rng.normal(size=3) * np.array([1.0, 1.5, 1.0])

    def pv(t):
        th = a[0] + a[1] * t + a[2] * t ** 2
        ph = b[0] + b[1] * t + b[2] * t ** 3
        dth = a[1] + 2 * a[2] * t
        dph = b[1] + 3 * b[2] * t ** 2
        ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ph), np.sin(ph)
        x = np.stack([ct * cp, ct * sp, st], axis=-1)
        v = np.stack([-st * dth * cp - ct * sp * dph, -st * dth * sp + ct * cp * dph, ct * dth], axis=-1)
        return x, v
    return pv


def reversal_gap(A, pv, t0=0.0, t1=1.0, n=2001):
    """(Jbar(xbar) - J(x), x3(t1) - x3(t0)) by Simpson on a fine grid."""
    from scipy.integrate import simpson
    t = np.linspace(t0, t1, n)
    x, v = pv(t)
    a = A.values(x)
    fwd = simpson(np.sum((v - a) ** 2, axis=1), x=t)
    bwd = simpson(np.sum((-v - a) ** 2, axis=1), x=t)
    return float(bwd - fwd), float(x[-1, 2] - x[0, 2])


def check_8() -> Check:
    A = SymmetricField(1, -1.0, 0.0)
    p = np.array([1.0, 0.0, 0.0])
    c = var.integral_curve_init(A, [p, p], [0.0, 2 * math.pi], N=2000)
    j = var.discrete_J(c, A)
    jr = var.discrete_J(var.reverse_data(c), A)
    ok_a = j <= 1e-4 and abs(jr - 8 * math.pi) <= 0.01
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        g = rng.uniform(-2.0, 2.0)
        gap, dx3 = reversal_gap(SymmetricField(1, 0.0, g), _latlon_curve(rng))
        worst = max(worst, abs(gap - 4 * g * dx3))
    ok_b = worst <= 1e-4
    samples = random_tangent_samples(S2, 50, np.random.default_rng(9))
    hs = random_tangent_samples(H2, 50, np.random.default_rng(10), 0.5)
    closed = (closedness_check(SymmetricField(1, 0.0, 1.3), samples).is_closed
              and closedness_check(SymmetricField(-1, 0.0, 0.7), hs).is_closed)
    not_closed = not (closedness_check(SymmetricField(1, -1.0, 0.0), samples).is_closed
                      or closedness_check(SymmetricField(-1, 0.5, 0.0), hs).is_closed)
    ok = ok_a and ok_b and closed and not_closed
    return Check(8, "reversal dichotomy", ok,
                 f"loop J={j:.2e} reversed {jr:.6f} (8pi={8 * math.pi:.6f}); "
                 f"conservative gap error {worst:.1e}; closedness gammaC {closed}, betaB {not not_closed}")


# -- 9 -------------------------------------------------------------------------


def gradient_check(A, W, T, rng, N=6, step=1e-6) -> float:
    c = var.geodesic_init(A.manifold, W, T, N=N)
    c.points[1:-1] += 0.01 * rng.normal(size=c.points[1:-1].shape)
    G = var.discrete_J_gradient(c, A)
    Gfd = np.zeros_like(G)
    for i in range(G.shape[0]):
        for j in range(G.shape[1]):
            cp, cm = c.copy(), c.copy()
            cp.points[i, j] += step
            cm.points[i, j] -= step
            Gfd[i, j] = (var.discrete_J(cp, A) - var.discrete_J(cm, A)) / (2 * step)
    return float(np.max(np.abs(G - Gfd)) / np.max(np.abs(G)))


def norm_identities(rng) -> float:
    A, B = rng.normal(size=3), rng.normal(size=3)
    seg = qg.SegmentSolution(A, B, np.array([1.0, 0, 0, 0]), 0.0, 1.0)
    F = LeftInvariantField(A)
    worst = 0.0
    for t in np.linspace(0.0, 1.0, 50):
        x = qg.segment_eval(seg, t)
        v = qg.segment_velocity(seg, t)
        a = F.value(x)
        worst = max(worst, abs(np.linalg.norm(v) - np.linalg.norm(A + B)),
                    abs(np.linalg.norm(v - a) - np.linalg.norm(B)),
                    abs(v @ a - (A + B) @ A))
    return worst


def product_rule(rng) -> float:
    """theta of alpha*A against alpha theta_A + X(alpha) A - <A, X> grad alpha."""
    A = SymmetricField(1, lambda z: 0.5 + 0.3 * z * z, lambda z: 0.2 * z,
                       beta_prime=lambda z: 0.6 * z, gamma_prime=lambda z: 0.2)

    def alpha(x):
        return 1.0 + 0.5 * x[0] + 0.2 * x[1] * x[2]

    def dalpha(x):
        return np.array([0.5, 0.2 * x[2], 0.2 * x[1]])

    aA = CustomField(S2, lambda x: alpha(x) * A.value(x))
    worst = 0.0
    for x, X, _ in random_tangent_samples(S2, 10, rng):
        lhs = aA.theta(x, X)
        grad = S2.project(x, dalpha(x))
        rhs = alpha(x) * A.theta(x, X) + (dalpha(x) @ X) * A.value(x) - (A.value(x) @ X) * grad
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def rk4_rates() -> List[float]:
    A = SymmetricField(1)
    x0 = np.array([1.0, 0.0, 0.0])
    v0 = np.array([0.0, 0.8, 0.6]) * 1.3
    exact = S2.geodesic_point(x0, v0, 2.0)
    errs = [float(np.linalg.norm(ex.integrate_ivp(A, x0, v0, 0.0, 2.0, step=h, project=False,
                                                  monitor=False).end - exact))
            for h in (0.2, 0.1, 0.05)]
    return [errs[0] / errs[1], errs[1] / errs[2]]


def integrand_identity():
    """(max |direct - corrected| along lamex, direct value at t = 0, printed form at t = 0)."""
    A = SymmetricField(1, 0.0, 1.0)
    curve = ex.integrate_ivp(A, LAMEX_X0, LAMEX_V0, 0.0, 14.0, step=1e-3)
    b, c, _ = sf.conserved_constants(1, 0.0, 1.0, LAMEX_X0, LAMEX_V0)
    direct = ex.integrand(curve, A)
    corr = sf.integrand_closed_form(0.0, 1.0, b, c, curve.points[:, 2], curve.velocities[:, 2])
    printed = sf.integrand_printed_form(0.0, 1.0, b, c, LAMEX_X0[2], LAMEX_V0[2])
    return float(np.max(np.abs(direct - corr))), float(direct[0]), float(printed)


def check_9() -> Check:
    rng = np.random.default_rng(99)
    cases = [
        (SymmetricField(1, -1.0, 0.7), [np.array([1.0, 0, 0]), np.array([0, 0.6, 0.8])]),
        (SymmetricField(-1, 0.5, 0.7), [np.array([0, 0, 1.0]), np.array([0.3, 0.4, math.sqrt(1.25)])]),
        (LeftInvariantField([0.3, -0.2, 0.5]), [np.array([1.0, 0, 0, 0]), np.array([0.5, 0.5, 0.5, 0.5])]),
        (AffineField(rng.normal(size=(3, 3)), np.ones(3)), [np.zeros(3), np.ones(3)]),
    ]
    g = max(gradient_check(A, W, [0.0, 1.0], rng) for A, W in cases for _ in range(5))
    n = max(norm_identities(rng) for _ in range(5))
    p = product_rule(rng)
    rates = rk4_rates()
    ident, direct0, printed0 = integrand_identity()
    ok = (g <= 1e-5 and n <= 1e-9 and p <= 1e-6 and all(abs(r - 16) <= 2 for r in rates)
          and ident <= 1e-9 and abs(direct0 - 1.75) <= 1e-12)
    return Check(9, "property suites", ok,
                 f"gradient rel {g:.1e}, norm identities {n:.1e}, product rule {p:.1e}, "
                 f"RK4 rates {rates[0]:.2f}/{rates[1]:.2f}, integrand identity {ident:.1e} "
                 f"(direct {direct0:.12g} at t=0, printed form {printed0:.6g})")


# -- 10 ------------------------------------------------------------------------


def _outputs(d: str) -> List[str]:
    return sorted(f for f in os.listdir(d) if f.endswith(".csv") or f.endswith("_summary.json"))


def check_10(out_dir: Optional[str] = None) -> Check:
    from .cli import run_bundled
    with tempfile.TemporaryDirectory() as tmp:
        first = out_dir
        if first is None or not os.path.isdir(first) or not _outputs(first):
            first = os.path.join(tmp, "first")
            run_bundled(first)
        second = os.path.join(tmp, "second")
        run_bundled(second)
        a, b = _outputs(first), _outputs(second)
        same = a == b and all(filecmp.cmp(os.path.join(first, f), os.path.join(second, f), shallow=False)
                              for f in a)
    return Check(10, "determinism of scenario outputs", same and bool(a),
                 f"{len(a)} CSV/summary files compared byte for byte")


CHECKS: List[Callable[[], Check]] = [check_1, check_2, check_3, check_4, check_5, check_6, check_7,
                                     check_8, check_9]


def run_all(out_dir: Optional[str] = None) -> List[Check]:
    out = []
    for fn in CHECKS:
        try:
            out.append(fn())
        except Exception as exc:  # a crash is a failed criterion, not an aborted suite
            num = int(fn.__name__.split("_")[1])
            out.append(Check(num, fn.__name__, False, f"{type(exc).__name__}: {exc}"))
    out.append(check_10(out_dir))
    return out
