import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from condex import extremal as ex
from condex import quatgroup as qg
from condex.fields import LeftInvariantField
from condex.quaternion import qconj, qexp, qmul

seeds = st.integers(0, 2**31)


def _unit(rng, n=4):
    y = rng.normal(size=n)
    return y / np.linalg.norm(y)


@given(seeds)
def test_segment_hits_endpoints(seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=3)
    x0, x1 = _unit(rng), _unit(rng)
    s = float(rng.uniform(0.3, 2.0))
    try:
        B = qg.solve_segment_BL(A, x0, x1, s)
    except qg.SegmentError:
        return
    seg = qg.SegmentSolution(A, B, x0, 0.5, 0.5 + s)
    np.testing.assert_allclose(qg.segment_eval(seg, 0.5), x0, atol=1e-13)
    end = qg.segment_eval(seg, 0.5 + s)
    assert min(np.linalg.norm(end - x1), np.linalg.norm(end + x1)) < 1e-10
    np.testing.assert_allclose(end, x1, atol=1e-10)


@given(seeds)
def test_velocity_is_derivative(seed):
    rng = np.random.default_rng(seed)
    seg = qg.SegmentSolution(rng.normal(size=3), rng.normal(size=3), _unit(rng), 0.0, 1.0)
    t, h = 0.4, 1e-6
    fd = (qg.segment_eval(seg, t + h) - qg.segment_eval(seg, t - h)) / (2 * h)
    np.testing.assert_allclose(qg.segment_velocity(seg, t), fd, atol=1e-8)


@given(seeds)
def test_segment_is_euler_lagrange_solution(seed):
    rng = np.random.default_rng(seed)
    x0 = _unit(rng)
    seg = qg.SegmentSolution(rng.normal(size=3), rng.normal(size=3), x0, 0.0, 1.0)
    F = LeftInvariantField(qg.segment_field(seg))
    c = ex.integrate_ivp(F, x0, qg.segment_velocity(seg, 0.0), 0.0, 1.0, step=1e-3)
    np.testing.assert_allclose(c.end, qg.segment_eval(seg, 1.0), atol=1e-9)
    assert qg.segment_cost(seg) == pytest.approx(ex.functional_J(c, F), rel=1e-8)


@given(seeds)
def test_transport_operator_series(seed):
    rng = np.random.default_rng(seed)
    A, w = rng.normal(size=3), rng.normal(size=3)
    s = float(rng.uniform(0.1, 2.0))
    # (1 - exp(-s ad)) / ad = int_0^s exp(-u ad) du, with exp(-u ad) w = R(-2u A) w
    us = np.linspace(0, s, 2001)
    vals = np.array([qmul(qmul(qexp(A, -u), np.concatenate([[0.0], w])), qexp(A, u))[1:] for u in us])
    from scipy.integrate import simpson
    ref = simpson(vals, x=us, axis=0)
    np.testing.assert_allclose(qg.transport_operator(A, s, w), ref, atol=1e-9)
    tiny = 1e-7 * A
    np.testing.assert_allclose(qg.transport_operator(tiny, s, w), s * w - s * s * np.cross(tiny, w), atol=1e-12)


def test_analytic_gradient_matches_finite_differences(rng):
    pts = [qexp(rng.normal(size=3), 0.5) for _ in range(4)]
    times = [0.0, 0.3, 0.7, 1.0]
    A = rng.normal(size=3) * 0.3
    g = qg.stationarity_residual(A, pts, times).gradient
    h = 1e-6
    fd = [(qg.prior_cost(A + h * e, pts, times) - qg.prior_cost(A - h * e, pts, times)) / (2 * h) for e in np.eye(3)]
    np.testing.assert_allclose(g, fd, atol=1e-6)


def test_fit_recovers_generating_field(rng):
    A_true = np.array([0.4, -0.7, 0.2])
    times = np.linspace(0, 1, 5)
    pts = [qexp(A_true, t) for t in times]
    fit = qg.optimize_prior_AL(pts, times)
    np.testing.assert_allclose(fit.A_L, A_true, atol=1e-7)
    assert fit.cost < 1e-14


def test_three_point_rule_is_stationary(rng):
    x0, x1, x2 = (qexp(rng.normal(size=3), 0.6) for _ in range(3))
    A, B1 = qg.three_point_AL(x0, x1, x2, 0.5)
    res = qg.stationarity_residual(A, [x0, x1, x2], [0.0, 0.5, 1.0])
    assert np.linalg.norm(res.sum_B) < 1e-10
    np.testing.assert_allclose(res.B_list[0], B1, atol=1e-10)
    fit = qg.optimize_prior_AL([x0, x1, x2], [0.0, 0.5, 1.0], A_L_init=A)
    assert fit.cost == pytest.approx(res.cost, abs=1e-10)


def test_norm_identities_at_identity(rng):
    A, B = rng.normal(size=3), rng.normal(size=3)
    seg = qg.SegmentSolution(A, B, np.array([1.0, 0, 0, 0]), 0.0, 1.0)
    for t in (0.0, 0.3, 0.9):
        v = qg.segment_velocity(seg, t)
        assert np.linalg.norm(v) == pytest.approx(np.linalg.norm(A + B), abs=1e-12)


def test_antipodal_errors():
    with pytest.raises(qg.SegmentError):
        qg.solve_segment_BL(np.zeros(3), [1.0, 0, 0, 0], [-1.0, 0, 0, 0], 1.0)
    with pytest.raises(qg.SegmentError):
        qg.solve_segment_BL(np.zeros(3), [1.0, 0, 0, 0], [0, 1.0, 0, 0], 0.0)
    with pytest.raises(ValueError):
        qg.optimize_prior_AL([[1.0, 0, 0, 0]] * 2, [0.0, 1.0], gradient="bogus")


def test_geodesic_midpoint():
    y = qexp(np.array([0.0, 0.0, 1.0]))
    np.testing.assert_allclose(qg.geodesic_midpoint(np.array([1.0, 0, 0, 0]), y),
                               qexp(np.array([0.0, 0.0, 0.5])), atol=1e-14)
    assert math.isclose(np.linalg.norm(qmul(qconj(y), y)), 1.0)
