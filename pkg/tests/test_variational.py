import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from condex import variational as var
from condex.euclid import affine_cost, affine_extremal_eval, solve_endpoint_d
from condex.fields import AffineField, ConstantField, LeftInvariantField, SymmetricField
from condex.geom import H2, S2, S3

seeds = st.integers(0, 2**31)

CASES = [
    (SymmetricField(1, -1.0, 0.7), [[1.0, 0, 0], [0, 0.6, 0.8], [0, -1.0, 0]]),
    (SymmetricField(-1, 0.5, 0.7), [[0, 0, 1.0], [0.3, 0.4, math.sqrt(1.25)], [0.0, 0.5, math.sqrt(1.25)]]),
    (LeftInvariantField([0.3, -0.2, 0.5]), [[1.0, 0, 0, 0], [0.5, 0.5, 0.5, 0.5], [0, 0, 0.6, 0.8]]),
    (AffineField([[0.0, -1.0, 0.2], [1.0, 0.0, 0.0], [0.1, 0.3, -0.5]], [0.5, 0, -0.25]),
     [[0, 0, 0], [1.0, 0.5, -0.2], [0.3, 1.5, 0.4]]),
]
TIMES = [0.0, 1.0, 2.5]


def _perturbed(A, W, seed, N=5):
    rng = np.random.default_rng(seed)
    c = var.geodesic_init(A.manifold, np.array(W, dtype=float), TIMES, N=N)
    free = np.ones(len(c.times), dtype=bool)
    free[c.pinned] = False
    c.points[free] = A.manifold.retract(c.points[free] + 0.05 * rng.normal(size=c.points[free].shape))
    return c


@pytest.mark.parametrize("A,W", CASES)
@given(seed=seeds)
def test_gradient_matches_finite_differences(A, W, seed):
    c = _perturbed(A, W, seed)
    G = var.discrete_J_gradient(c, A)
    step = 1e-6
    Gfd = np.zeros_like(G)
    for i in range(G.shape[0]):
        for j in range(G.shape[1]):
            cp, cm = c.copy(), c.copy()
            cp.points[i, j] += step
            cm.points[i, j] -= step
            Gfd[i, j] = (var.discrete_J(cp, A) - var.discrete_J(cm, A)) / (2 * step)
    np.testing.assert_allclose(G, Gfd, atol=1e-6 * max(1.0, np.max(np.abs(G))))


def reversed_J_oracle(c, A):
    """J of the reversed data written out by index: sum h_j |(p_{j+1} - p_j)/h_j + A(p_{j+1})|^2."""
    M = c.manifold
    total = 0.0
    for j in range(len(c.times) - 1):
        h = c.times[j + 1] - c.times[j]
        r = (c.points[j + 1] - c.points[j]) / h + A.value(c.points[j + 1])
        total += h * float(M.inner(r, r))
    return total


@pytest.mark.parametrize("A,W", CASES)
@given(seed=seeds)
def test_reverse_data(A, W, seed):
    c = _perturbed(A, W, seed)
    r = var.reverse_data(c)
    assert var.discrete_J(r, A) == pytest.approx(reversed_J_oracle(c, A), rel=1e-12)
    np.testing.assert_array_equal(r.times, -c.times[::-1])
    np.testing.assert_array_equal(r.pinned, [0, 5, 10])
    np.testing.assert_allclose(r.waypoints, c.waypoints[::-1])
    rr = var.reverse_data(r)
    np.testing.assert_array_equal(rr.times, c.times)
    np.testing.assert_array_equal(rr.points, c.points)
    np.testing.assert_array_equal(rr.pinned, c.pinned)


def test_reverse_scenario():
    W, T = var.reverse_scenario([[1.0], [2.0], [3.0]], [0.0, 1.0, 3.0])
    np.testing.assert_array_equal(W[:, 0], [3, 2, 1])
    np.testing.assert_array_equal(T, [-3, -1, 0])


@pytest.mark.parametrize("A,W", CASES)
def test_minimizer_descends_and_converges(A, W):
    res = var.minimize_scenario(A, np.array(W, dtype=float), TIMES, N=60, record_history=True)
    assert res.converged and res.grad_norm < var.GRAD_TOL
    assert np.all(np.diff(res.history) <= 1e-15)
    np.testing.assert_allclose(res.curve.waypoints, np.array(W, dtype=float), atol=1e-15)
    assert A.manifold.constraint_residual(res.curve.points) < 1e-12
    assert res.J == pytest.approx(var.discrete_J(res.curve, A), rel=1e-9)


def test_constant_field_is_exact():
    # the discrete minimiser of a constant field is the straight line
    c = np.array([0.5, -1.0])
    x0, x1 = np.array([0.0, 0.0]), np.array([2.0, 1.0])
    res = var.minimize_scenario(ConstantField(c), [x0, x1], [0.0, 2.0], N=50)
    assert res.J == pytest.approx(np.sum((x1 - x0 - 2.0 * c) ** 2) / 2.0, rel=1e-12)
    np.testing.assert_allclose(res.curve.points, x0 + np.outer(res.curve.times / 2.0, x1 - x0), atol=1e-9)


def test_affine_minimum_approaches_closed_form():
    A = AffineField(*[np.asarray(v) for v in (CASES[3][0].B, CASES[3][0].c)])
    x0, x1 = np.zeros(3), np.array([1.0, 0.5, -0.2])
    ext = solve_endpoint_d(A.B, A.c, x0, x1, 0.0, 1.0)
    exact = affine_cost(ext, 1.0)
    errs = []
    for N in (200, 400):
        res = var.minimize_scenario(A, [x0, x1], [0.0, 1.0], N=N)
        errs.append(abs(var.simpson_J(res.curve, A) - exact))
        dist = np.max(np.linalg.norm(res.curve.points - affine_extremal_eval(ext, res.curve.times), axis=1))
        assert dist < 5e-3
    assert errs[1] < 1e-2 * exact and errs[1] < errs[0]


def test_zero_field_gives_geodesic():
    x0, x1 = np.array([1.0, 0, 0]), np.array([0.0, 0.6, 0.8])
    res = var.minimize_scenario(SymmetricField(1), [x0, x1], [0.0, 1.0], N=100)
    assert var.simpson_J(res.curve, SymmetricField(1)) == pytest.approx((math.pi / 2) ** 2, rel=1e-4)


def test_flow_init_follows_closed_orbit():
    A = SymmetricField(1, 1.0, 0.0)
    e = np.array([1.0, 0.0, 0.0])
    c0 = var.integral_curve_init(A, [e, e], [0.0, 2 * math.pi], N=400)
    assert var.discrete_J(c0, A) < 1e-3
    res = var.minimize_curve(c0, A)
    assert res.J < 1e-3
    assert np.max(np.abs(res.curve.points[:, 2])) < 1e-8


def test_resample_keeps_waypoints():
    c = var.geodesic_init(H2, [[0, 0, 1.0], [0.3, 0.4, math.sqrt(1.25)]], [0.0, 1.0], N=10)
    r = var.resample(c, 25)
    assert len(r.times) == 26
    np.testing.assert_allclose(r.waypoints, c.waypoints)
    assert H2.constraint_residual(r.points) < 1e-12


def test_errors():
    with pytest.raises(var.VariationalError):
        var.geodesic_init(S2, [[1.0, 0, 0], [0, 1.0, 0]], [0.0, 1.0], N=1)
    with pytest.raises(var.VariationalError):
        var.DiscreteCurve(S2, [0.0, 1.0, 0.5], np.eye(3), [0, 2])
    with pytest.raises(var.VariationalError):
        var.DiscreteCurve(S2, [0.0, 0.5, 1.0], np.eye(3), [0, 1, 2])
    with pytest.raises(var.VariationalError):
        var.minimize_scenario(SymmetricField(1), [[1.0, 0, 0], [0, 1.0, 0]], [0, 1], init="spline")
    c = var.geodesic_init(S3, [[1.0, 0, 0, 0], [0, 1.0, 0, 0]], [0.0, 1.0], N=4)
    with pytest.raises(var.VariationalError):
        var.minimize_curve(c, SymmetricField(1))
