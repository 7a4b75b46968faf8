import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from condex.fields import (AffineField, ConstantField, CustomField, LeftInvariantField, SymmetricField,
                           closedness_check, eval_field, random_point, random_tangent_samples,
                           reflexivity_constant)
from condex.geom import H2, S2, S3, ManifoldError

coef = st.floats(-2, 2, allow_nan=False)
seeds = st.integers(0, 2**31)


def _fields(beta, gamma):
    return [
        SymmetricField(1, beta, gamma),
        SymmetricField(-1, beta, gamma),
        SymmetricField(1, lambda z: beta + z * z, lambda z: gamma * z,
                       beta_prime=lambda z: 2 * z, gamma_prime=lambda z: gamma),
        LeftInvariantField([beta, gamma, 0.3]),
        AffineField([[beta, 1.0, 0.0], [0.2, gamma, -1.0], [0.0, 0.5, 0.1]], [1.0, 0.0, gamma]),
    ]


def _numeric(A):
    return CustomField(A.manifold, A.value)


@given(coef, coef, seeds)
def test_theta_matches_numeric_derivative(beta, gamma, seed):
    rng = np.random.default_rng(seed)
    for A in _fields(beta, gamma):
        N = _numeric(A)
        for x, X, _ in random_tangent_samples(A.manifold, 3, rng, scale=0.8):
            np.testing.assert_allclose(A.theta(x, X), N.theta(x, X), atol=1e-6 * (1 + np.linalg.norm(x)) ** 3)


@given(coef, coef, seeds)
def test_half_grad_norm_sq_numeric(beta, gamma, seed):
    rng = np.random.default_rng(seed)
    for A in _fields(beta, gamma):
        M = A.manifold
        x = random_point(M, rng, scale=0.8)
        g = A.half_grad_norm_sq(x)
        h = 1e-6
        for e in M.tangent_basis(x):
            fd = (A.norm_sq(M.geodesic_point(x, e, h)) - A.norm_sq(M.geodesic_point(x, e, -h))) / (4 * h)
            assert M.inner(g, e) == pytest.approx(fd, abs=1e-6 * (1 + abs(fd)))


@given(coef, coef, seeds)
def test_batch_matches_pointwise(beta, gamma, seed):
    rng = np.random.default_rng(seed)
    for A in _fields(beta, gamma) + [ConstantField(np.array([1.0, -2.0])), -A_sym()]:
        P = np.array([random_point(A.manifold, rng) for _ in range(5)])
        np.testing.assert_allclose(A.values(P), [A.value(p) for p in P], atol=1e-13)
        np.testing.assert_allclose(A.jacobians(P), [A.jacobian(p) for p in P], atol=1e-13)


def A_sym():
    return SymmetricField(1, 0.4, -0.3)


def test_values_are_tangent(rng):
    for A in _fields(0.7, -1.1):
        if A.manifold.kind == "euclidean":
            continue
        for _ in range(10):
            x = random_point(A.manifold, rng)
            assert abs(A.manifold.inner(x, A.value(x))) < 1e-12 * (1 + np.linalg.norm(x) ** 3)


def test_closedness(rng):
    for sigma in (1, -1):
        M = S2 if sigma == 1 else H2
        samples = random_tangent_samples(M, 20, rng)
        assert closedness_check(SymmetricField(sigma, 0.0, 1.3), samples).is_closed
        rep = closedness_check(SymmetricField(sigma, 1.0, 0.0), samples)
        assert not rep.is_closed and rep.max_violation > 0.1
    samples = random_tangent_samples(S3, 10, rng)
    assert not closedness_check(LeftInvariantField([0.0, 0.0, 1.0]), samples).is_closed
    with pytest.raises(ValueError):
        closedness_check(A_sym(), [])


def test_potentials(rng):
    for A in (SymmetricField(1, 0.0, 0.8), SymmetricField(-1, 0.0, -0.5),
              AffineField([[1.0, 2.0], [2.0, -1.0]], [0.3, 0.1]), ConstantField([1.0, 2.0, 3.0]),
              -SymmetricField(1, 0.0, 0.8)):
        phi = A.potential()
        assert phi is not None
        M = A.manifold
        x = random_point(M, rng)
        h = 1e-6
        for e in M.tangent_basis(x):
            fd = (phi(M.geodesic_point(x, e, h)) - phi(M.geodesic_point(x, e, -h))) / (2 * h)
            assert M.inner(A.value(x), e) == pytest.approx(fd, abs=1e-7)
    assert SymmetricField(1, 1.0, 0.0).potential() is None
    assert AffineField([[0.0, 1.0], [-1.0, 0.0]], None).potential() is None
    assert reflexivity_constant(lambda x: x[2], [0, 0, 1.0], [1.0, 0, 0]) == -4.0


def test_validation():
    with pytest.raises(ValueError):
        SymmetricField(2)
    with pytest.raises(ValueError):
        SymmetricField(1, lambda z: z)
    with pytest.raises(ValueError):
        LeftInvariantField([1.0, 2.0])
    with pytest.raises(ValueError):
        AffineField(np.ones((2, 3)), None)
    with pytest.raises(ManifoldError):
        eval_field(A_sym(), [1.0, 0.0, 0.0, 0.0])
    with pytest.raises(ManifoldError):
        eval_field(A_sym(), [1.0, 1.0, 0.0])


def test_symmetric_field_formula():
    A = SymmetricField(1, 2.0, 3.0)
    x = np.array([0.6, 0.0, 0.8])
    np.testing.assert_allclose(A.value(x), 2.0 * np.array([0, 0.6, 0]) + 3.0 * (np.array([0, 0, 1]) - 0.8 * x))
    assert A.norm_sq(x) == pytest.approx(13 * 0.36)
