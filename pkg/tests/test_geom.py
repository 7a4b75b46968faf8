import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from condex.geom import H2, S2, S3, ManifoldError, euclidean, geodesic_point, space_form

coord = st.floats(-3, 3, allow_nan=False)
vec3 = st.tuples(coord, coord, coord).map(np.array)


def _s2_point(v):
    n = np.linalg.norm(v)
    return None if n < 1e-3 else v / n


def _h2_point(v):
    return np.array([v[0], v[1], math.sqrt(1 + v[0] ** 2 + v[1] ** 2)])


def test_names_and_dims():
    assert (S2.name, H2.name, S3.name, euclidean(4).name) == ("S2", "H2", "S3", "E4")
    assert S2.ambient_dim == 3 and S3.ambient_dim == 4 and S3.intrinsic_dim == 3
    assert list(H2.signature) == [1, 1, -1]
    assert space_form(-1) is H2


def test_bad_manifold_args():
    with pytest.raises(ValueError):
        space_form(1).__class__("torus")
    with pytest.raises(ValueError):
        S2.__class__("spaceform", sigma=0)


def test_check_point_rejects():
    with pytest.raises(ManifoldError):
        S2.check_point([1.0, 1.0, 0.0])
    with pytest.raises(ManifoldError):
        H2.check_point([0.0, 0.0, -1.0])
    with pytest.raises(ManifoldError):
        S2.check_point([1.0, 0.0])
    with pytest.raises(ManifoldError):
        S2.check_tangent([1.0, 0, 0], [1.0, 0, 0])


@given(vec3, vec3)
def test_project_is_tangent_s2(a, v):
    x = _s2_point(a)
    if x is None:
        return
    p = S2.project(x, v)
    assert abs(S2.inner(x, p)) < 1e-12 * max(1, np.linalg.norm(v))
    np.testing.assert_allclose(S2.project(x, p), p, atol=1e-12)


@given(vec3, vec3)
def test_project_is_tangent_h2(a, v):
    x = _h2_point(a)
    p = H2.project(x, v)
    assert abs(H2.inner(x, p)) < 1e-10 * max(1, np.linalg.norm(v)) * np.linalg.norm(x) ** 2


@given(vec3, vec3, st.floats(-2, 2))
def test_geodesics_stay_on_manifold(a, v, t):
    for M, x in ((S2, _s2_point(a)), (H2, _h2_point(a))):
        if x is None:
            continue
        u = M.project(x, v)
        y = geodesic_point(M, x, u, t)
        assert M.constraint_residual(y) < 1e-9 * max(1, float(np.linalg.norm(y)) ** 2)


@given(vec3, vec3)
def test_log_inverts_exp_s2(a, v):
    x = _s2_point(a)
    if x is None:
        return
    u = S2.project(x, v)
    if S2.norm(u) > 3.0:
        u = u * 3.0 / S2.norm(u)
    y = S2.geodesic_point(x, u, 1.0)
    np.testing.assert_allclose(S2.log_map(x, y), u, atol=1e-8)


@given(vec3, vec3)
def test_log_inverts_exp_h2(a, v):
    x = _h2_point(np.clip(a, -1, 1))
    u = H2.project(x, np.clip(v, -1, 1))
    y = H2.geodesic_point(x, u, 1.0)
    np.testing.assert_allclose(H2.log_map(x, y), u, atol=1e-7)


def test_tangent_basis_orthonormal(rng):
    for M in (S2, H2, S3, euclidean(3)):
        from condex.fields import random_point
        x = random_point(M, rng)
        E = M.tangent_basis(x)
        assert E.shape == (M.intrinsic_dim, M.ambient_dim)
        G = np.array([[M.inner(a, b) for b in E] for a in E])
        np.testing.assert_allclose(G, np.eye(len(E)), atol=1e-12)
        if M.kind != "euclidean":
            np.testing.assert_allclose([M.inner(x, e) for e in E], 0, atol=1e-12)


def test_retract_h2_upper_sheet():
    y = H2.retract(np.array([0.3, 0.1, -1.2]))
    assert y[2] > 0 and H2.constraint_residual(y) < 1e-12


def test_distance_quarter_circle():
    assert S2.distance([1, 0, 0], [0, 1, 0]) == pytest.approx(math.pi / 2, abs=1e-15)
    x1 = np.array([math.sinh(1.0), 0.0, math.cosh(1.0)])
    assert H2.distance([0, 0, 1], x1) == pytest.approx(1.0, abs=1e-12)
