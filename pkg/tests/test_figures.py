import math
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from condex.figures import FigureError, emit_figure, latitude_orbits
from condex.geom import H2, S2, S3, euclidean
from condex.quaternion import qexp

NS = "{http://www.w3.org/2000/svg}"


def _paths(svg):
    root = ET.fromstring(svg)
    return root, root.findall(f"{NS}path")


def _coords(path):
    return np.array([[float(v) for v in p.split(",")] for p in re.findall(r"-?\d+\.\d+,-?\d+\.\d+", path.get("d"))])


def test_equator_projects_to_ellipse():
    s = np.linspace(0, 2 * math.pi, 361)
    eq = np.column_stack([np.cos(s), np.sin(s), 0 * s])
    svg = emit_figure(S2, [eq])
    root, paths = _paths(svg)
    assert root.get("width") == "400"
    # near half solid, far half dimmed and dashed
    dashed = [p for p in paths if p.get("stroke-dasharray")]
    solid = [p for p in paths if not p.get("stroke-dasharray")]
    assert dashed and solid
    pts = np.vstack([_coords(p) for p in paths]) - 200.0
    # a circle seen obliquely: x^2/a^2 + y^2/b^2 = 1 for fitted a, b
    a, b = np.max(np.abs(pts[:, 0])), np.max(np.abs(pts[:, 1]))
    np.testing.assert_allclose((pts[:, 0] / a) ** 2 + (pts[:, 1] / b) ** 2, 1.0, atol=0.02)


def test_deterministic_and_fixed_precision():
    c = [np.array([[1.0, 0, 0], [0, 1.0, 0], [0, 0, 1.0]])]
    a, b = emit_figure(S2, c, title="t"), emit_figure(S2, c, title="t")
    assert a == b and "<title>t</title>" in a
    assert not re.search(r"\d\.\d{4,}", a)
    assert "-0.000" not in a


def test_hyperbolic_disc_and_orbits():
    orbits = latitude_orbits(H2, n=50)
    assert all(H2.constraint_residual(o) < 1e-12 for o in orbits)
    curve = np.array([[0.0, 0.0, 1.0], [math.sinh(1.0), 0.0, math.cosh(1.0)]])
    root, paths = _paths(emit_figure(H2, [curve], orbits=orbits))
    circles = root.findall(f"{NS}circle")
    assert circles[0].get("stroke") == "#888888"
    assert len(paths) == len(orbits) + 1
    for o in latitude_orbits(S2):
        assert S2.constraint_residual(o) < 1e-12


def test_s3_and_euclidean():
    qs = np.array([qexp(np.array([0.3, 0.2, 0.1]), t) for t in np.linspace(0, 1, 20)])
    ET.fromstring(emit_figure(S3, [qs]))
    ET.fromstring(emit_figure(euclidean(2), [np.random.default_rng(0).normal(size=(10, 2))]))
    ET.fromstring(emit_figure(euclidean(1), [np.linspace(0, 1, 5)[:, None]]))


def test_dimension_mismatch():
    with pytest.raises(FigureError):
        emit_figure(S2, [np.zeros((3, 4))])
