"""Ambient-coordinate geometry for the manifolds used throughout condex.

Four manifolds are supported, always stored in the coordinates of the
ambient vector space (no charts):

* ``Euclidean(m)``: plain E^m.
* ``SpaceForm(+1)``: the unit sphere S^2 in E^3.
* ``SpaceForm(-1)``: the upper sheet of the unit hyperboloid H^2 in Lorentz
  3-space, with bilinear form v1 w1 + v2 w2 - v3 w3.
* ``UnitQuaternions``: S^3 in E^4, quaternions stored as (w, i, j, k).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TOL_MANIFOLD = 1e-9
TOL_TANGENT = 1e-9


class ManifoldError(ValueError):
    """A point or vector violates the manifold (or tangency) constraint."""


@dataclass(frozen=True)
class Manifold:
    """Tag identifying one of the supported manifolds.

    ``kind`` is ``"euclidean"``, ``"spaceform"`` or ``"quaternions"``.
    ``sigma`` is only meaningful for space forms.
    """

    kind: str
    dim: int = 2
    sigma: int = 1

    def __post_init__(self):
        if self.kind not in ("euclidean", "spaceform", "quaternions"):
            raise ValueError(f"unknown manifold kind {self.kind!r}")
        if self.kind == "spaceform" and self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if self.dim < 1:
            raise ValueError("dimension must be >= 1")

    @property
    def ambient_dim(self) -> int:
        if self.kind == "spaceform":
            return 3
        if self.kind == "quaternions":
            return 4
        return self.dim

    @property
    def intrinsic_dim(self) -> int:
        if self.kind == "spaceform":
            return 2
        if self.kind == "quaternions":
            return 3
        return self.dim

    @property
    def signature(self) -> np.ndarray:
        """Diagonal of the ambient bilinear form."""
        s = np.ones(self.ambient_dim)
        if self.kind == "spaceform":
            s[2] = self.sigma
        return s

    @property
    def curvature(self) -> int:
        """Value of <x, x> on the manifold (0 marks the flat case)."""
        if self.kind == "euclidean":
            return 0
        if self.kind == "quaternions":
            return 1
        return self.sigma

    @property
    def name(self) -> str:
        if self.kind == "euclidean":
            return f"E{self.dim}"
        if self.kind == "quaternions":
            return "S3"
        return "S2" if self.sigma == 1 else "H2"

    # -- metric -----------------------------------------------------------

    def inner(self, v, w):
        """Ambient bilinear form, vectorised over leading axes."""
        v = np.asarray(v, dtype=float)
        w = np.asarray(w, dtype=float)
        return np.sum(v * w * self.signature, axis=-1)

    def norm(self, v):
        return np.sqrt(np.abs(self.inner(v, v)))

    # -- constraint handling ----------------------------------------------

    def constraint_residual(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if self.kind == "euclidean":
            return 0.0
        return float(np.max(np.abs(self.inner(x, x) - self.curvature)))

    def check_point(self, x, tol: float = TOL_MANIFOLD) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise ManifoldError(
                f"{self.name} points need {self.ambient_dim} coordinates, got {x.shape[-1]}"
            )
        if self.constraint_residual(x) > tol:
            raise ManifoldError(f"point {x} is not on {self.name}")
        if self.kind == "spaceform" and self.sigma == -1 and np.any(x[..., 2] <= 0):
            raise ManifoldError(f"point {x} is not on the upper sheet of H2")
        return x

    def check_tangent(self, x, v, tol: float = TOL_TANGENT) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if self.kind != "euclidean":
            r = np.max(np.abs(self.inner(x, v)))
            if r > tol:
                raise ManifoldError(f"vector {v} is not tangent at {x} (residual {r:.3g})")
        return v

    def project(self, x, v) -> np.ndarray:
        """Orthogonal projection of ``v`` onto the tangent space at ``x``."""
        v = np.asarray(v, dtype=float)
        if self.kind == "euclidean":
            return v.copy()
        x = np.asarray(x, dtype=float)
        k = self.curvature
        return v - k * self.inner(v, x)[..., None] * x

    def retract(self, y) -> np.ndarray:
        """Nearest-point style normalisation of ambient ``y`` onto the manifold."""
        y = np.asarray(y, dtype=float)
        if self.kind == "euclidean":
            return y.copy()
        if self.kind == "spaceform" and self.sigma == -1:
            q = -self.inner(y, y)
            out = y / np.sqrt(q)[..., None]
            # keep the upper sheet
            return np.where(out[..., 2:3] < 0, -out, out)
        return y / np.linalg.norm(y, axis=-1, keepdims=True)

    def tangent_basis(self, x) -> np.ndarray:
        """Rows form an orthonormal basis (in the induced metric) of T_x M."""
        x = np.asarray(x, dtype=float)
        basis = []
        for e in np.eye(self.ambient_dim):
            u = self.project(x, e)
            for b in basis:
                u = u - self.inner(u, b) * b
            n = self.norm(u)
            if n > 1e-8:
                basis.append(u / n)
            if len(basis) == self.intrinsic_dim:
                break
        return np.array(basis)

    # -- geodesics ---------------------------------------------------------

    def geodesic_point(self, x0, v, t) -> np.ndarray:
        """Point at time ``t`` on the geodesic with x(0) = x0, x'(0) = v.

        ``v`` need not be unit; the speed is folded into the arc length.
        """
        x0 = np.asarray(x0, dtype=float)
        v = np.asarray(v, dtype=float)
        if self.kind == "euclidean":
            return x0 + t * v
        speed = float(self.norm(v))
        if speed == 0.0:
            return x0.copy()
        s = speed * t
        u = v / speed
        if self.curvature == 1:
            return np.cos(s) * x0 + np.sin(s) * u
        return np.cosh(s) * x0 + np.sinh(s) * u

    def log_map(self, x0, x1) -> np.ndarray:
        """Initial velocity of the minimal geodesic reaching ``x1`` at t = 1."""
        x0 = np.asarray(x0, dtype=float)
        x1 = np.asarray(x1, dtype=float)
        if self.kind == "euclidean":
            return x1 - x0
        u = self.project(x0, x1)
        n = float(self.norm(u))
        if n < 1e-15:
            return np.zeros_like(x0)
        c = float(self.inner(x0, x1)) * self.curvature
        if self.curvature == 1:
            ang = np.arctan2(n, c)
        else:
            ang = np.arccosh(max(c, 1.0))
        return ang * u / n

    def distance(self, x0, x1) -> float:
        return float(self.norm(self.log_map(x0, x1)))


def euclidean(m: int) -> Manifold:
    return Manifold("euclidean", dim=m)


S2 = Manifold("spaceform", sigma=1)
H2 = Manifold("spaceform", sigma=-1)
S3 = Manifold("quaternions", dim=3)


def space_form(sigma: int) -> Manifold:
    return S2 if sigma == 1 else H2


def metric_inner(sigma: int, v, w) -> float:
    """The signature-``sigma`` bilinear form on R^3."""
    return space_form(sigma).inner(v, w)


def project_to_tangent(sigma: int, x, v) -> np.ndarray:
    return space_form(sigma).project(x, v)


def geodesic_point(manifold: Manifold, x0, v, t) -> np.ndarray:
    return manifold.geodesic_point(x0, v, t)
