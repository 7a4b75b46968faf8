"""Prior vector fields and the exterior-derivative machinery built on them.

Every field knows how to evaluate itself at a point, its ambient Jacobian,
the contraction ``theta_{A,X}^{-T}`` (the vector dual to Y -> dA^T(X, Y)),
and half the gradient of its squared norm. The named families use closed
formulas; :class:`CustomField` falls back to central differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .geom import H2, S2, S3, Manifold, ManifoldError, euclidean, space_form
from .quaternion import qmul, qconj, right_mult_matrix


def _as_fn(v):
    """Constant-or-callable -> callable of x3."""
    if callable(v):
        return v
    v = float(v)

    def const(x3):
        if isinstance(x3, float):
            return v
        return v * np.ones_like(np.asarray(x3, dtype=float))
    return const


class PriorField:
    """Base class. Subclasses provide :meth:`value` and :meth:`jacobian`."""

    manifold: Manifold

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        """Ambient Jacobian; only its action on tangent vectors is meaningful."""
        raise NotImplementedError

    def theta(self, x, X) -> np.ndarray:
        M = self.manifold
        J = self.jacobian(x)
        S = M.signature
        X = np.asarray(X, dtype=float)
        return M.project(x, J @ X - S * (J.T @ (S * X)))

    def half_grad_norm_sq(self, x) -> np.ndarray:
        M = self.manifold
        S = M.signature
        J = self.jacobian(x)
        return M.project(x, S * (J.T @ (S * self.value(x))))

    def norm_sq(self, x) -> float:
        a = self.value(x)
        return float(self.manifold.inner(a, a))

    def values(self, P) -> np.ndarray:
        """Field at each row of P."""
        return np.array([self.value(p) for p in np.asarray(P, dtype=float)])

    def jacobians(self, P) -> np.ndarray:
        """Ambient Jacobians at each row of P, shape (n, d, d)."""
        return np.array([self.jacobian(p) for p in np.asarray(P, dtype=float)])

    def dAT(self, x, X, Y) -> float:
        """Exterior derivative of the dual 1-form evaluated on (X, Y)."""
        return float(self.manifold.inner(self.theta(x, X), Y))

    def potential(self) -> Optional[Callable]:
        """A function phi with grad phi = A, if the field is known to be exact."""
        return None

    def __neg__(self):
        return ScaledField(self, -1.0)


class ScaledField(PriorField):
    def __init__(self, base: PriorField, factor: float):
        self.base = base
        self.factor = float(factor)
        self.manifold = base.manifold

    def value(self, x):
        return self.factor * self.base.value(x)

    def jacobian(self, x):
        return self.factor * self.base.jacobian(x)

    def values(self, P):
        return self.factor * self.base.values(P)

    def jacobians(self, P):
        return self.factor * self.base.jacobians(P)

    def theta(self, x, X):
        return self.factor * self.base.theta(x, X)

    def half_grad_norm_sq(self, x):
        return self.factor**2 * self.base.half_grad_norm_sq(x)

    def potential(self):
        phi = self.base.potential()
        if phi is None:
            return None
        f = self.factor
        return lambda x: f * phi(x)


@dataclass(eq=False)
class ConstantField(PriorField):
    """A(y) = c on E^m."""

    c: np.ndarray

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float)
        self.manifold = euclidean(self.c.size)

    def value(self, x):
        return self.c.copy()

    def values(self, P):
        return np.broadcast_to(self.c, (len(P), self.c.size)).copy()

    def jacobians(self, P):
        return np.zeros((len(P), self.c.size, self.c.size))

    def jacobian(self, x):
        return np.zeros((self.c.size, self.c.size))

    def theta(self, x, X):
        return np.zeros_like(self.c)

    def half_grad_norm_sq(self, x):
        return np.zeros_like(self.c)

    def potential(self):
        c = self.c
        return lambda x: float(np.dot(c, x))


@dataclass(eq=False)
class AffineField(PriorField):
    """A(y) = B y + c on E^m."""

    B: np.ndarray
    c: np.ndarray

    def __post_init__(self):
        self.B = np.atleast_2d(np.asarray(self.B, dtype=float))
        m = self.B.shape[0]
        if self.B.shape != (m, m):
            raise ValueError("affine field needs a square matrix B")
        self.c = np.zeros(m) if self.c is None else np.asarray(self.c, dtype=float)
        if self.c.shape != (m,):
            raise ValueError("c must have the dimension of B")
        self.manifold = euclidean(m)

    def value(self, x):
        return self.B @ np.asarray(x, dtype=float) + self.c

    def values(self, P):
        return np.asarray(P, dtype=float) @ self.B.T + self.c

    def jacobians(self, P):
        return np.broadcast_to(self.B, (len(P),) + self.B.shape)

    def jacobian(self, x):
        return self.B

    def theta(self, x, X):
        return (self.B - self.B.T) @ np.asarray(X, dtype=float)

    def half_grad_norm_sq(self, x):
        return self.B.T @ self.value(x)

    def potential(self):
        if not np.allclose(self.B, self.B.T):
            return None
        B, c = self.B, self.c
        return lambda x: float(0.5 * x @ B @ x + c @ x)


class SymmetricField(PriorField):
    """A = beta(x3) B + gamma(x3) C on the space form M_sigma.

    B(x) = (-x2, x1, 0) is the rotation field and C(x) = (0, 0, 1) - x3 x is
    the (sigma-scaled) gradient of the height function. ``beta`` and ``gamma``
    are constants or callables of x3; callables need their derivatives.
    """

    def __init__(self, sigma: int, beta=0.0, gamma=0.0, beta_prime=None, gamma_prime=None):
        if sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        self.sigma = sigma
        self.manifold = space_form(sigma)
        self.beta_const = None if callable(beta) else float(beta)
        self.gamma_const = None if callable(gamma) else float(gamma)
        if callable(beta) and beta_prime is None:
            raise ValueError("a non-constant beta needs beta_prime")
        if callable(gamma) and gamma_prime is None:
            raise ValueError("a non-constant gamma needs gamma_prime")
        self.beta = _as_fn(beta)
        self.gamma = _as_fn(gamma)
        self.beta_prime = _as_fn(0.0) if beta_prime is None else _as_fn(beta_prime)
        self.gamma_prime = _as_fn(0.0) if gamma_prime is None else _as_fn(gamma_prime)

    @property
    def is_constant(self) -> bool:
        return self.beta_const is not None and self.gamma_const is not None

    def _coeffs(self, x3):
        return (float(self.beta(x3)), float(self.gamma(x3)),
                float(self.beta_prime(x3)), float(self.gamma_prime(x3)))

    def value(self, x):
        x = np.asarray(x, dtype=float)
        b, g, _, _ = self._coeffs(x[2])
        return b * np.array([-x[1], x[0], 0.0]) + g * (np.array([0.0, 0.0, 1.0]) - x[2] * x)

    def jacobian(self, x):
        x1, x2, x3 = np.asarray(x, dtype=float)
        b, g, bp, gp = self._coeffs(x3)
        return np.array([
            [-g * x3, -b, -bp * x2 - gp * x3 * x1 - g * x1],
            [b, -g * x3, bp * x1 - gp * x3 * x2 - g * x2],
            [0.0, 0.0, gp * (1 - x3 * x3) - 2 * g * x3],
        ])

    def theta(self, x, X):
        x = np.asarray(x, dtype=float)
        X = np.asarray(X, dtype=float)
        b, _, bp, _ = self._coeffs(x[2])
        w = self.sigma * (x[0] * X[1] - x[1] * X[0])
        rot = np.array([-X[1], X[0], 0.0])
        return (2 * b * (rot + w * x)
                + bp * (np.array([-x[1] * X[2], x[0] * X[2], -w]) + w * x[2] * x))

    def half_grad_norm_sq(self, x):
        x = np.asarray(x, dtype=float)
        b, g, bp, gp = self._coeffs(x[2])
        F = b * b + g * g
        G = b * bp + g * gp
        s = 1 - x[2] ** 2
        return np.array([F * x[0], F * x[1], G * s]) - (F + G * x[2]) * s * x

    def norm_sq(self, x):
        b, g, _, _ = self._coeffs(x[2])
        return (b * b + g * g) * self.sigma * (1 - x[2] ** 2)

    def values(self, P):
        if not self.is_constant:
            return super().values(P)
        P = np.asarray(P, dtype=float)
        b, g = self.beta_const, self.gamma_const
        out = g * (-P[:, 2:3] * P)
        out[:, 0] -= b * P[:, 1]
        out[:, 1] += b * P[:, 0]
        out[:, 2] += g
        return out

    def jacobians(self, P):
        if not self.is_constant:
            return super().jacobians(P)
        P = np.asarray(P, dtype=float)
        b, g = self.beta_const, self.gamma_const
        x1, x2, x3 = P[:, 0], P[:, 1], P[:, 2]
        J = np.zeros((len(P), 3, 3))
        J[:, 0, 0] = -g * x3
        J[:, 0, 1] = -b
        J[:, 0, 2] = -g * x1
        J[:, 1, 0] = b
        J[:, 1, 1] = -g * x3
        J[:, 1, 2] = -g * x2
        J[:, 2, 2] = -2 * g * x3
        return J

    def acceleration(self, x, v) -> np.ndarray:
        """x'' from the componentwise Euler-Lagrange equations, in scalar arithmetic."""
        x1, x2, x3 = float(x[0]), float(x[1]), float(x[2])
        v1, v2, v3 = float(v[0]), float(v[1]), float(v[2])
        s = self.sigma
        if self.is_constant:
            b, g, bp, gp = self.beta_const, self.gamma_const, 0.0, 0.0
        else:
            b, g, bp, gp = self._coeffs(x3)
        F = b * b + g * g
        G = b * bp + g * gp
        q = 1.0 - x3 * x3
        w = s * (x1 * v2 - x2 * v1)
        vv = v1 * v1 + v2 * v2 + s * v3 * v3
        rad = F * x3 * x3 - G * q * x3 + (2 * b + bp * x3) * w - s * vv
        return np.array([
            rad * x1 - 2 * b * v2 - bp * x2 * v3,
            rad * x2 + 2 * b * v1 + bp * x1 * v3,
            -s * vv * x3 - F * q * x3 + G * q * q + (2 * b * x3 - bp * q) * w,
        ])

    def potential(self):
        if self.beta_const != 0.0 or self.gamma_const is None:
            return None
        g, s = self.gamma_const, self.sigma
        return lambda x: s * g * float(np.asarray(x)[2])

    def __repr__(self):
        return f"SymmetricField(sigma={self.sigma}, beta={self.beta_const}, gamma={self.gamma_const})"


class LeftInvariantField(PriorField):
    """A(x) = x * alpha on the unit quaternions, alpha pure imaginary."""

    def __init__(self, alpha):
        self.alpha = np.asarray(alpha, dtype=float)
        if self.alpha.shape != (3,):
            raise ValueError("alpha is a 3-vector (pure quaternion)")
        self.manifold = S3
        self._R = right_mult_matrix(np.concatenate([[0.0], self.alpha]))

    def value(self, x):
        return self._R @ np.asarray(x, dtype=float)

    def jacobian(self, x):
        return self._R

    def values(self, P):
        return np.asarray(P, dtype=float) @ self._R.T

    def jacobians(self, P):
        return np.broadcast_to(self._R, (len(P), 4, 4))

    def theta(self, x, X):
        V = qmul(qconj(x), X)[1:]
        return qmul(x, np.concatenate([[0.0], 2.0 * np.cross(V, self.alpha)]))

    def half_grad_norm_sq(self, x):
        return np.zeros(4)

    def __repr__(self):
        return f"LeftInvariantField(alpha={self.alpha.tolist()})"


class CustomField(PriorField):
    """User callback x -> tangent vector, with an optional ambient Jacobian.

    Derivatives are taken by central differences along geodesics through x,
    step ``1e-5 * max(1, |x|)``.
    """

    def __init__(self, manifold: Manifold, fn: Callable, jac: Optional[Callable] = None,
                 potential: Optional[Callable] = None):
        self.manifold = manifold
        self.fn = fn
        self.jac = jac
        self._potential = potential

    def value(self, x):
        return np.asarray(self.fn(np.asarray(x, dtype=float)), dtype=float)

    def jacobian(self, x):
        if self.jac is not None:
            return np.asarray(self.jac(np.asarray(x, dtype=float)), dtype=float)
        M = self.manifold
        x = np.asarray(x, dtype=float)
        h = 1e-5 * max(1.0, float(np.linalg.norm(x)))
        J = np.zeros((M.ambient_dim, M.ambient_dim))
        S = M.signature
        for e in M.tangent_basis(x):
            d = (self.value(M.geodesic_point(x, e, h)) - self.value(M.geodesic_point(x, e, -h))) / (2 * h)
            # J u = sum_i <e_i, u> D_{e_i} A
            J += np.outer(d, S * e)
        return J

    def potential(self):
        return self._potential


def eval_field(field: PriorField, x, tol: float = 1e-9) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != field.manifold.ambient_dim:
        raise ManifoldError(f"field lives on {field.manifold.name}, point has {x.shape[-1]} coordinates")
    field.manifold.check_point(x, tol=max(tol, 1e-9))
    return field.value(x)


def theta_contraction(field: PriorField, x, X) -> np.ndarray:
    return field.theta(x, X)


def grad_norm_sq(field: PriorField, x) -> np.ndarray:
    """Half the Riemannian gradient of |A|^2."""
    return field.half_grad_norm_sq(x)


@dataclass(frozen=True)
class ClosednessReport:
    is_closed: bool
    max_violation: float


def closedness_check(field: PriorField, samples: Sequence, tol: float = 1e-9) -> ClosednessReport:
    """Max of |dA^T(X, Y)| over ``(x, X, Y)`` samples."""
    if len(samples) == 0:
        raise ValueError("closedness_check needs at least one sample")
    worst = max(abs(field.dAT(x, X, Y)) for x, X, Y in samples)
    return ClosednessReport(worst <= tol, float(worst))


def reflexivity_constant(phi: Callable, x0, xn) -> float:
    """The additive constant relating reversed and forward costs of an exact field."""
    return 4.0 * (float(phi(xn)) - float(phi(x0)))


def random_tangent_samples(manifold: Manifold, n: int, rng: np.random.Generator, scale: float = 1.0):
    """``n`` random (x, X, Y) triples with X, Y tangent at x."""
    out = []
    for _ in range(n):
        x = random_point(manifold, rng, scale)
        X = manifold.project(x, rng.normal(size=manifold.ambient_dim))
        Y = manifold.project(x, rng.normal(size=manifold.ambient_dim))
        out.append((x, X, Y))
    return out


def random_point(manifold: Manifold, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    if manifold.kind == "euclidean":
        return scale * rng.normal(size=manifold.dim)
    if manifold.kind == "spaceform" and manifold.sigma == -1:
        u = scale * rng.normal(size=2)
        return np.array([u[0], u[1], np.sqrt(1 + u @ u)])
    y = rng.normal(size=manifold.ambient_dim)
    return y / np.linalg.norm(y)


__all__ = [
    "PriorField", "ConstantField", "AffineField", "SymmetricField", "LeftInvariantField",
    "CustomField", "ScaledField", "eval_field", "theta_contraction", "grad_norm_sq",
    "closedness_check", "ClosednessReport", "reflexivity_constant", "random_tangent_samples",
    "random_point", "S2", "H2", "S3",
]
