"""Closed-form conditional extrema in E^m for affine priors A(y) = B y + c.

Writing z = x' - A(x), the Euler-Lagrange equation reduces to
z' = -B^T z, so z(t) = exp(-t B^T) d + c'. We parameterise by an absolute
time origin: z(t) = exp(-t B^T) d, and x solves x' = B x + c + z. All the
required integrals come from one block matrix exponential

    exp(tau [[B, I, I], [0, -B^T, 0], [0, 0, 0]]),

whose (1,2) block is int_0^tau exp((tau - u) B) exp(-u B^T) du and whose
(1,3) block is int_0^tau exp((tau - u) B) du.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .fields import AffineField


class SingularEndpointMap(np.linalg.LinAlgError):
    pass


@dataclass(frozen=True)
class AffineExtremal:
    """x(t) for t >= t0 with x(t0) = x0 and z(t) = exp(-t B^T) d."""

    B: np.ndarray
    c: np.ndarray
    d: np.ndarray
    x0: np.ndarray
    t0: float = 0.0

    @property
    def field(self) -> AffineField:
        return AffineField(self.B, self.c)


def _blocks(B, tau: float):
    m = B.shape[0]
    I = np.eye(m)
    Z = np.zeros((m, m))
    big = np.block([[B, I, I], [Z, -B.T, Z], [Z, Z, Z]])
    E = expm(tau * big)
    return E[:m, :m], E[:m, m:2 * m], E[:m, 2 * m:]


def affine_extremal_eval(ext: AffineExtremal, t) -> np.ndarray:
    B = np.asarray(ext.B, dtype=float)
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    shift = expm(-ext.t0 * B.T) @ ext.d
    out = []
    for tt in ts:
        eB, M12, M13 = _blocks(B, tt - ext.t0)
        out.append(eB @ ext.x0 + M12 @ shift + M13 @ ext.c)
    out = np.array(out)
    return out[0] if np.ndim(t) == 0 else out


def affine_extremal_velocity(ext: AffineExtremal, t) -> np.ndarray:
    B = np.asarray(ext.B, dtype=float)
    x = np.atleast_2d(affine_extremal_eval(ext, t))
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    v = np.array([B @ xi + ext.c + expm(-tt * B.T) @ ext.d for xi, tt in zip(x, ts)])
    return v[0] if np.ndim(t) == 0 else v


def solve_endpoint_d(B, c, x0, x1, t0: float, t1: float, cond_max: float = 1e12) -> AffineExtremal:
    """The affine extremal from (t0, x0) to (t1, x1)."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    c = np.asarray(c, dtype=float)
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    if t1 <= t0:
        raise ValueError("need t1 > t0")
    eB, M12, M13 = _blocks(B, t1 - t0)
    K = M12 @ expm(-t0 * B.T)
    if np.linalg.cond(K) > cond_max:
        raise SingularEndpointMap("endpoint map d -> x(t1) is singular")
    d = np.linalg.solve(K, x1 - eB @ x0 - M13 @ c)
    return AffineExtremal(B, c, d, x0, float(t0))


def affine_cost(ext: AffineExtremal, t1: float) -> float:
    """J = int |exp(-t B^T) d|^2 dt over [t0, t1], via a Gramian exponential."""
    B = np.asarray(ext.B, dtype=float)
    m = B.shape[0]
    z0 = expm(-ext.t0 * B.T) @ ext.d
    # Van Loan: int_0^tau exp(-u B) exp(-u B^T) du
    big = np.block([[B, np.eye(m)], [np.zeros((m, m)), -B.T]])
    E = expm((t1 - ext.t0) * big)
    F22 = E[m:, m:]
    F12 = E[:m, m:]
    gram = F22.T @ F12
    return float(z0 @ gram @ z0)
