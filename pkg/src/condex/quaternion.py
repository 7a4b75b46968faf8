"""Quaternion arithmetic in (w, i, j, k) order.

Pure-imaginary quaternions (Lie algebra elements of S^3) are passed around
as 3-vectors; group elements as 4-vectors.
"""

from __future__ import annotations

import numpy as np

_SERIES_CUTOFF = 1e-4


class AntipodeError(ValueError):
    """The principal logarithm is undefined at -1."""


def qmul(a, b) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w1, x1, y1, z1 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    w2, x2, y2, z2 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def qconj(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def qinv(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return qconj(q) / np.sum(q * q, axis=-1, keepdims=True)


def pure(u) -> np.ndarray:
    """Embed a 3-vector as a pure-imaginary quaternion."""
    u = np.asarray(u, dtype=float)
    return np.concatenate([np.zeros(u.shape[:-1] + (1,)), u], axis=-1)


def identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def left_mult_matrix(a) -> np.ndarray:
    """Matrix L with L @ x == qmul(a, x)."""
    return np.stack([qmul(a, e) for e in np.eye(4)], axis=-1)


def right_mult_matrix(a) -> np.ndarray:
    """Matrix R with R @ x == qmul(x, a)."""
    return np.stack([qmul(e, a) for e in np.eye(4)], axis=-1)


def qexp(u, t=1.0) -> np.ndarray:
    """exp(t u) = cos(t|u|) + sin(t|u|) u/|u| for a pure quaternion u."""
    v = np.asarray(u, dtype=float) * t
    th = np.linalg.norm(v)
    if th < _SERIES_CUTOFF:
        th2 = th * th
        c = 1.0 - th2 / 2.0 + th2 * th2 / 24.0
        sinc = 1.0 - th2 / 6.0 + th2 * th2 / 120.0
    else:
        c = np.cos(th)
        sinc = np.sin(th) / th
    return np.concatenate([[c], sinc * v])


def qlog(q, antipode_tol: float = 1e-12) -> np.ndarray:
    """Principal logarithm of a unit quaternion, as a 3-vector of norm <= pi."""
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q)
    v = q[1:]
    s = np.linalg.norm(v)
    if q[0] < 0 and s < antipode_tol:
        raise AntipodeError("logarithm of -1 is not unique")
    ang = np.arctan2(s, q[0])
    if s < 1e-12:
        return v / q[0]
    return v * (ang / s)


def qrotate(q, v) -> np.ndarray:
    """Adjoint action q v q^-1 on a 3-vector."""
    return qmul(qmul(q, pure(v)), qconj(q))[1:]
