"""Weierstrass elliptic function for real invariants g2, g3.

Evaluation reduces z modulo the period lattice, halves it until it lies
well inside the Laurent disc, sums the series, then doubles back with the
duplication formula. Half-periods come from Carlson's R_F.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import elliprf

N_TERMS = 12  # coefficients c_2 .. c_12, i.e. the series through z^22


class WeierstrassError(ValueError):
    pass


def laurent_coefficients(g2: float, g3: float, n: int = N_TERMS) -> np.ndarray:
    """c_k with wp(z) = z^-2 + sum_{k>=2} c_k z^(2k-2); index k of the array."""
    c = np.zeros(n + 1, dtype=complex)
    c[2] = g2 / 20.0
    if n >= 3:
        c[3] = g3 / 28.0
    for k in range(4, n + 1):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3.0 * s / ((2 * k + 1) * (k - 3))
    return c


def _series(z: complex, coef) -> tuple:
    z2 = z * z
    p = 1.0 / z2
    dp = -2.0 / (z2 * z)
    zp = 1.0 + 0j  # z^(2k-4) for k = 2
    for k in range(2, len(coef)):
        p += coef[k] * zp * z2
        dp += coef[k] * (2 * k - 2) * zp * z
        zp *= z2
    return p, dp


def cubic_roots(g2: float, g3: float) -> np.ndarray:
    """Roots of 4t^3 - g2 t - g3.

    Three real roots come sorted decreasingly; otherwise the order is
    (complex root with positive imaginary part, real root, its conjugate).
    """
    r = np.roots([4.0, 0.0, -g2, -g3])
    real = sorted([x.real for x in r if abs(x.imag) < 1e-12 * max(1.0, abs(x))], reverse=True)
    if len(real) == 3:
        return np.array(real, dtype=complex)
    cplx = [x for x in r if abs(x.imag) >= 1e-12 * max(1.0, abs(x))]
    cplx.sort(key=lambda x: -x.imag)
    return np.array([cplx[0], real[0], cplx[1]], dtype=complex)


def discriminant(g2: float, g3: float) -> float:
    return g2 ** 3 - 27.0 * g3 ** 2


@dataclass(frozen=True)
class Lattice:
    """Period lattice generated by 2*w1, 2*w3 (complex half-periods)."""

    g2: float
    g3: float
    w1: complex
    w3: complex
    roots: tuple

    @property
    def real_period(self) -> float:
        """Smallest positive real period."""
        if discriminant(self.g2, self.g3) > 0:
            return 2.0 * self.w1.real
        return 2.0 * (self.w1 + self.w3).real

    @property
    def half_periods(self) -> tuple:
        return (self.w1, self.w1 + self.w3, self.w3)


def _rf(x, y, z) -> complex:
    return complex(elliprf(complex(x), complex(y), complex(z)))


@lru_cache(maxsize=256)
def lattice(g2: float, g3: float) -> Lattice:
    g2 = float(g2)
    g3 = float(g3)
    D = discriminant(g2, g3)
    if abs(D) < 1e-14 * max(1.0, abs(g2) ** 3):
        raise WeierstrassError("degenerate lattice: g2^3 - 27 g3^2 = 0")
    e = cubic_roots(g2, g3)
    if D > 0:
        e1, e2, e3 = (x.real for x in e)
        w1 = _rf(0.0, e1 - e2, e1 - e3)
        w3 = 1j * _rf(0.0, e2 - e3, e1 - e3)
    else:
        e1, e2, e3 = e  # e2 real
        w2 = _rf(0.0, e2 - e1, e2 - e3).real
        W = 1j * _rf(0.0, e1 - e2, e3 - e2)
        # rhombic lattice: periods 2*w2 and 2*W, generated by w2 +/- W
        w1 = 0.5 * (w2 + W)
        w3 = 0.5 * (w2 - W)
    return Lattice(g2, g3, complex(w1), complex(w3), tuple(complex(x) for x in e))


def _reduced_basis(L: Lattice):
    """Gauss-reduced basis (a, b) of the period lattice, |a| <= |b|."""
    a, b = 2 * L.w1, 2 * L.w3
    for _ in range(100):
        if abs(b) < abs(a):
            a, b = b, a
        m = round((b * a.conjugate()).real / abs(a) ** 2)
        if m == 0:
            break
        b = b - m * a
    return a, b


def _reduce(z: complex, a: complex, b: complex) -> complex:
    """Representative of z modulo the lattice, close to the origin."""
    u = (z * b.conjugate()).imag / (a * b.conjugate()).imag
    v = (z * a.conjugate()).imag / (b * a.conjugate()).imag
    z = z - round(u) * a - round(v) * b
    best = z
    for i in (-1, 0, 1):
        for j in (-1, 0, 1):
            w = z - i * a - j * b
            if abs(w) < abs(best):
                best = w
    return best


def _raw(z: complex, g2: float, g3: float, r: float):
    """Series at z / 2^n followed by n duplications."""
    n = 0
    while abs(z) > r:
        z *= 0.5
        n += 1
    coef = laurent_coefficients(g2, g3)
    p, dp = _series(z, coef)
    for _ in range(n):
        lam = (6.0 * p * p - 0.5 * g2) / dp
        p2 = lam * lam / 4.0 - 2.0 * p
        dp = -(dp + lam * (p2 - p))
        p = p2
    return p, dp


@lru_cache(maxsize=256)
def _half_table(g2: float, g3: float):
    """(h, e, K) for the half-lattice points next to the origin cell, wp(h) = e."""
    L = lattice(g2, g3)
    a, b = _reduced_basis(L)
    r = 0.25 * min(abs(a), abs(b))
    roots = list(L.roots)
    out = []
    for hs in ((a / 2,), (b / 2,), ((a + b) / 2, (a - b) / 2)):
        p, _ = _raw(hs[0], g2, g3, r)
        i = int(np.argmin([abs(p - e) for e in roots]))
        e = roots[i]
        ej, ek = (roots[j] for j in range(3) if j != i)
        K = (e - ej) * (e - ek)
        for h in hs:
            out += [(h, e, K), (-h, e, K)]
    return tuple(out), a, b, r


def wp_and_prime(z, g2: float, g3: float):
    """wp(z) and wp'(z) for scalar complex z.

    Near a half-period h the addition formula wp(u + h) = e + K / (wp(u) - e)
    keeps the series argument small and avoids dividing by a vanishing wp'
    during duplication.
    """
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise WeierstrassError(f"wp evaluated at a non-finite argument {z}")
    table, a, b, r = _half_table(float(g2), float(g3))
    z = _reduce(z, a, b)
    h, e, K = min(table, key=lambda row: abs(z - row[0]))
    if abs(z - h) < abs(z):
        u = z - h
        if abs(u) < 1e-150:
            return e, 0j
        p, dp = _raw(u, g2, g3, r)
        q = p - e
        return e + K / q, -K * dp / (q * q)
    if abs(z) < 1e-150:
        raise WeierstrassError("wp has a pole at lattice points")
    return _raw(z, g2, g3, r)


def wp(z, g2: float, g3: float):
    """Vectorised wp; real input with real invariants returns real output."""
    arr = np.asarray(z)
    out = np.array([wp_and_prime(complex(zz), g2, g3)[0] for zz in arr.ravel()]).reshape(arr.shape)
    if not np.iscomplexobj(arr):
        out = out.real
    return out if arr.ndim else out[()]


def wp_prime(z, g2: float, g3: float):
    arr = np.asarray(z)
    out = np.array([wp_and_prime(complex(zz), g2, g3)[1] for zz in arr.ravel()]).reshape(arr.shape)
    if not np.iscomplexobj(arr):
        out = out.real
    return out if arr.ndim else out[()]


def wp_inverse(Y: complex, g2: float, g3: float) -> complex:
    """One solution z of wp(z) = Y (principal branch of the elliptic integral)."""
    e = lattice(float(g2), float(g3)).roots
    return _rf(Y - e[0], Y - e[1], Y - e[2])


def wp_solve(target_wp: complex, target_dwp: complex, g2: float, g3: float,
             tol: float = 1e-12, max_iter: int = 50) -> complex:
    """Solve wp(a) = target_wp, wp'(a) = target_dwp.

    The elliptic integral gives a starting point; the sign of wp' selects
    between a and -a, and Newton on wp polishes the result. If that fails,
    Newton is restarted from a grid of points in the fundamental cell.
    """
    L = lattice(float(g2), float(g3))
    Y = complex(target_wp)
    dY = complex(target_dwp)
    scale = max(1.0, abs(Y))
    if abs(dY) < 1e-10 * scale ** 1.5:
        # wp' vanishes: a is a half-period; pick the one whose value matches
        cands = L.half_periods
        vals = [abs(wp_and_prime(w, g2, g3)[0] - Y) for w in cands]
        if min(vals) > 1e-6 * scale:
            raise WeierstrassError("no half-period matches the requested value")
        return cands[int(np.argmin(vals))]
    last = None
    if abs(dY) < 1e-2 * scale ** 1.5:
        # near a half-period w, wp(w + e) - wp(w) is O(e^2) but wp' is O(e):
        # solve on wp' there instead
        for w in L.half_periods:
            p, _ = wp_and_prime(w, g2, g3)
            if abs(p - Y) > 1e-2 * scale:
                continue
            try:
                return _newton_prime(w, Y, dY, g2, g3, tol, max_iter, scale)
            except (WeierstrassError, ZeroDivisionError, OverflowError) as exc:
                last = exc
    starts = [wp_inverse(Y, g2, g3)]
    starts += [u * L.w1 + v * L.w3 for u in (0.3, 0.7, 1.1, 1.5) for v in (0.3, 0.7, 1.1, 1.5)]
    for a0 in starts:
        try:
            return _newton_polish(a0, Y, dY, g2, g3, tol, max_iter, scale)
        except (WeierstrassError, ZeroDivisionError, OverflowError) as exc:
            last = exc
    raise WeierstrassError(f"Newton failed from all {len(starts)} starts: {last}")


def _newton_prime(w, Y, dY, g2, g3, tol, max_iter, scale):
    a = complex(w)
    for _ in range(max_iter):
        p, dp = wp_and_prime(a, g2, g3)
        ddp = 6.0 * p * p - 0.5 * g2
        if abs(ddp) < 1e-300:
            break
        step = (dp - dY) / ddp
        a -= step
        if abs(step) < tol * max(1.0, abs(a)):
            break
    p, dp = wp_and_prime(a, g2, g3)
    if abs(p - Y) > 1e-8 * scale or abs(dp - dY) > 1e-6 * max(1.0, abs(dp)):
        raise WeierstrassError(f"shift solve near a half-period failed: wp(a)={p}, wp'(a)={dp}")
    return a


def _newton_polish(a, Y, dY, g2, g3, tol, max_iter, scale):
    for _ in range(max_iter):
        p, dp = wp_and_prime(a, g2, g3)
        if abs(dp) < 1e-300:
            break
        step = (p - Y) / dp
        a -= step
        if not (math.isfinite(a.real) and math.isfinite(a.imag)):
            raise WeierstrassError("Newton iterate left the finite plane")
        if abs(step) < tol * max(1.0, abs(a)):
            break
    p, dp = wp_and_prime(a, g2, g3)
    if abs(dp + dY) < abs(dp - dY):
        a = -a
        p, dp = wp_and_prime(a, g2, g3)
    if abs(p - Y) > 1e-8 * scale or abs(dp - dY) > 1e-6 * max(1.0, abs(dp)):
        raise WeierstrassError(f"shift solve failed: wp(a)={p}, wp'(a)={dp}")
    return a


def real_period(g2: float, g3: float) -> float:
    return lattice(float(g2), float(g3)).real_period


def imaginary_generator(L: Lattice) -> complex:
    """Lattice vector with the smallest positive imaginary part."""
    g = 2 * L.w3 if discriminant(L.g2, L.g3) > 0 else 2 * L.w1
    return g if g.imag > 0 else -g


def real_line_offset(q: complex, L: Lattice, tol: float = 1e-9):
    """Real r with q - r in the lattice, or None if q + lattice misses the real axis."""
    g = imaginary_generator(L)
    n = round(q.imag / g.imag)
    r = q - n * g
    if abs(r.imag) > tol * max(1.0, abs(g)):
        return None
    return r.real
