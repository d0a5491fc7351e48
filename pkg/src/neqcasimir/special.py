"""Spherical Bessel/Hankel functions, Legendre functions and Wigner 3j symbols.

The array routines return all orders ``0..lmax`` at once along a trailing
axis, which is the form every partial-wave sum here wants.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction
from functools import lru_cache

import numpy as np


class SaturationWarning(RuntimeWarning):
    """A special function overflowed double precision and was saturated to inf."""


def _as_complex(z):
    return np.asarray(z, dtype=complex)


def _miller_start(lmax: int, zabs: float) -> int:
    big = max(lmax, zabs)
    return int(big + 20 + 4 * big ** (1 / 3))


def spherical_jn_array(lmax: int, z):
    """j_0..j_lmax at complex ``z`` by Miller's downward recurrence.

    The recurrence is normalized with whichever of j_0, j_1 is larger in
    modulus, so zeros of sin z do not spoil it.  Small |z| uses the same
    recurrence; the normalizing j_1 then comes from its ascending series.
    """
    z = _as_complex(z)
    shape = z.shape
    zf = z.reshape(-1)
    out = np.zeros((zf.size, lmax + 1), dtype=complex)
    zero = zf == 0
    out[zero, 0] = 1.0
    nz = ~zero
    if not np.any(nz):
        return out.reshape(shape + (lmax + 1,))
    w = zf[nz]
    L = max(lmax, 1)
    N = _miller_start(L, float(np.max(np.abs(w))))
    f_next = np.zeros_like(w)
    f = np.full_like(w, 1e-30)
    store = np.zeros((w.size, L + 1), dtype=complex)
    if N <= L:
        store[:, N] = f
    for l in range(N, 0, -1):
        f_prev = (2 * l + 1) / w * f - f_next
        f_next, f = f, f_prev
        if l - 1 <= L:
            store[:, l - 1] = f
        big = np.abs(f) > 1e200
        if np.any(big):
            s = np.where(big, np.abs(f), 1.0)
            f = f / s
            f_next = f_next / s
            store /= s[:, None]
    with np.errstate(over="ignore", invalid="ignore"):
        j0 = np.sin(w) / w
        w2 = w * w
        j1_series = w / 3 * (1 - w2 / 10 * (1 - w2 / 28 * (1 - w2 / 54 * (1 - w2 / 88))))
        j1 = np.where(np.abs(w) < 0.5, j1_series, np.sin(w) / w2 - np.cos(w) / w)
        use0 = np.abs(j0) >= np.abs(j1)
        scale = np.where(use0, j0 / store[:, 0], j1 / store[:, 1])
        res = store[:, : lmax + 1] * scale[:, None]
    if not np.all(np.isfinite(res)):
        warnings.warn("spherical Bessel function saturated", SaturationWarning, stacklevel=2)
    out[nz] = res
    return out.reshape(shape + (lmax + 1,))


def spherical_hn_array(lmax: int, z):
    """h^(1)_0..h^(1)_lmax by upward recurrence from the closed forms."""
    z = _as_complex(z)
    out = np.zeros(z.shape + (lmax + 1,), dtype=complex)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        e = np.exp(1j * z)
        out[..., 0] = -1j * e / z
        if lmax >= 1:
            out[..., 1] = -e * (z + 1j) / z**2
        for l in range(1, lmax):
            out[..., l + 1] = (2 * l + 1) / z * out[..., l] - out[..., l - 1]
    return out


def sph_bessel_j(l: int, z):
    """Spherical Bessel function j_l at complex argument."""
    if l < 0:
        raise ValueError("order must be non-negative")
    r = spherical_jn_array(l, z)[..., l]
    return r if np.ndim(r) else complex(r)


def sph_hankel_h1(l: int, z):
    """Spherical Hankel function of the first kind h_l^(1)."""
    if l < 0:
        raise ValueError("order must be non-negative")
    if np.any(np.asarray(z) == 0):
        raise ZeroDivisionError("h_l is singular at the origin")
    r = spherical_hn_array(l, z)[..., l]
    return r if np.ndim(r) else complex(r)


def riccati_derivative(kind: str, l: int, z):
    """d/dz [z f_l(z)] = z f_{l-1}(z) - l f_l(z) for f = j or h1."""
    z = _as_complex(z)
    if kind == "j":
        if l == 0:
            r = np.cos(z)
        else:
            f = spherical_jn_array(l, z)
            r = z * f[..., l - 1] - l * f[..., l]
    elif kind == "h1":
        if l == 0:
            r = np.exp(1j * z)
        else:
            f = spherical_hn_array(l, z)
            r = z * f[..., l - 1] - l * f[..., l]
    else:
        raise ValueError("kind must be 'j' or 'h1'")
    return r if np.ndim(r) else complex(r)


def psi_log_derivative(lmax: int, z):
    """D_l(z) = psi_l'(z)/psi_l(z) with psi_l = z j_l(z), for l = 0..lmax.

    Downward recurrence D_{l-1} = l/z - 1/(D_l + l/z), which is stable for
    any complex z and never overflows.
    """
    z = _as_complex(z)
    N = int(max(lmax, float(np.max(np.abs(z))) if z.size else 0.0)) + 16
    D = np.zeros_like(z)
    out = np.zeros(z.shape + (lmax + 1,), dtype=complex)
    for l in range(N, 0, -1):
        if l <= lmax:
            out[..., l] = D
        D = l / z - 1.0 / (D + l / z)
    out[..., 0] = D
    return out


# ---------------------------------------------------------------------------
# associated Legendre functions (Condon-Shortley phase)


def legendre_table(lmax: int, x):
    """P_l^m(x) and dP_l^m/dx for 0 <= m <= l <= lmax.

    ``x`` may be complex: the factor (1 - x^2)^(m/2) is continued with the
    principal square root, so x = i t gives the evanescent-wave branch.
    Returns arrays of shape ``x.shape + (lmax+1, lmax+1)`` indexed [l, m].
    """
    x = np.asarray(x)
    cplx = np.iscomplexobj(x)
    dt = complex if cplx else float
    x = x.astype(dt)
    if not cplx and np.any(np.abs(x) > 1):
        raise ValueError("real Legendre argument must lie in [-1, 1]")
    s = np.sqrt(1 - x * x)
    P = np.zeros(x.shape + (lmax + 1, lmax + 1), dtype=dt)
    pmm = np.ones_like(x)
    for m in range(lmax + 1):
        if m > 0:
            pmm = -(2 * m - 1) * s * pmm
        P[..., m, m] = pmm
        if m < lmax:
            P[..., m + 1, m] = x * (2 * m + 1) * pmm
        for l in range(m + 2, lmax + 1):
            P[..., l, m] = ((2 * l - 1) * x * P[..., l - 1, m] - (l + m - 1) * P[..., l - 2, m]) / (l - m)
    dP = np.zeros_like(P)
    with np.errstate(divide="ignore", invalid="ignore"):
        denom = (x * x - 1)[..., None]
        for l in range(1, lmax + 1):
            m = np.arange(l + 1)
            prev = np.zeros_like(P[..., l, : l + 1])
            prev[..., :l] = P[..., l - 1, :l]
            dP[..., l, : l + 1] = (l * x[..., None] * P[..., l, : l + 1] - (l + m) * prev) / denom
    return P, dP


def assoc_legendre(l: int, m: int, x):
    """Return (P_l^m(x), dP_l^m/dx); negative m via the standard reflection."""
    if l < 0 or abs(m) > l:
        raise ValueError("need |m| <= l")
    P, dP = legendre_table(l, x)
    am = abs(m)
    p, dp = P[..., l, am], dP[..., l, am]
    if m < 0:
        c = (-1) ** am * math.factorial(l - am) / math.factorial(l + am)
        p, dp = c * p, c * dp
    if np.ndim(p) == 0:
        return p[()], dp[()]
    return p, dp


# ---------------------------------------------------------------------------
# Wigner 3j symbols


@lru_cache(maxsize=None)
def _fact(n: int) -> int:
    return math.factorial(n)


@lru_cache(maxsize=200000)
def wigner3j(l1: int, l2: int, l3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3j symbol from Racah's formula in exact integer arithmetic."""
    if m1 + m2 + m3 != 0:
        return 0.0
    if any(abs(m) > l for m, l in ((m1, l1), (m2, l2), (m3, l3))):
        return 0.0
    if l3 < abs(l1 - l2) or l3 > l1 + l2:
        return 0.0
    if m1 == m2 == m3 == 0 and (l1 + l2 + l3) % 2:
        return 0.0
    kmin = max(0, l2 - l3 - m1, l1 - l3 + m2)
    kmax = min(l1 + l2 - l3, l1 - m1, l2 + m2)
    terms = []
    for k in range(kmin, kmax + 1):
        d = (
            _fact(k) * _fact(l3 - l2 + k + m1) * _fact(l3 - l1 + k - m2)
            * _fact(l1 + l2 - l3 - k) * _fact(l1 - k - m1) * _fact(l2 - k + m2)
        )
        terms.append(((-1) ** k, d))
    total = sum(Fraction(s, d) for s, d in terms)
    if total == 0:
        return 0.0
    tri = Fraction(
        _fact(l1 + l2 - l3) * _fact(l1 - l2 + l3) * _fact(-l1 + l2 + l3), _fact(l1 + l2 + l3 + 1)
    )
    rad = tri * (
        _fact(l1 + m1) * _fact(l1 - m1) * _fact(l2 + m2) * _fact(l2 - m2) * _fact(l3 + m3) * _fact(l3 - m3)
    )
    sign = -1 if (l1 - l2 - m3) % 2 else 1
    sq = total * total * rad
    val = math.sqrt(sq.numerator / sq.denominator) if sq.denominator < 10**300 else math.sqrt(float(sq))
    return float(sign * (1 if total > 0 else -1) * val)


def _three_j_A(j, l2, l3, m1):
    return np.sqrt(np.maximum((j * j - (l2 - l3) ** 2) * ((l2 + l3 + 1) ** 2 - j * j) * (j * j - m1 * m1), 0.0))


def wigner3j_first_column(l2: int, l3: int, m2, m3):
    """All (j l2 l3; -m2-m3 m2 m3) for j = jmin..l2+l3 by three-term recurrence.

    ``m2`` and ``m3`` may be integer arrays of equal shape (vectorized over m).
    Forward recursion from jmin and backward recursion from jmax are matched
    where both are large; the result is anchored to the exact value at jmax.
    Returns ``(jmin, values)`` with values of shape ``m.shape + (njmax,)``.
    """
    m2 = np.atleast_1d(np.asarray(m2, dtype=int))
    m3 = np.atleast_1d(np.asarray(m3, dtype=int))
    m1 = -(m2 + m3)
    if np.any(m1 != m1.flat[0]):
        raise ValueError("m1 must be common to all rows")
    m1s = int(m1.flat[0])
    jmin = max(abs(l2 - l3), abs(m1s))
    jmax = l2 + l3
    n = jmax - jmin + 1
    js = np.arange(jmin, jmax + 1, dtype=float)
    A = _three_j_A(np.arange(jmin, jmax + 2, dtype=float), l2, l3, m1s)  # A[j - jmin]
    Bj = -(2 * js[:, None] + 1) * (
        (l2 * (l2 + 1) - l3 * (l3 + 1)) * m1s - js[:, None] * (js[:, None] + 1) * (m3 - m2)[None, :]
    )  # shape (n, M)
    M = m2.size
    # backward from jmax
    back = np.zeros((n, M))
    back[n - 1] = 1.0
    for i in range(n - 1, 0, -1):
        j = jmin + i
        nxt = back[i + 1] if i + 1 < n else 0.0
        back[i - 1] = -(Bj[i] * back[i] + j * A[i + 1] * nxt) / ((j + 1) * A[i])
        big = np.abs(back[i - 1]) > 1e150
        if np.any(big):
            back[:, big] /= np.abs(back[i - 1][big])
    # forward from jmin
    fwd = np.zeros((n, M))
    if jmin == 0:
        fwd[0] = [wigner3j(0, l2, l3, int(a), int(b), int(c)) for a, b, c in zip(m1, m2, m3)]
        if n > 1:
            fwd[1] = [wigner3j(1, l2, l3, int(a), int(b), int(c)) for a, b, c in zip(m1, m2, m3)]
        start = 1
    else:
        fwd[0] = 1.0
        if n > 1:
            fwd[1] = -Bj[0] * fwd[0] / (jmin * A[1])
        start = 1
    for i in range(start, n - 1):
        j = jmin + i
        fwd[i + 1] = -(Bj[i] * fwd[i] + (j + 1) * A[i] * fwd[i - 1]) / (j * A[i + 1])
        big = np.abs(fwd[i + 1]) > 1e150
        if np.any(big):
            fwd[:, big] /= np.abs(fwd[i + 1][big])
    # match where both sequences are large in the classically allowed band
    out = np.empty((n, M))
    for k in range(M):
        b, f = back[:, k], fwd[:, k]
        nb, nf = np.abs(b) / max(np.abs(b).max(), 1e-300), np.abs(f) / max(np.abs(f).max(), 1e-300)
        i0 = int(np.argmax(np.minimum(nb, nf)))
        if f[i0] == 0 or b[i0] == 0:
            seq = b
        else:
            seq = np.concatenate([f[: i0 + 1] * (b[i0] / f[i0]), b[i0 + 1 :]])
        ref = wigner3j(jmax, l2, l3, int(m1[k]), int(m2[k]), int(m3[k]))
        out[:, k] = seq * (ref / seq[-1]) if seq[-1] != 0 else 0.0
    return jmin, out.T.reshape(np.shape(np.asarray(m2)) + (n,))
