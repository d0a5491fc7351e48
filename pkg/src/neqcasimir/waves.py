"""Vector partial waves, axial translation matrices and plane-to-spherical conversion.

Index conventions
-----------------
A block at fixed azimuthal number ``m`` is a ``2n x 2n`` matrix over
``(P, l)`` with ``P = M`` first, then ``P = N``, and
``l = max(1, |m|) .. lmax`` (``n`` values).  Rows carry the primed
(target) indices.  Waves of different ``m`` never mix under translations
along z, so only blocks are ever built.

``U^+`` re-expands outgoing waves about an origin shifted by ``-d z``:
``E_out(r) = sum U^+ E_reg(r + d z)``; ``U^-`` does the opposite shift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import constants as const

from .special import legendre_table, spherical_hn_array, spherical_jn_array, wigner3j_first_column

C0 = const.c
M, N = 0, 1


def coeff_a(l: int, m: int) -> float:
    """a(l, m) = m / (l (l+1))."""
    return m / (l * (l + 1))


def coeff_b(l: int, m: int) -> float:
    """b(l, m) = sqrt(l (l+2) (l-m+1) (l+m+1) / ((2l+1)(2l+3))) / (l+1)."""
    return math.sqrt(l * (l + 2) * (l - m + 1) * (l + m + 1) / ((2 * l + 1) * (2 * l + 3))) / (l + 1)


def block_ls(m: int, lmax: int) -> np.ndarray:
    """Multipole orders present in the block of azimuthal number ``m``."""
    return np.arange(max(1, abs(m)), lmax + 1)


@dataclass(frozen=True)
class TranslationBlock:
    """Axial translation (or translation-generator) matrix at fixed m."""

    kind: str
    m: int
    lmax: int
    d: float
    omega: complex
    matrix: np.ndarray

    @property
    def ls(self) -> np.ndarray:
        return block_ls(self.m, self.lmax)


@lru_cache(maxsize=8)
def _translation_tables(lmax: int):
    """Frequency-independent parts of the translation coefficients.

    For each m >= 0 returns (C, CG, phase): C[l', l, nu] collects the sign,
    the normalization root and both 3j symbols, CG additionally carries the
    (l(l+1) + l'(l'+1) - nu(nu+1))/2 factor, and phase = i^(l - l').
    The coefficients are even in m, so negative m reuse the same tables.
    """
    nnu = 2 * lmax + 1
    nus = np.arange(nnu)
    tables = {}
    for m in range(lmax + 1):
        ls = block_ls(m, lmax)
        n = ls.size
        tables[m] = (np.zeros((n, n, nnu)), np.zeros((n, n, nnu)), None)
    for l in range(1, lmax + 1):
        for lp in range(1, lmax + 1):
            mcap = min(l, lp)
            ms = np.arange(0, mcap + 1)
            jmin, wm = wigner3j_first_column(l, lp, ms, -ms)  # (nu l l'; 0 m -m)
            w0 = wm[0]
            nu = np.arange(jmin, l + lp + 1)
            norm = math.sqrt((2 * l + 1) * (2 * lp + 1) / (l * (l + 1) * lp * (lp + 1)))
            geo = (l * (l + 1) + lp * (lp + 1) - nu * (nu + 1)) / 2.0
            for m in ms:
                C, CG, _ = tables[int(m)]
                lo = max(1, int(m))
                vals = (-1) ** int(m) * (2 * nu + 1) * norm * w0 * wm[int(m)]
                C[lp - lo, l - lo, jmin : l + lp + 1] = vals
                CG[lp - lo, l - lo, jmin : l + lp + 1] = vals * geo
    for m in range(lmax + 1):
        ls = block_ls(m, lmax)
        phase = 1j ** ((ls[None, :] - ls[:, None]) % 4)
        C, CG, _ = tables[m]
        tables[m] = (C, CG, phase)
    return tables, nus


def _assemble(lmax: int, m: int, kd, radial, sign: int):
    """Build [[PP, PQ], [PQ, PP]] blocks for an array of k d values."""
    tables, nus = _translation_tables(lmax)
    C, CG, phase = tables[abs(m)]
    kd = np.asarray(kd, dtype=complex)
    rad = radial * ((1j * sign) ** (nus % 4))[None, :]
    same = np.einsum("abn,wn->wab", CG, rad) * phase
    cross = np.einsum("abn,wn->wab", C, rad) * phase
    cross = (-sign) * 1j * m * kd.reshape(-1)[:, None, None] * cross
    n = phase.shape[0]
    out = np.empty((kd.size, 2 * n, 2 * n), dtype=complex)
    out[:, :n, :n] = same
    out[:, n:, n:] = same
    out[:, :n, n:] = cross
    out[:, n:, :n] = cross
    return out.reshape(kd.shape + (2 * n, 2 * n))


def translation_u_blocks(sign: int, m: int, d: float, omega, lmax: int) -> np.ndarray:
    """U^+ (sign=+1) or U^- (sign=-1) blocks for an array of frequencies.

    ``omega`` may be complex (imaginary-axis evaluation).  Returns an array
    of shape ``omega.shape + (2n, 2n)``.
    """
    if d <= 0:
        raise ValueError("translation distance must be positive")
    kd = np.asarray(omega, dtype=complex) * d / C0
    h = spherical_hn_array(2 * lmax, kd.reshape(-1))
    out = _assemble(lmax, m, kd, h, sign)
    if not np.all(np.isfinite(out)):
        raise OverflowError("translation matrix overflow; k d too small for this lmax")
    return out


def translation_v_blocks(m: int, d: float, omega, lmax: int) -> np.ndarray:
    """Regular-to-regular translation blocks V(d) (same shift as U^+)."""
    if d < 0:
        raise ValueError("translation distance must be non-negative")
    kd = np.asarray(omega, dtype=complex) * d / C0
    j = spherical_jn_array(2 * lmax, kd.reshape(-1))
    return _assemble(lmax, m, kd, j, +1)


def translation_u(sign: str | int, m: int, d: float, omega: complex, lmax: int) -> TranslationBlock:
    s = {"+": 1, "-": -1, 1: 1, -1: -1}[sign]
    mat = translation_u_blocks(s, m, d, np.asarray([omega]), lmax)[0]
    return TranslationBlock("U+" if s > 0 else "U-", m, lmax, d, omega, mat)


def translation_v(m: int, d: float, omega: complex, lmax: int) -> TranslationBlock:
    mat = translation_v_blocks(m, d, np.asarray([omega]), lmax)[0]
    return TranslationBlock("V", m, lmax, d, omega, mat)


@lru_cache(maxsize=256)
def _pz_unit(m: int, lmax: int) -> np.ndarray:
    ls = block_ls(m, lmax)
    n = ls.size
    pz = np.zeros((2 * n, 2 * n), dtype=complex)  # p_z in units of w/c
    for i, l in enumerate(ls):
        a = coeff_a(l, m)
        pz[i, n + i] = 1j * a
        pz[n + i, i] = 1j * a
        if i + 1 < n:  # row l' = l + 1, column l
            b = coeff_b(l, m)
            for off in (0, n):
                pz[off + i + 1, off + i] = -b
                pz[off + i, off + i + 1] = b  # row l', column l' + 1: +b(l', m)
    return pz


def pz_matrix(m: int, omega, lmax: int) -> np.ndarray:
    """Generator p_z of axial translations, d/dd U^+(d) = -p_z U^+(d)."""
    k = np.asarray(omega, dtype=complex) / C0
    return k[..., None, None] * _pz_unit(m, lmax)


def pz_block(m: int, omega: complex, lmax: int) -> TranslationBlock:
    return TranslationBlock("pz", m, lmax, 0.0, omega, pz_matrix(m, omega, lmax))


# ---------------------------------------------------------------------------
# plane-to-spherical conversion


def _sqrt_sign_power(m):
    """Principal sqrt((-1)^m): 1 for even m, i for odd m."""
    return np.where(np.asarray(m) % 2 == 0, 1.0 + 0j, 1j)


def conversion_d_table(lmax: int, k_perp, omega, k_z=None):
    """Conversion coefficients D_{l m P' P} with azimuth Phi = 0.

    Returns ``(D_same, D_cross)`` each of shape ``k_perp.shape + (lmax, 2 lmax + 1)``
    indexed ``[..., l - 1, m + lmax]``.  ``D_same`` is D_MM = D_NN and
    ``D_cross`` is D_NM = D_MN.  Entries with |m| > l are zero.

    The root sqrt((-1)^m) is taken on the principal branch; the dipole sum
    rules and the plane-wave expansion check hold with this choice.
    ``k_z`` may be passed explicitly (i kappa for evanescent waves) to
    avoid cancellation near the light line.
    """
    kp = np.asarray(k_perp, dtype=float)
    w = complex(omega) if np.ndim(omega) == 0 else np.asarray(omega, dtype=complex)
    k0 = w / C0
    kz = np.sqrt(k0 * k0 - kp * kp + 0j) if k_z is None else np.asarray(k_z, dtype=complex)
    if np.any(kz == 0):
        raise ValueError("grazing incidence k_perp = omega/c is singular")
    x = kz / k0
    P, dP = legendre_table(lmax, x.astype(complex))
    ls = np.arange(1, lmax + 1)
    ms = np.arange(-lmax, lmax + 1)
    shape = kp.shape + (lmax, 2 * lmax + 1)
    D_same = np.zeros(shape, dtype=complex)
    D_cross = np.zeros(shape, dtype=complex)
    sk = np.sqrt(kz)
    for l in ls:
        for m in range(-l, l + 1):
            am = abs(m)
            refl = 1.0 if m >= 0 else (-1) ** am * math.exp(math.lgamma(l - am + 1) - math.lgamma(l + am + 1))
            p = refl * P[..., l, am]
            dp = refl * dP[..., l, am]
            norm = math.sqrt(
                4 * math.pi * (2 * l + 1) / (l * (l + 1)) * math.exp(math.lgamma(l - m + 1) - math.lgamma(l + m + 1))
            )
            ph = 1j ** ((l + 1) % 4) / _sqrt_sign_power(m)
            D_same[..., l - 1, m + lmax] = -ph * norm * np.sqrt(1 / k0) * kp / sk * dp
            with np.errstate(divide="ignore", invalid="ignore"):
                cross = m * ph * norm * (k0 / kp) * np.sqrt(k0 / kz) * p
            D_cross[..., l - 1, m + lmax] = np.where(kp == 0, 0.0, cross) if m != 0 else 0.0
    return D_same, D_cross


def conversion_d(l: int, m: int, Pp: str, P: str, k_perp: float, omega: float) -> complex:
    same, cross = conversion_d_table(l, np.asarray(k_perp), omega)
    tbl = same if Pp == P else cross
    return complex(tbl[..., l - 1, m + l])


# ---------------------------------------------------------------------------
# wave functions


def _to_spherical(points):
    p = np.asarray(points, dtype=float)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.where(r > 0, np.arccos(np.clip(z / np.where(r > 0, r, 1.0), -1, 1)), 0.0)
    phi = np.arctan2(y, x)
    return r, theta, phi


def _unit_vectors(theta, phi):
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    rhat = np.stack([st * cp, st * sp, ct], -1)
    that = np.stack([ct * cp, ct * sp, -st], -1)
    phat = np.stack([-sp, cp, np.zeros_like(sp)], -1)
    return rhat, that, phat


def spherical_waves(lmax: int, omega: float, points, kind: str = "reg") -> np.ndarray:
    """All spherical vector waves E_{P l m} at the given Cartesian points.

    Returns shape ``points.shape[:-1] + (2, lmax, 2 lmax + 1, 3)`` indexed
    ``[..., P, l - 1, m + lmax, xyz]``; entries with |m| > l are zero.
    Spherical harmonics follow the Condon-Shortley convention.
    """
    k = omega / C0
    r, theta, phi = _to_spherical(points)
    if kind == "out" and np.any(r == 0):
        raise ValueError("outgoing waves are singular at the origin")
    rhat, that, phat = _unit_vectors(theta, phi)
    kr = k * r
    if kind == "reg":
        f = spherical_jn_array(lmax + 1, kr)
    elif kind == "out":
        f = spherical_hn_array(lmax + 1, kr)
    else:
        raise ValueError("kind must be 'reg' or 'out'")
    ct = np.cos(theta)
    st = np.sin(theta)
    P, dP = legendre_table(lmax, ct)
    shape = r.shape + (2, lmax, 2 * lmax + 1, 3)
    out = np.zeros(shape, dtype=complex)
    for l in range(1, lmax + 1):
        fl = f[..., l]
        dfl = kr * f[..., l - 1] - l * fl  # d/d(kr) [kr f_l]
        with np.errstate(divide="ignore", invalid="ignore"):
            radial_n = np.where(kr == 0, 0.0, fl / kr) if kind == "reg" else fl / kr
            deriv_n = np.where(kr == 0, (2.0 / 3.0 if l == 1 else 0.0), dfl / kr) if kind == "reg" else dfl / kr
        for m in range(-l, l + 1):
            am = abs(m)
            norm = math.sqrt((2 * l + 1) / (4 * math.pi) * math.exp(math.lgamma(l - am + 1) - math.lgamma(l + am + 1)))
            p = P[..., l, am]
            dp_dtheta = -st * dP[..., l, am]
            with np.errstate(divide="ignore", invalid="ignore"):
                im_over_sin = np.where(st == 0, 0.0, 1j * am * p / st)
            if m < 0:
                sgn = (-1) ** am
                Y = sgn * norm * p * np.exp(1j * m * phi)
                dY = sgn * norm * dp_dtheta * np.exp(1j * m * phi)
                imY_sin = -sgn * norm * im_over_sin * np.exp(1j * m * phi)
            else:
                Y = norm * p * np.exp(1j * m * phi)
                dY = norm * dp_dtheta * np.exp(1j * m * phi)
                imY_sin = norm * im_over_sin * np.exp(1j * m * phi)
            pref = np.sqrt(complex((-1) ** am * k)) / math.sqrt(l * (l + 1))
            Mv = pref * fl[..., None] * (imY_sin[..., None] * that - dY[..., None] * phat)
            Nv = pref * (
                (l * (l + 1) * radial_n * Y)[..., None] * rhat
                + (deriv_n)[..., None] * (dY[..., None] * that + imY_sin[..., None] * phat)
            )
            out[..., M, l - 1, m + lmax, :] = Mv
            out[..., N, l - 1, m + lmax, :] = Nv
    return out


def plane_wave_out(P: str, k_perp_vec, omega: float, points) -> np.ndarray:
    """Right-moving outgoing plane wave E^out_{R,P,k_perp} (defined for z >= 0)."""
    kx, ky = float(k_perp_vec[0]), float(k_perp_vec[1])
    k0 = omega / C0
    kp = math.hypot(kx, ky)
    kz = np.sqrt(complex(k0 * k0 - kp * kp))
    pts = np.asarray(points, dtype=float)
    phase = np.exp(1j * (kx * pts[..., 0] + ky * pts[..., 1] + kz * pts[..., 2]))
    pref = 2.0 / (2.0 * np.sqrt(kz) * kp)
    if P == "M":
        vec = 1j * np.array([ky, -kx, 0.0])
    else:
        vec = (1.0 / k0) * np.array([-kx * kz, -ky * kz, kp * kp])
    out = pref * phase[..., None] * vec
    return np.where((pts[..., 2] >= 0)[..., None], out, 0.0)


def wave_eval(basis: str, kind: str, index, point, omega: float) -> np.ndarray:
    """Evaluate one basis wave at one point.

    ``basis='spherical'``: index = (P, l, m) with P in {'M', 'N'}.
    ``basis='plane'``: index = ('R', P, (kx, ky)); outgoing right-movers only.
    """
    point = np.asarray(point, dtype=float)
    if basis == "spherical":
        P, l, m = index
        E = spherical_waves(l, omega, point, kind)
        return E[{"M": 0, "N": 1}[P], l - 1, m + l]
    if basis == "plane":
        j, P, kvec = index
        if j != "R" or kind != "out":
            raise ValueError("only right-moving outgoing plane waves are implemented")
        return plane_wave_out(P, kvec, omega, point)
    raise ValueError("basis must be 'spherical' or 'plane'")


# ---------------------------------------------------------------------------
# free Green's function


def green_oracle(r, rp, omega: float) -> np.ndarray:
    """Closed form (1 + grad grad c^2/w^2) exp(i w |r - r'|/c) / (4 pi |r - r'|)."""
    k = omega / C0
    R = np.asarray(r, dtype=float) - np.asarray(rp, dtype=float)
    dist = np.linalg.norm(R)
    if dist == 0:
        raise ValueError("Green's function is singular at coincident points")
    u = R / dist
    x = k * dist
    g = np.exp(1j * x) / (4 * np.pi * dist)
    a = 1 + 1j / x - 1 / x**2
    b = -1 - 3j / x + 3 / x**2
    return g * (a * np.eye(3) + b * np.outer(u, u))


def green_partial_waves(r, rp, omega: float, lmax: int) -> np.ndarray:
    """Single-origin expansion i sum E_out(r>) (x) E_reg_{sigma}(r<)."""
    r = np.asarray(r, dtype=float)
    rp = np.asarray(rp, dtype=float)
    swap = np.linalg.norm(r) < np.linalg.norm(rp)
    big, small = (rp, r) if swap else (r, rp)
    Eo = spherical_waves(lmax, omega, big, "out")
    Er = spherical_waves(lmax, omega, small, "reg")[:, :, ::-1, :]  # m -> -m
    G = 1j * np.einsum("plmi,plmj->ij", Eo, Er)
    return G.T if swap else G


def green_two_origins(r2, r1, omega: float, d: float, lmax: int) -> np.ndarray:
    """G0(x2, x1) with x2 near origin O2 = O1 - d z and x1 near O1.

    ``r2``, ``r1`` are positions relative to their own origins; uses
    G0 = i sum U^21 E_reg(r2) (x) E_reg_sigma(r1) with U^21 = U^+.
    """
    E2 = spherical_waves(lmax, omega, r2, "reg")
    E1 = spherical_waves(lmax, omega, r1, "reg")
    G = np.zeros((3, 3), dtype=complex)
    for m in range(-lmax, lmax + 1):
        ls = block_ls(m, lmax)
        U = translation_u_blocks(+1, m, d, np.asarray([omega]), lmax)[0]
        a = np.concatenate([E2[M, ls - 1, m + lmax], E2[N, ls - 1, m + lmax]])  # (2n, 3), primed
        b = np.concatenate([E1[M, ls - 1, -m + lmax], E1[N, ls - 1, -m + lmax]])
        G += 1j * np.einsum("ab,ai,bj->ij", U, a, b)
    return G
