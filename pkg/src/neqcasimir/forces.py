"""Non-equilibrium Casimir forces on a sphere near another sphere or a plate.

Sign convention: a positive force points toward the other body
(attraction).  For two spheres the force acts on sphere 2, located at
``-d z`` relative to sphere 1; for a sphere above a plate it acts on the
sphere.  Every thermal term is written as ``int n(w, T) K(w) dw`` with a
kernel ``K`` that does not depend on temperature, so that differences
between a body temperature and the environment are taken under one
integral.

Channel factors ``X = Re T + |T|^2`` are non-positive for passive bodies.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .materials import HBAR, KB, InsulatorExpansion, bose_occupation, insulator_expansion, thermal_wavelength
from .quadrature import adaptive_gk, thermal_window
from .radiation import material_breakpoints
from .scattering import C0, ValidityWarning, _response, fresnel_arrays, mie_arrays
from .transfer import (
    ConditioningError,
    ConfigError,
    SpherePlate,
    SphereSphere,
    TruncationError,
    TwoBodyConfig,
    _block_vector,
    _seed_lmax,
)
from .waves import _pz_unit, conversion_d_table, translation_u_blocks

# ---------------------------------------------------------------------------
# results


@dataclass
class ForceBreakdown:
    """Force on the sphere (sphere-plate) or on sphere 2 (sphere-sphere), in N.

    ``F_interaction_from_other`` and ``F_self`` hold the bracketed
    differences F(T_body) - F(T_env); positive means attraction.
    """

    F_interaction_from_other: float
    F_self: float
    F_equilibrium: float
    F_total: float
    method: str = "one_reflection"
    components: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# frequency integration


def _n_weight(w, Ta: float, Tb: float = 0.0):
    return bose_occupation(Ta, w) - bose_occupation(Tb, w)


def thermal_integral(
    kernel: Callable[[np.ndarray], np.ndarray],
    Ta: float,
    Tb: float = 0.0,
    materials=(),
    *,
    rtol: float = 1e-6,
    max_panels: int = 4000,
) -> float:
    """int [n(w, Ta) - n(w, Tb)] kernel(w) dw over the thermal window.

    Kernels with strong cancellation (oscillating self terms) get an
    absolute floor from a coarse pass over |integrand|.
    """
    if Ta == Tb:
        return 0.0
    window = thermal_window([Ta, Tb])
    pts = material_breakpoints(*materials, window=window)

    def fun(w):
        return _n_weight(w, Ta, Tb) * np.asarray(kernel(w))

    coarse = adaptive_gk(lambda w: np.abs(fun(w)), *window, points=pts, rtol=1e-2, max_panels=400, initial=8)
    atol = rtol * float(coarse.value)
    res = adaptive_gk(fun, *window, points=pts, rtol=rtol, atol=atol, max_panels=max_panels, initial=8)
    if not res.converged:
        warnings.warn("frequency integral did not reach its tolerance", RuntimeWarning, stacklevel=2)
    return float(res.value)


def _mie(material, mu, w, R, L):
    TM, TN = mie_arrays(_response(material, w), _response(mu, w), np.asarray(w) * R / C0, L)
    return np.stack([TM, TN], axis=-2)  # (W, 2, L)


def _padded(T):
    """Append a zero multipole order: p_z couples l to l +- 1, so products
    such as p_z U need one extra intermediate order to be exact."""
    return np.concatenate([T, np.zeros(T.shape[:-1] + (1,), dtype=T.dtype)], axis=-1)


def _one_reflection_guard(R_over_d: float) -> list[str]:
    if R_over_d > 0.3:
        msg = f"one-reflection formula used at R/d = {R_over_d:.2f}"
        warnings.warn(msg, ValidityWarning, stacklevel=3)
        return [msg]
    return []


def _dipole_guard(R: float, d: float, temps) -> list[str]:
    lam = thermal_wavelength(max(t for t in temps if t > 0)) if any(t > 0 for t in temps) else math.inf
    if R > 0.1 * min(d, lam):
        msg = "dipole formula used with R not small against min(d, lambda_T)"
        warnings.warn(msg, ValidityWarning, stacklevel=3)
        return [msg]
    return []


# ---------------------------------------------------------------------------
# sphere-sphere, general multipole order


def ss_interaction_kernel(geo: SphereSphere, omega, L: int) -> np.ndarray:
    """Kernel of the force on sphere 2 sourced by sphere 1.

    (2 hbar/pi) sum_m Im Tr[(T2^+ p_z + T2^+ p_z T2) C] with the incident
    correlation C = U^+ diag(X1) U^+^dagger.
    """
    w = np.asarray(omega, dtype=float)
    T1 = _padded(_mie(geo.material1, geo.mu1, w, geo.R1, L))
    T2 = _padded(_mie(geo.material2, geo.mu2, w, geo.R2, L))
    X1 = T1.real + np.abs(T1) ** 2
    k = w / C0
    Lx = L + 1
    out = np.zeros(w.shape)
    for m in range(L + 1):
        U = translation_u_blocks(+1, m, geo.d, w, Lx)
        x1 = _block_vector(X1, m, Lx)
        t2 = _block_vector(T2, m, Lx)
        B = U * np.sqrt(-x1 + 0j)[:, None, :]
        C = -np.einsum("wij,wkj->wik", B, B.conj())
        P = k[:, None, None] * _pz_unit(m, Lx)[None]
        left = t2.conj()[:, :, None] * (P + P * t2[:, None, :])  # T2^+ p + T2^+ p T2
        val = np.einsum("wij,wji->w", left, C).imag
        out += val if m == 0 else 2 * val
    return 2 * HBAR / np.pi * out


def ss_self_kernel(geo: SphereSphere, omega, L: int) -> np.ndarray:
    """Kernel of the force on sphere 2 sourced by its own fluctuations.

    (2 hbar/pi) sum_m sum_mu X2_mu Im[(p_z U^+ T1 U^-)_{mu mu}].
    """
    w = np.asarray(omega, dtype=float)
    T1 = _padded(_mie(geo.material1, geo.mu1, w, geo.R1, L))
    T2 = _padded(_mie(geo.material2, geo.mu2, w, geo.R2, L))
    X2 = T2.real + np.abs(T2) ** 2
    k = w / C0
    Lx = L + 1
    out = np.zeros(w.shape)
    for m in range(L + 1):
        Up = translation_u_blocks(+1, m, geo.d, w, Lx)
        Um = translation_u_blocks(-1, m, geo.d, w, Lx)
        t1 = _block_vector(T1, m, Lx)
        x2 = _block_vector(X2, m, Lx)
        P = k[:, None, None] * _pz_unit(m, Lx)[None]
        Q = np.einsum("wij,wjk->wik", P, Up) * t1[:, None, :]
        diag = np.einsum("wij,wji->wi", Q, Um)
        val = (x2 * diag.imag).sum(axis=1)
        out += val if m == 0 else 2 * val
    return 2 * HBAR / np.pi * out


# ---------------------------------------------------------------------------
# sphere-sphere, dipole closed forms


def ss_interaction_kernel_dipole(geo: SphereSphere, omega) -> np.ndarray:
    """Dipole-order kernel of the force on sphere 2 from sphere 1's radiation."""
    w = np.asarray(omega, dtype=float)
    T1 = _mie(geo.material1, geo.mu1, w, geo.R1, 1)[..., 0]
    T2 = _mie(geo.material2, geo.mu2, w, geo.R2, 1)[..., 0]
    X1 = T1.real + np.abs(T1) ** 2
    y = C0 / (w * geo.d)
    cross = T2 * T2[:, ::-1].conj()  # T^P T^{Pbar *}
    acc = np.zeros(w.shape)
    for P in range(2):
        for Pp in range(2):
            same = P == Pp
            t = 9 * y**2 * (T2[:, Pp].real + (cross[:, P].real if same else 0.0))
            t = t + T2[:, Pp].imag * (9 * y**3 + (81 * y**7 if same else 0.0))
            t = t + (T2[:, Pp].imag - (0.5 * cross[:, P].imag if same else 0.0)) * 18 * y**5
            acc += X1[:, P] * t
    return -HBAR / (C0 * np.pi) * w * acc


def ss_self_kernel_dipole(geo: SphereSphere, omega) -> np.ndarray:
    """Dipole-order kernel of the self force on sphere 2 (oscillating in d)."""
    w = np.asarray(omega, dtype=float)
    T1 = _mie(geo.material1, geo.mu1, w, geo.R1, 1)[..., 0]
    T2 = _mie(geo.material2, geo.mu2, w, geo.R2, 1)[..., 0]
    X2 = T2.real + np.abs(T2) ** 2
    y = C0 / (w * geo.d)
    phase = np.exp(2j * w * geo.d / C0)
    acc = np.zeros(w.shape)
    for P in range(2):
        a, b = T1[:, P], T1[:, 1 - P]
        br = (
            (a - b) * (9 * y**2 + 27j * y**3)
            - (a - b / 2) * 72 * y**4
            - (a - b / 8) * 144j * y**5
            + a * (162 * y**6 + 81j * y**7)
        )
        acc += X2[:, P] * (br * phase).real
    return HBAR / (C0 * np.pi) * w * acc


# ---------------------------------------------------------------------------
# sphere-plate helpers


def _prop_nodes(k0d_max: float, n: int = 12):
    """Nodes s = k_z/k0 in (0, 1] with weights for s ds; panels resolve e^{2 i s k0 d}."""
    edges = [0.0, 1 / 256, 1 / 64, 1 / 16, 1 / 4, 1.0]
    n_osc = int(math.ceil(2 * k0d_max / (math.pi / 2)))
    if n_osc > 4:
        edges = sorted(set(edges[:-1] + list(np.linspace(0.0, 1.0, n_osc + 1))))
    t, wt = np.polynomial.legendre.leggauss(n)
    e = np.asarray(edges)
    a, b = e[:-1], e[1:]
    s = ((a + b) / 2)[:, None] + ((b - a) / 2)[:, None] * t[None, :]
    ws = ((b - a) / 2)[:, None] * wt[None, :]
    s, ws = s.ravel(), ws.ravel()
    return s, ws * s


def _ev_nodes(n: int = 12, cutoff: float = 40.0):
    """Nodes u = kappa d in (0, cutoff] with weights for u du."""
    edges = np.array([0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.6, 1.5, 3.0, 6.0, 12.0, 20.0, cutoff])
    t, wt = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1], edges[1:]
    u = ((a + b) / 2)[:, None] + ((b - a) / 2)[:, None] * t[None, :]
    wu = ((b - a) / 2)[:, None] * wt[None, :]
    u, wu = u.ravel(), wu.ravel()
    return u, wu * u


def _plate_r(geo: SpherePlate, w, kp, kz):
    eps = _response(geo.plate, w)[:, None]
    mu = _response(geo.mu_plate, w)[:, None]
    rM, rN = fresnel_arrays(eps, mu, kp, w[:, None], kz)
    return np.stack([rM, rN], axis=-1)  # (W, K, P)


def _sp_grids(geo: SpherePlate, w, n: int = 12, oscillatory: bool = False):
    """Propagating and evanescent (k_perp, k_z, d^2k/(2 pi)^2 weight) grids per frequency."""
    k0 = w / C0
    s, ws = _prop_nodes(float(k0.max() * geo.d) if oscillatory else 0.0, n)
    kz_pr = k0[:, None] * s[None, :]
    kp_pr = k0[:, None] * np.sqrt(np.clip(1 - s * s, 0, None))[None, :]
    wt_pr = k0[:, None] ** 2 * ws[None, :] / (2 * np.pi)
    u, wu = _ev_nodes(n)
    kap = np.broadcast_to(u[None, :] / geo.d, (w.size, u.size))
    kp_ev = np.sqrt(k0[:, None] ** 2 + kap**2)
    wt_ev = np.broadcast_to(wu[None, :] / (2 * np.pi * geo.d**2), kap.shape)
    return (kp_pr, kz_pr.astype(complex), wt_pr), (kp_ev, 1j * kap, wt_ev)


# ---------------------------------------------------------------------------
# sphere-plate, general multipole order


def sp_interaction_kernel(geo: SpherePlate, omega, L: int, n: int = 12) -> np.ndarray:
    """Propagating and evanescent kernels (W, 2) of the force on the sphere from plate radiation.

    The plate radiation reaching the sphere has the regular-wave
    correlation C = (c/w)^2 (1/2) int d^2k/(2 pi)^2 sum_P rho_P D_P D_P^dagger with
    rho_P = (1 - |r_P|^2)/2 (propagating) or Im r_P e^{-2 kappa d}
    (evanescent); the force kernel is (2 hbar/pi) Im Tr[(T^+ p_z + T^+ p_z T) C].
    """
    w = np.asarray(omega, dtype=float)
    T = _padded(_mie(geo.sphere, geo.mu_sphere, w, geo.R, L))
    k = w / C0
    Lx = L + 1
    out = np.zeros(w.shape + (2,))
    for part, (kp, kz, wt) in enumerate(_sp_grids(geo, w, n)):
        r = _plate_r(geo, w, kp, kz)
        if part == 0:
            rho = (1 - np.abs(r) ** 2) / 2
        else:
            rho = r.imag * np.exp(-2 * kz.imag * geo.d)[..., None]
        Ds, Dc = conversion_d_table(Lx, kp, w[:, None], kz)  # (W, K, Lx, 2Lx+1)
        for m in range(-L, L + 1):
            lo = max(1, abs(m)) - 1
            ds = Ds[..., lo:, m + Lx]
            dc = Dc[..., lo:, m + Lx]
            # columns P = M, N; rows (P', l): D_{l m P' P}
            Dm = np.concatenate([np.stack([ds, dc], axis=-1), np.stack([dc, ds], axis=-1)], axis=-2)
            C = np.einsum("wkip,wkp,wkjp,wk->wij", Dm, rho, Dm.conj(), wt) * (0.5 / k**2)[:, None, None]
            t = np.concatenate([T[:, 0, lo:], T[:, 1, lo:]], axis=-1)
            P = k[:, None, None] * _pz_unit(m, Lx)[None]
            left = t.conj()[:, :, None] * (P + P * t[:, None, :])
            out[:, part] += np.einsum("wij,wji->w", left, C).imag
    return 2 * HBAR / np.pi * out


def sp_self_kernel(geo: SpherePlate, omega, L: int, n: int = 12) -> np.ndarray:
    """Kernel of the self force on the sphere from its own radiation reflected by the plate.

    -(hbar/(c pi)) w sum X_{P l} (c/w)^3 int d^2k/(2 pi)^2 |k_z| Re[g r^{P'} e^{2 i k_z d} |D_{l m P P'}|^2]
    with g = (-1)^{m+l}(1 - 2 delta_{P P'}) for propagating and 1 for evanescent waves.
    """
    w = np.asarray(omega, dtype=float)
    T = _mie(geo.sphere, geo.mu_sphere, w, geo.R, L)
    X = T.real + np.abs(T) ** 2  # (W, 2, L)
    ls = np.arange(1, L + 1)
    ms = np.arange(-L, L + 1)
    sign_lm = (-1.0) ** (ls[:, None] + ms[None, :])  # (L, 2L+1)
    acc = np.zeros(w.shape)
    for part, (kp, kz, wt) in enumerate(_sp_grids(geo, w, n, oscillatory=True)):
        r = _plate_r(geo, w, kp, kz)  # (W, K, P')
        ph = np.exp(2j * kz * geo.d)
        Ds, Dc = conversion_d_table(L, kp, w[:, None], kz)
        if part == 0:
            Ss = -(np.abs(Ds) ** 2 * sign_lm).sum(axis=-1)  # P = P'
            Sc = (np.abs(Dc) ** 2 * sign_lm).sum(axis=-1)
        else:
            Ss = (np.abs(Ds) ** 2).sum(axis=-1)
            Sc = (np.abs(Dc) ** 2).sum(axis=-1)
        base = np.abs(kz) * wt  # (W, K)
        for P in range(2):
            same = (r[..., P] * ph)[..., None] * Ss  # (W, K, L)
            other = (r[..., 1 - P] * ph)[..., None] * Sc
            acc += np.einsum("wkl,wk,wl->w", (same + other).real, base, X[:, P, :])
    return -HBAR / (C0 * np.pi) * w * (C0 / w) ** 3 * acc


# ---------------------------------------------------------------------------
# sphere-plate, dipole closed forms


def sp_interaction_kernel_dipole(geo: SpherePlate, omega, n: int = 12) -> np.ndarray:
    """(3 hbar/(2 c pi)) w (f_pr, f_ev) per frequency, shape (W, 2)."""
    w = np.asarray(omega, dtype=float)
    T = _mie(geo.sphere, geo.mu_sphere, w, geo.R, 1)[..., 0]  # (W, P)
    cross = T * T[:, ::-1].conj()
    (kp, kz, _), (kpe, kze, _) = _sp_grids(geo, w, n)
    k0 = w / C0
    s, ws = _prop_nodes(0.0, n)
    r = _plate_r(geo, w, kp, kz)
    absr = 1 - np.abs(r) ** 2  # (W, K, P)
    fpr = np.zeros(w.shape)
    for P in range(2):
        for Pp in range(2):
            tt = T[:, Pp].real + (cross[:, P].real if P == Pp else 0.0)
            fpr += (absr[..., P] * ws[None, :]).sum(axis=1) * tt
    u, wu = _ev_nodes(n)
    re = _plate_r(geo, w, kpe, kze)
    kap = kze.imag
    kpc2 = (kpe / k0[:, None]) ** 2
    damp = np.exp(-2 * kap * geo.d)
    fev = np.zeros(w.shape)
    for P in range(2):
        inner = re[..., P].imag * ((2 * kpc2 - 1) * T[:, P].imag[:, None] - cross[:, P].imag[:, None])
        inner = inner + re[..., 1 - P].imag * T[:, P].imag[:, None]
        fev += 2 * (inner * damp * wu[None, :]).sum(axis=1) / (geo.d * k0) ** 2
    return 1.5 * HBAR / (C0 * np.pi) * w[:, None] * np.stack([fpr, fev], axis=-1)


def sp_self_kernel_dipole(geo: SpherePlate, omega, n: int = 12) -> np.ndarray:
    """Dipole-order kernel of the sphere self force near a plate."""
    w = np.asarray(omega, dtype=float)
    T = _mie(geo.sphere, geo.mu_sphere, w, geo.R, 1)[..., 0]
    X = T.real + np.abs(T) ** 2
    k0 = w / C0
    (kp, kz, wt), (kpe, kze, wte) = _sp_grids(geo, w, n, oscillatory=True)
    acc = np.zeros(w.shape)
    for kpp, kzz, wtt in ((kp, kz, wt), (kpe, kze, wte)):
        r = _plate_r(geo, w, kpp, kzz)
        ph = np.exp(2j * kzz * geo.d)
        kpc2 = (kpp / k0[:, None]) ** 2
        # wtt carries d^2k/(2 pi)^2 = k dk/(2 pi)
        for P in range(2):
            br = (ph * (r[..., P] * (2 * kpc2 - 1) + r[..., 1 - P])).real
            acc += X[:, P] * (br * wtt).sum(axis=1) * 2 * np.pi
    return -3 * HBAR * C0 / np.pi * acc / w


# ---------------------------------------------------------------------------
# public force terms


def _ss_geo(cfg: TwoBodyConfig) -> SphereSphere:
    if not isinstance(cfg.geometry, SphereSphere):
        raise ConfigError("expected a SphereSphere geometry")
    cfg.validate()
    return cfg.geometry


def _sp_geo(cfg: TwoBodyConfig) -> SpherePlate:
    if not isinstance(cfg.geometry, SpherePlate):
        raise ConfigError("expected a SpherePlate geometry")
    cfg.validate()
    return cfg.geometry


def _ss_lmax(geo: SphereSphere, temps, l_max):
    if l_max is not None:
        return l_max
    return max(2, _seed_lmax(max(geo.R1, geo.R2), geo.d - geo.R1 - geo.R2, temps) // 4)


def sphere_sphere_force_interaction(
    cfg: TwoBodyConfig, l_max: int | None = None, *, T: float | None = None, T_ref: float = 0.0, rtol: float = 1e-6
) -> float:
    """Force on sphere 2 from sphere 1's radiation at T (default T1) minus that at T_ref."""
    geo = _ss_geo(cfg)
    T = cfg.T1 if T is None else T
    _one_reflection_guard(max(geo.R1, geo.R2) / geo.d)
    L = _ss_lmax(geo, [T, T_ref, cfg.T2], l_max)
    return thermal_integral(lambda w: ss_interaction_kernel(geo, w, L), T, T_ref, [geo.material1, geo.material2], rtol=rtol)


def sphere_sphere_force_self(
    cfg: TwoBodyConfig, l_max: int | None = None, *, T: float | None = None, T_ref: float = 0.0, rtol: float = 1e-6
) -> float:
    """Force on sphere 2 from its own radiation at T (default T2) minus that at T_ref."""
    geo = _ss_geo(cfg)
    T = cfg.T2 if T is None else T
    _one_reflection_guard(max(geo.R1, geo.R2) / geo.d)
    L = _ss_lmax(geo, [T, T_ref, cfg.T1], l_max)
    return thermal_integral(lambda w: ss_self_kernel(geo, w, L), T, T_ref, [geo.material1, geo.material2], rtol=rtol)


def sphere_sphere_force_dipole(
    term: str, cfg: TwoBodyConfig, *, T: float | None = None, T_ref: float = 0.0, rtol: float = 1e-7
) -> float:
    """Dipole closed forms: ``term='interaction'`` (source sphere 1) or ``'self'`` (source sphere 2)."""
    geo = _ss_geo(cfg)
    if term == "interaction":
        T = cfg.T1 if T is None else T
        kern = lambda w: ss_interaction_kernel_dipole(geo, w)  # noqa: E731
    elif term == "self":
        T = cfg.T2 if T is None else T
        kern = lambda w: ss_self_kernel_dipole(geo, w)  # noqa: E731
    else:
        raise ValueError("term must be 'interaction' or 'self'")
    _dipole_guard(max(geo.R1, geo.R2), geo.d, [T, T_ref])
    return thermal_integral(kern, T, T_ref, [geo.material1, geo.material2], rtol=rtol)


def sphere_plate_force_interaction(
    cfg: TwoBodyConfig,
    l_max: int | None = 1,
    *,
    T: float | None = None,
    T_ref: float = 0.0,
    dipole: bool = False,
    split: bool = False,
    rtol: float = 1e-6,
):
    """Force on the sphere from the plate's radiation at T (default T2) minus that at T_ref.

    ``dipole=True`` uses the closed dipole kernels.  With ``split=True`` the
    propagating and evanescent parts are returned as a pair.
    """
    geo = _sp_geo(cfg)
    T = cfg.T2 if T is None else T
    if dipole:
        _dipole_guard(geo.R, geo.d, [T, T_ref])
        kern = lambda w: sp_interaction_kernel_dipole(geo, w)  # noqa: E731
    else:
        _one_reflection_guard(geo.R / geo.d)
        L = l_max or 1
        kern = lambda w: sp_interaction_kernel(geo, w, L)  # noqa: E731
    mats = [geo.sphere, geo.plate]
    if split:
        pr = thermal_integral(lambda w: kern(w)[:, 0], T, T_ref, mats, rtol=rtol)
        ev = thermal_integral(lambda w: kern(w)[:, 1], T, T_ref, mats, rtol=rtol)
        return pr, ev
    return thermal_integral(lambda w: kern(w).sum(axis=1), T, T_ref, mats, rtol=rtol)


def sphere_plate_force_self(
    cfg: TwoBodyConfig,
    l_max: int | None = 1,
    *,
    T: float | None = None,
    T_ref: float = 0.0,
    dipole: bool = False,
    rtol: float = 1e-6,
) -> float:
    """Force on the sphere from its own radiation at T (default T1) minus that at T_ref."""
    geo = _sp_geo(cfg)
    T = cfg.T1 if T is None else T
    if dipole:
        _dipole_guard(geo.R, geo.d, [T, T_ref])
        kern = lambda w: sp_self_kernel_dipole(geo, w)  # noqa: E731
    else:
        _one_reflection_guard(geo.R / geo.d)
        L = l_max or 1
        kern = lambda w: sp_self_kernel(geo, w, L)  # noqa: E731
    return thermal_integral(kern, T, T_ref, [geo.sphere, geo.plate], rtol=rtol)


# ---------------------------------------------------------------------------
# low-temperature closed forms for insulators


def _expansion(material, R, given: InsulatorExpansion | None) -> InsulatorExpansion:
    return given if given is not None else insulator_expansion(material, R)


def _low_t_guard(lam_T: float, R: float, exp: InsulatorExpansion) -> list[str]:
    if R > 0.1 * lam_T or exp.lambda_in > 0.2 * lam_T:
        msg = "low-temperature expansion used with lambda_T not dominant"
        warnings.warn(msg, ValidityWarning, stacklevel=3)
        return [msg]
    return []


def sphere_sphere_force_lowT(
    term: str,
    cfg: TwoBodyConfig,
    exp1: InsulatorExpansion | None = None,
    exp2: InsulatorExpansion | None = None,
) -> float:
    """Leading low-temperature forces on sphere 2 for insulating spheres.

    ``term``: ``'interaction'`` (source sphere 1 at T1, any d >> R),
    ``'self_far'`` (d >> lambda_T2, temperature independent) or
    ``'self_near'`` (lambda_T2 >> d).
    """
    geo = _ss_geo(cfg)
    e1 = _expansion(geo.material1, geo.R1, exp1)
    e2 = _expansion(geo.material2, geo.R2, exp2)
    d = geo.d
    hc = HBAR * C0
    if term == "interaction":
        lam = thermal_wavelength(cfg.T1)
        _low_t_guard(lam, max(geo.R1, geo.R2), e1)
        br = -32 * math.pi**7 * e2.lambda_in * e2.alpha_i0 / (5 * lam) + e2.alpha0 * (
            32 * math.pi**5 * lam / (21 * d) + 8 * math.pi**3 * lam**3 / (5 * d**3) + 18 * math.pi * lam**5 / d**5
        )
        return hc / (3 * d**2) * e1.lambda_in * e1.alpha_i0 / lam**7 * br
    if term == "self_far":
        return 60 * hc / (math.pi * d**9) * e2.lambda_in * e2.alpha_i0 * e1.alpha0
    if term == "self_near":
        lam = thermal_wavelength(cfg.T2)
        _low_t_guard(lam, max(geo.R1, geo.R2), e2)
        return 6 * math.pi * hc / (d**7 * lam**2) * e2.lambda_in * e2.alpha_i0 * e1.alpha0
    raise ValueError("term must be 'interaction', 'self_far' or 'self_near'")


def static_plate_factor(eps0: float, n: int = 48) -> float:
    """(c/w)^2 int_0^{w/c} k dk sum_P (1 - |r_P|^2) for a lossless plate of permittivity eps0."""
    t, wt = np.polynomial.legendre.leggauss(n)
    s = 0.5 * (t + 1)
    ws = 0.5 * wt
    kz1 = np.sqrt(eps0 - 1 + s * s)
    rM = (s - kz1) / (s + kz1)
    rN = (eps0 * s - kz1) / (eps0 * s + kz1)
    return float(((2 - rM**2 - rN**2) * s * ws).sum())


def sphere_plate_force_lowT(
    part: str,
    cfg: TwoBodyConfig,
    exp_sphere: InsulatorExpansion | None = None,
    exp_plate: InsulatorExpansion | None = None,
) -> float:
    """Leading low-temperature forces on an insulating sphere near an insulating plate.

    ``part``: ``'propagating'`` (plate source, d-independent),
    ``'ev_far'`` (plate source, d >> lambda_Tp), ``'ev_near'`` (plate
    source, lambda_Tp >> d) or ``'self_near'`` (sphere source, lambda_Ts >> d).
    """
    geo = _sp_geo(cfg)
    es = _expansion(geo.sphere, geo.R, exp_sphere)
    ep = _expansion(geo.plate, geo.R, exp_plate)
    d = geo.d
    hc = HBAR * C0
    if part == "self_near":
        lam = thermal_wavelength(cfg.T1)
        _low_t_guard(lam, geo.R, es)
        return math.pi / 4 * hc / (lam**2 * d**4) * (ep.eps0 - 1) / (ep.eps0 + 1) * es.lambda_in * es.alpha_i0
    lam = thermal_wavelength(cfg.T2)
    _low_t_guard(lam, geo.R, es)
    if part == "propagating":
        return -8 * math.pi**5 / 63 * hc / lam**6 * static_plate_factor(ep.eps0) * es.lambda_in * es.alpha_i0
    if part == "ev_far":
        mat = ((1 + ep.eps0) / np.sqrt(complex(ep.eps0 - 1))).real
        return math.pi / 6 * hc / (lam**2 * d**3) * mat * es.alpha0
    if part == "ev_near":
        return math.pi / 2 * hc * ep.lambda_in / (lam**2 * d**4) / (1 + ep.eps0) ** 2 * es.alpha0
    raise ValueError("part must be 'propagating', 'ev_far', 'ev_near' or 'self_near'")


# ---------------------------------------------------------------------------
# equilibrium force on the imaginary axis


def _imag_response(model, xi):
    """Response at i xi; the negative perfect-mirror stand-in maps to |eps| (eps(i xi) >= 1)."""
    v = np.asarray(_response(model, 1j * np.asarray(xi, dtype=float)))
    return np.where(v.real < 0, np.abs(v), v.real)


def _imag_mie(material, mu, xi, R, L):
    """Mie T at imaginary frequency i xi, shape (W, 2, L)."""
    w = 1j * np.asarray(xi, dtype=float)
    eps = _imag_response(material, xi)
    muv = _imag_response(mu, xi)
    TM, TN = mie_arrays(eps, muv, w * R / C0, L)
    return np.stack([TM, TN], axis=-2)


def ss_equilibrium_kernel(geo: SphereSphere, xi, L: int) -> np.ndarray:
    """d/dd log det(I - U^+ T1 U^- T2) at imaginary frequencies, summed over m."""
    xi = np.asarray(xi, dtype=float)
    T1 = _padded(_imag_mie(geo.material1, geo.mu1, xi, geo.R1, L))
    T2 = _padded(_imag_mie(geo.material2, geo.mu2, xi, geo.R2, L))
    w = 1j * xi
    k = w / C0
    Lx = L + 1
    out = np.zeros(xi.shape)
    for m in range(L + 1):
        Up = translation_u_blocks(+1, m, geo.d, w, Lx)
        Um = translation_u_blocks(-1, m, geo.d, w, Lx)
        s1 = np.sqrt(_block_vector(T1, m, Lx).astype(complex))
        s2 = np.sqrt(_block_vector(T2, m, Lx).astype(complex))
        P = k[:, None, None] * _pz_unit(m, Lx)[None]
        B21 = s2[:, :, None] * Up * s1[:, None, :]
        B12 = s1[:, :, None] * Um * s2[:, None, :]
        dB21 = -s2[:, :, None] * np.einsum("wij,wjk->wik", P, Up) * s1[:, None, :]
        dB12 = s1[:, :, None] * np.einsum("wij,wjk->wik", P, Um) * s2[:, None, :]
        N = np.einsum("wij,wjk->wik", B21, B12)
        dN = np.einsum("wij,wjk->wik", dB21, B12) + np.einsum("wij,wjk->wik", B21, dB12)
        A = np.eye(N.shape[-1])[None] - N
        if np.any(np.linalg.cond(A) > 1e12):
            raise ConditioningError(f"equilibrium resolvent ill-conditioned at m={m}")
        val = -np.trace(np.linalg.solve(A, dN), axis1=1, axis2=2).real
        out += val if m == 0 else 2 * val
    return out


def sp_equilibrium_kernel(geo: SpherePlate, xi, n: int = 16) -> np.ndarray:
    """d/dd of the dipole-order sphere-plate free-energy integrand at imaginary frequencies."""
    xi = np.asarray(xi, dtype=float)
    T = _imag_mie(geo.sphere, geo.mu_sphere, xi, geo.R, 1)[..., 0].real
    q = xi / C0
    aM = 1.5 * T[:, 0] / q**3
    aE = 1.5 * T[:, 1] / q**3
    eps = _imag_response(geo.plate, xi)[:, None]
    mu = _imag_response(geo.mu_plate, xi)[:, None]
    u, wu = _ev_nodes(n)  # u du; kappa = q + v / d with v = u
    v = u
    wv = wu / np.where(u > 0, u, 1.0)  # plain du weights
    kap = q[:, None] + v[None, :] / geo.d
    kap1 = np.sqrt(kap**2 + (eps * mu - 1) * q[:, None] ** 2)
    rN = (eps * kap - kap1) / (eps * kap + kap1)
    rM = (mu * kap - kap1) / (mu * kap + kap1)
    q2 = q[:, None] ** 2
    big = 2 * kap**2 - q2
    e = np.exp(-2 * kap * geo.d) * (-2 * kap)  # d/dd of e^{-2 kappa d}
    integ = aE[:, None] * (big * rN - q2 * rM) + aM[:, None] * (big * rM - q2 * rN)
    # free energy E = -sum alpha int dkappa e^{-2 kappa d} [...]; force (attractive > 0) = dE/dd
    return -(integ * e * wv[None, :]).sum(axis=1) / geo.d


def _matsubara_force(kernel: Callable, T: float, length: float, scales=(), rtol: float = 1e-8, max_terms: int = 20000):
    """k_B T sum' kernel(xi_n), or (hbar/2 pi) int kernel dxi at T = 0."""
    xi_c = C0 / length
    if T > 0:
        xi1 = 2 * math.pi * KB * T / HBAR
        n_needed = int(math.ceil(30 * xi_c / xi1)) + 2
    if T <= 0 or n_needed > max_terms:
        pts = sorted(p for p in [0.1 * xi_c, xi_c, 5 * xi_c, *scales] if 0 < p < 60 * xi_c)
        res = adaptive_gk(kernel, 0.0, 60 * xi_c, points=pts, rtol=rtol, initial=4)
        if not res.converged:
            raise TruncationError("imaginary-frequency integral did not converge")
        return HBAR / (2 * math.pi) * float(res.value)
    n = np.arange(1, n_needed + 1)
    vals = kernel(n * xi1)
    zero = kernel(np.array([1e-6 * min(xi1, xi_c)]))[0]
    total = 0.5 * zero + vals.sum()
    if abs(vals[-1]) > rtol * abs(total) and abs(vals[-1]) > 0:
        raise TruncationError("Matsubara sum not converged")
    return KB * T * float(total)


def equilibrium_force(cfg: TwoBodyConfig, T_env: float | None = None, l_max: int | None = None) -> float:
    """Equilibrium Casimir force at T_env (default cfg.T_env), positive = attractive.

    Sphere-sphere uses the full log-determinant with l_max multipoles
    (default 1); sphere-plate uses the dipole-order expression.
    """
    cfg.validate()
    geo = cfg.geometry
    T = cfg.T_env if T_env is None else T_env
    if isinstance(geo, SphereSphere):
        L = l_max or 1
        return _matsubara_force(lambda x: ss_equilibrium_kernel(geo, x, L), T, geo.d - geo.R1 - geo.R2)
    if geo.R / geo.d > 0.2:
        warnings.warn("dipole-order sphere-plate equilibrium force used at R/d > 0.2", ValidityWarning, stacklevel=2)
    return _matsubara_force(lambda x: sp_equilibrium_kernel(geo, x), T, geo.d)


# ---------------------------------------------------------------------------
# assembly


def total_force(
    cfg: TwoBodyConfig,
    method: str = "dipole",
    l_max: int | None = None,
    *,
    include_equilibrium: bool = True,
    rtol: float = 1e-6,
) -> ForceBreakdown:
    """F_eq(T_env) + sum over sources of [F(T_source) - F(T_env)].

    ``method`` is ``'dipole'`` (closed dipole kernels) or
    ``'one_reflection'`` (general multipole kernels with ``l_max``).
    """
    if method not in ("dipole", "one_reflection"):
        raise ValueError("method must be 'dipole' or 'one_reflection'")
    cfg.validate()
    geo = cfg.geometry
    notes: list[str] = []
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        dip = method == "dipole"
        if isinstance(geo, SphereSphere):
            if dip:
                f_int = sphere_sphere_force_dipole("interaction", cfg, T=cfg.T1, T_ref=cfg.T_env, rtol=rtol)
                f_self = sphere_sphere_force_dipole("self", cfg, T=cfg.T2, T_ref=cfg.T_env, rtol=rtol)
            else:
                f_int = sphere_sphere_force_interaction(cfg, l_max, T=cfg.T1, T_ref=cfg.T_env, rtol=rtol)
                f_self = sphere_sphere_force_self(cfg, l_max, T=cfg.T2, T_ref=cfg.T_env, rtol=rtol)
            f_eq = equilibrium_force(cfg, cfg.T_env, 1 if dip else l_max) if include_equilibrium else 0.0
        else:
            L = 1 if dip else (l_max or 1)
            f_int = sphere_plate_force_interaction(cfg, L, T=cfg.T2, T_ref=cfg.T_env, dipole=dip, rtol=rtol)
            f_self = sphere_plate_force_self(cfg, L, T=cfg.T1, T_ref=cfg.T_env, dipole=dip, rtol=rtol)
            f_eq = equilibrium_force(cfg, cfg.T_env) if include_equilibrium else 0.0
    for wmsg in caught:
        text = str(wmsg.message)
        if text not in notes:
            notes.append(text)
    total = f_eq + f_int + f_self
    return ForceBreakdown(
        f_int,
        f_self,
        f_eq,
        total,
        method,
        {"interaction": f_int, "self": f_self, "equilibrium": f_eq},
        notes,
    )


__all__ = [
    "ForceBreakdown",
    "thermal_integral",
    "sphere_sphere_force_interaction",
    "sphere_sphere_force_self",
    "sphere_sphere_force_dipole",
    "sphere_sphere_force_lowT",
    "sphere_plate_force_interaction",
    "sphere_plate_force_self",
    "sphere_plate_force_lowT",
    "equilibrium_force",
    "total_force",
    "static_plate_factor",
]
