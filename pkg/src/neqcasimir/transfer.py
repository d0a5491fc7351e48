"""Radiative heat transfer between two spheres and between a sphere and a plate.

Sphere channels enter through their absorptivities
``A = -(Re T + |T|^2) >= 0`` so every pairwise kernel is non-negative.
Geometry conventions: for two spheres ``d`` is the centre-to-centre
distance, sphere 2 sits at ``-d z`` relative to sphere 1 (so sphere 1 waves
reach sphere 2 through ``U^+``); for a sphere above a plate ``d`` is the
distance from the sphere centre to the plate surface.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .materials import HBAR, bose_occupation, thermal_wavelength
from .quadrature import adaptive_gk, auto_lmax, evanescent_rule, propagating_rule, thermal_window
from .radiation import material_breakpoints, sphere_emission
from .scattering import C0, ValidityWarning, _response, fresnel_arrays, mie_arrays
from .waves import conversion_d_table, translation_u_blocks


class ConfigError(ValueError):
    """A geometric or thermal configuration violates an invariant."""


class TruncationError(RuntimeError):
    """A multipole or Matsubara series did not converge within its budget."""


class ConditioningError(ArithmeticError):
    """A scattering resolvent block is numerically singular."""


# ---------------------------------------------------------------------------
# configurations


@dataclass(frozen=True)
class SphereSphere:
    """Two spheres; ``d`` is the centre-to-centre distance in m."""

    R1: float
    R2: float
    d: float
    material1: object
    material2: object
    mu1: object = None
    mu2: object = None

    def validate(self) -> None:
        if self.R1 <= 0 or self.R2 <= 0:
            raise ConfigError("sphere radii must be positive")
        if not self.d > self.R1 + self.R2:
            raise ConfigError(f"spheres overlap: d = {self.d:g} m must exceed R1 + R2 = {self.R1 + self.R2:g} m")


@dataclass(frozen=True)
class SpherePlate:
    """Sphere above a half-space; ``d`` is centre-to-surface distance in m."""

    R: float
    d: float
    sphere: object
    plate: object
    mu_sphere: object = None
    mu_plate: object = None

    def validate(self) -> None:
        if self.R <= 0:
            raise ConfigError("sphere radius must be positive")
        if not self.d > self.R:
            raise ConfigError(f"sphere touches the plate: d = {self.d:g} m must exceed R = {self.R:g} m")


@dataclass(frozen=True)
class TwoBodyConfig:
    """Geometry plus temperatures of body 1, body 2 and the environment.

    For :class:`SpherePlate` geometries body 1 is the sphere and body 2 the
    plate.
    """

    geometry: SphereSphere | SpherePlate
    T1: float
    T2: float
    T_env: float = 0.0

    def validate(self) -> None:
        self.geometry.validate()
        for name in ("T1", "T2", "T_env"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative")


@dataclass
class TransferResult:
    """Heat transfer from body 1 to body 2 in W."""

    H_1to2: float
    method: str
    omega: np.ndarray = field(repr=False, default_factory=lambda: np.array([]))
    spectrum: np.ndarray = field(repr=False, default_factory=lambda: np.array([]))
    propagating: float | None = None
    evanescent: float | None = None
    l_max: int | None = None
    tail: float = 0.0
    converged: bool = True
    warnings: list[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# shared helpers


def _absorptivity(TM: np.ndarray, TN: np.ndarray) -> np.ndarray:
    """Channel absorptivities stacked as ``(..., 2, lmax)`` with M first."""
    return np.stack([-(T.real + np.abs(T) ** 2) for T in (TM, TN)], axis=-2)


def _mie(material, mu, omega, R, L):
    return mie_arrays(_response(material, omega), _response(mu, omega), omega * R / C0, L)


def _block_vector(X: np.ndarray, m: int, L: int) -> np.ndarray:
    """Per-channel data (..., 2, L) restricted to the (P, l) layout of block m."""
    lo = max(1, m) - 1
    return np.concatenate([X[..., 0, lo:L], X[..., 1, lo:L]], axis=-1)


def _bose_difference(w, Ta: float, Tb: float):
    return w * (bose_occupation(Ta, w) - bose_occupation(Tb, w))


def _two_temperature_integral(kernel: Callable, Ta: float, Tb: float, materials, rtol: float, atol: float = 0.0):
    """(2 hbar/pi) int [w n(Ta) - w n(Tb)] kernel(w) dw, vector-valued kernels allowed."""
    window = thermal_window([Ta, Tb])
    pts = material_breakpoints(*materials, window=window)

    def fun(w):
        k = np.asarray(kernel(w))
        weight = 2 * HBAR / np.pi * _bose_difference(w, Ta, Tb)
        return weight.reshape((-1,) + (1,) * (k.ndim - 1)) * k

    return adaptive_gk(fun, window[0], window[1], points=pts, rtol=rtol, atol=atol, initial=8)


def _seed_lmax(R: float, d_s: float, temps) -> int:
    Tmax = max(t for t in temps if t > 0)
    return auto_lmax(R, d_s, thermal_wavelength(Tmax), c1=2.0, c2=3.0)


def _check_config(cfg: TwoBodyConfig, kind):
    if not isinstance(cfg.geometry, kind):
        raise ConfigError(f"expected a {kind.__name__} geometry")
    cfg.validate()


def _lmax_loop(run: Callable[[int], tuple], seed: int, rtol: float, max_lmax: int, floor: float):
    """Increase the multipole cut-off until the total changes by less than rtol."""
    L = seed
    res = run(L)
    while True:
        L2 = L + max(2, L // 2)
        if L2 > max_lmax:
            msg = f"multipole sum not converged at l_max={L}"
            warnings.warn(msg, RuntimeWarning, stacklevel=3)
            return res, L, float("nan"), False
        res2 = run(L2)
        tail = abs(res2[0] - res[0])
        if tail <= max(rtol * abs(res2[0]), floor):
            return res2, L2, tail, True
        L, res = L2, res2


# ---------------------------------------------------------------------------
# sphere-sphere kernels


def sphere_sphere_kernel_1refl(geo: SphereSphere, omega: np.ndarray, L: int) -> np.ndarray:
    """sum_{m, P P' l l'} A1 A2 |U^{21}|^2 for each frequency."""
    w = np.asarray(omega, dtype=float)
    A1 = _absorptivity(*_mie(geo.material1, geo.mu1, w, geo.R1, L))
    A2 = _absorptivity(*_mie(geo.material2, geo.mu2, w, geo.R2, L))
    out = np.zeros(w.shape)
    for m in range(L + 1):
        U = translation_u_blocks(+1, m, geo.d, w, L)
        a1 = _block_vector(A1, m, L)
        a2 = _block_vector(A2, m, L)
        val = np.einsum("wi,wij,wj->w", a2, np.abs(U) ** 2, a1)
        out += val if m == 0 else 2 * val
    return out


def dipole_transfer_kernel(omega, d: float) -> np.ndarray:
    """Closed form of sum_m |U_{1 1}|^2 as a (2, 2) matrix over (P', P) per frequency."""
    y = C0 / (np.asarray(omega, dtype=float) * d)
    base = 4.5 * y**2 + 4.5 * y**4
    k = np.empty(np.shape(y) + (2, 2))
    k[..., :, :] = base[..., None, None]
    k[..., 0, 0] += 13.5 * y**6
    k[..., 1, 1] += 13.5 * y**6
    return k


def sphere_sphere_kernel_dipole(geo: SphereSphere, omega: np.ndarray) -> np.ndarray:
    w = np.asarray(omega, dtype=float)
    A1 = _absorptivity(*_mie(geo.material1, geo.mu1, w, geo.R1, 1))[..., 0]
    A2 = _absorptivity(*_mie(geo.material2, geo.mu2, w, geo.R2, 1))[..., 0]
    return np.einsum("wa,wab,wb->w", A2, dipole_transfer_kernel(w, geo.d), A1)


def _exact_block_kernel(Ta, Tb, Uba, Uab, Xa, Xb, omega, m, cond_max):
    """Xb |W|^2 Xa with W = (I - Uba Ta Uab Tb)^{-1} Uba for one m block.

    Solved in the balanced form Nba = sqrt(Tb) Uba sqrt(Ta), which is
    similar to the original operator but free of the huge U / tiny T
    scales that appear at small k d.
    """
    n2 = Uba.shape[-1]
    sa, sb = np.sqrt(Ta.astype(complex)), np.sqrt(Tb.astype(complex))
    Nba = sb[:, :, None] * Uba * sa[:, None, :]
    Nab = sa[:, :, None] * Uab * sb[:, None, :]
    A = np.eye(n2)[None] - np.einsum("wij,wjk->wik", Nba, Nab)
    cond = np.linalg.cond(A)
    bad = ~np.isfinite(cond) | (cond > cond_max)
    if np.any(bad):
        i = int(np.argmax(bad))
        raise ConditioningError(f"resolvent block ill-conditioned (cond={cond[i]:.3g}) at omega={omega[i]:.6g} rad/s, m={m}")
    Wt = np.linalg.solve(A, Nba)
    with np.errstate(divide="ignore", invalid="ignore"):
        ra = np.where(Ta != 0, Xa / np.abs(Ta), 0.0)
        rb = np.where(Tb != 0, Xb / np.abs(Tb), 0.0)
    return np.einsum("wi,wij,wj->w", rb, np.abs(Wt) ** 2, ra)


def sphere_sphere_kernel_exact(
    geo: SphereSphere, omega: np.ndarray, L: int, *, reverse: bool = False, cond_max: float = 1e12
) -> np.ndarray:
    """Multiple-scattering kernel of transfer from sphere 1 to 2 (or 2 to 1 with ``reverse``)."""
    w = np.asarray(omega, dtype=float)
    T1M, T1N = _mie(geo.material1, geo.mu1, w, geo.R1, L)
    T2M, T2N = _mie(geo.material2, geo.mu2, w, geo.R2, L)
    T1 = np.stack([T1M, T1N], axis=-2)
    T2 = np.stack([T2M, T2N], axis=-2)
    X1 = -(T1.real + np.abs(T1) ** 2)
    X2 = -(T2.real + np.abs(T2) ** 2)
    out = np.zeros(w.shape)
    for m in range(L + 1):
        Up = translation_u_blocks(+1, m, geo.d, w, L)  # sphere 1 -> sphere 2
        Um = translation_u_blocks(-1, m, geo.d, w, L)  # sphere 2 -> sphere 1
        t1, t2 = _block_vector(T1, m, L), _block_vector(T2, m, L)
        x1, x2 = _block_vector(X1, m, L), _block_vector(X2, m, L)
        if reverse:
            val = _exact_block_kernel(t2, t1, Um, Up, x2, x1, w, m, cond_max)
        else:
            val = _exact_block_kernel(t1, t2, Up, Um, x1, x2, w, m, cond_max)
        out += val if m == 0 else 2 * val
    return out


def _sphere_sphere_result(cfg, method, kern, L, rtol):
    geo = cfg.geometry
    if cfg.T1 == cfg.T2:
        return TransferResult(0.0, method, l_max=L)
    res = _two_temperature_integral(kern, cfg.T1, cfg.T2, [geo.material1, geo.material2], rtol)
    spec = 2 * HBAR / np.pi * _bose_difference(res.nodes, cfg.T1, cfg.T2) * kern(res.nodes)
    return TransferResult(float(res.value), method, res.nodes, spec, l_max=L, converged=res.converged)


def sphere_sphere_transfer_1refl(
    cfg: TwoBodyConfig, l_max: int | None = None, *, rtol: float = 1e-6, max_lmax: int = 60
) -> TransferResult:
    """One-reflection transfer from sphere 1 to sphere 2."""
    _check_config(cfg, SphereSphere)
    geo = cfg.geometry
    if l_max is not None:
        return _sphere_sphere_result(cfg, "one_reflection", lambda w: sphere_sphere_kernel_1refl(geo, w, l_max), l_max, rtol)

    def run(L):
        r = _sphere_sphere_result(cfg, "one_reflection", lambda w: sphere_sphere_kernel_1refl(geo, w, L), L, rtol)
        return (r.H_1to2, r)

    seed = min(_seed_lmax(max(geo.R1, geo.R2), geo.d - geo.R1 - geo.R2, [cfg.T1, cfg.T2]), max_lmax)
    (_, r), L, tail, ok = _lmax_loop(run, max(2, seed // 4), rtol, max_lmax, 0.0)
    r.tail, r.converged = tail, ok and r.converged
    return r


def _dipole_guard(geo: SphereSphere, temps) -> list[str]:
    lam = thermal_wavelength(max(t for t in temps if t > 0))
    Rmax = max(geo.R1, geo.R2)
    if Rmax > 0.1 * min(geo.d, lam):
        msg = "dipole formula used with R not small against min(d, lambda_T)"
        warnings.warn(msg, ValidityWarning, stacklevel=3)
        return [msg]
    return []


def sphere_sphere_transfer_dipole(cfg: TwoBodyConfig, *, rtol: float = 1e-8) -> TransferResult:
    """Large-distance dipole transfer with the closed translation kernel."""
    _check_config(cfg, SphereSphere)
    geo = cfg.geometry
    notes = _dipole_guard(geo, [cfg.T1, cfg.T2])
    r = _sphere_sphere_result(cfg, "dipole", lambda w: sphere_sphere_kernel_dipole(geo, w), 1, rtol)
    r.warnings = notes
    return r


def sphere_sphere_transfer_exact(
    cfg: TwoBodyConfig,
    l_max: int | None = None,
    *,
    reverse: bool = False,
    rtol: float = 1e-6,
    max_lmax: int = 60,
) -> TransferResult:
    """Transfer with all reflections between the spheres.

    ``reverse=True`` uses the kernel of transfer from sphere 2 to sphere 1
    instead; the two kernels coincide for reciprocal bodies.
    """
    _check_config(cfg, SphereSphere)
    geo = cfg.geometry
    def kern_of(L):
        return lambda w: sphere_sphere_kernel_exact(geo, w, L, reverse=reverse)

    if l_max is not None:
        return _sphere_sphere_result(cfg, "exact", kern_of(l_max), l_max, rtol)

    def run(L):
        r = _sphere_sphere_result(cfg, "exact", kern_of(L), L, rtol)
        return (r.H_1to2, r)

    seed = min(_seed_lmax(max(geo.R1, geo.R2), geo.d - geo.R1 - geo.R2, [cfg.T1, cfg.T2]), max_lmax)
    (_, r), L, tail, ok = _lmax_loop(run, max(2, seed // 4), rtol, max_lmax, 0.0)
    r.tail, r.converged = tail, ok and r.converged
    return r


# ---------------------------------------------------------------------------
# sphere-plate


def _d_power_sums(L: int, kp: np.ndarray, omega: np.ndarray, kz=None):
    """sum_m |D_{l m P' P}|^2 for equal and opposite polarizations, shape (W, K, L)."""
    Ds, Dc = conversion_d_table(L, kp, omega[:, None], kz)
    return (np.abs(Ds) ** 2).sum(axis=-1), (np.abs(Dc) ** 2).sum(axis=-1)


def _kperp_nodes(omega: float, d: float, n: int = 12):
    kp_pr, kz_pr, w_pr = propagating_rule(omega, 0.0, n)
    kp_ev, kap, w_ev = evanescent_rule(omega, d, n)
    return (kp_pr, w_pr), (kp_ev, kap, w_ev)


def sphere_plate_kernel_1refl(geo: SpherePlate, omega: np.ndarray, L: int, n: int = 12) -> np.ndarray:
    """Propagating and evanescent kernels (W, 2) of sphere-plate transfer.

    Each is (c/w)^2 int d^2k/(2pi)^2 (1/2) sum_{P P'} rho_P sum_l A_l^{P'} sum_m |D|^2
    with rho_P = (1 - |r_P|^2)/2 (propagating) or Im r_P e^{-2 kappa d} (evanescent).
    """
    w = np.asarray(omega, dtype=float)
    A = _absorptivity(*_mie(geo.sphere, geo.mu_sphere, w, geo.R, L))  # (W, 2, L)
    eps = _response(geo.plate, w)[:, None]
    mu = _response(geo.mu_plate, w)[:, None]
    out = np.zeros(w.shape + (2,))
    # unit rules scaled per frequency: propagating in k_z / k0, evanescent in u = kappa d
    s_pr, _, w_pr1 = propagating_rule(C0, 0.0, n)  # k0 = 1 rule
    _, u_ev, w_ev1 = evanescent_rule(C0, 1.0, n)  # d = 1 rule, kappa = u
    k0 = w / C0
    kp = k0[:, None] * s_pr[None, :]
    wts = k0[:, None] ** 2 * w_pr1[None, :]
    rM, rN = fresnel_arrays(eps, mu, kp, w[:, None])
    rho = np.stack([(1 - np.abs(rM) ** 2) / 2, (1 - np.abs(rN) ** 2) / 2], axis=-1)  # (W, K, P)
    Ss, Sc = _d_power_sums(L, kp, w)
    out[:, 0] = _contract(rho, Ss, Sc, A, wts)
    kap = u_ev[None, :] / geo.d * np.ones((w.size, 1))
    kpe = np.sqrt(k0[:, None] ** 2 + kap**2)
    wts_e = np.broadcast_to(w_ev1[None, :] / geo.d**2, kpe.shape)
    rM, rN = fresnel_arrays(eps, mu, kpe, w[:, None], 1j * kap)
    damp = np.exp(-2 * kap * geo.d)[..., None]
    rho = np.stack([rM.imag, rN.imag], axis=-1) * damp
    Ss, Sc = _d_power_sums(L, kpe, w, 1j * kap)
    out[:, 1] = _contract(rho, Ss, Sc, A, wts_e)
    return out * (C0 / w)[:, None] ** 2 * 0.5


def _contract(rho, Ss, Sc, A, wts):
    """sum_k w_k sum_{P P'} rho_P sum_l A_l^{P'} S_{l P' P}."""
    same = np.einsum("wkp,wkl,wpl->wk", rho, Ss, A)
    cross = np.einsum("wkp,wkl,wpl->wk", rho, Sc, A[:, ::-1, :])
    return ((same + cross) * wts).sum(axis=1)


def sphere_plate_transfer_1refl(
    cfg: TwoBodyConfig, l_max: int | None = None, *, rtol: float = 1e-6, max_lmax: int = 40
) -> TransferResult:
    """One-reflection transfer from the sphere (body 1) to the plate (body 2).

    The result reports propagating and evanescent parts separately; both
    vanish at equal temperatures and are positive for a hotter sphere.
    """
    _check_config(cfg, SpherePlate)
    geo = cfg.geometry

    def run(L):
        if cfg.T1 == cfg.T2:
            return (0.0, TransferResult(0.0, "one_reflection", propagating=0.0, evanescent=0.0, l_max=L))
        kern = lambda w: sphere_plate_kernel_1refl(geo, w, L)  # noqa: E731
        res = _two_temperature_integral(kern, cfg.T1, cfg.T2, [geo.sphere, geo.plate], rtol)
        pr, ev = (float(v) for v in res.value)
        spec = (2 * HBAR / np.pi * _bose_difference(res.nodes, cfg.T1, cfg.T2))[:, None] * kern(res.nodes)
        r = TransferResult(pr + ev, "one_reflection", res.nodes, spec, pr, ev, L, converged=res.converged)
        return (pr + ev, r)

    if l_max is not None:
        return run(l_max)[1]
    seed = min(_seed_lmax(geo.R, geo.d - geo.R, [cfg.T1, cfg.T2]), max_lmax)
    (_, r), L, tail, ok = _lmax_loop(run, max(1, seed // 4), rtol, max_lmax, 0.0)
    r.tail, r.converged = tail, ok and r.converged
    return r


def sphere_plate_kernel_dipole_limit(geo: SpherePlate, omega: np.ndarray) -> np.ndarray:
    """d-independent propagating kernel at l = 1, (3/4)(c/w) int k dk/k_z sum (1-|r|^2) A."""
    w = np.asarray(omega, dtype=float)
    A = _absorptivity(*_mie(geo.sphere, geo.mu_sphere, w, geo.R, 1))[..., 0].sum(axis=-1)
    s, ws = np.polynomial.legendre.leggauss(24)
    s = 0.5 * (s + 1)
    ws = 0.5 * ws
    k0 = w / C0
    kp = k0[:, None] * np.sqrt(1 - s**2)[None, :]
    rM, rN = fresnel_arrays(_response(geo.plate, w)[:, None], _response(geo.mu_plate, w)[:, None], kp, w[:, None])
    # k dk / k_z = k0 ds with s = k_z / k0
    integral = ((2 - np.abs(rM) ** 2 - np.abs(rN) ** 2) * ws[None, :]).sum(axis=1) * k0
    return 0.75 * (C0 / w) * integral * A


def _plate_eps(geo: SpherePlate, w):
    if geo.mu_plate is not None:
        warnings.warn("closed evanescent forms assume a non-magnetic plate", ValidityWarning, stacklevel=3)
    return _response(geo.plate, w)


def sphere_plate_transfer_asymptotic(regime: str, cfg: TwoBodyConfig, *, rtol: float = 1e-8) -> float:
    """Closed-form evanescent transfer from the sphere to the plate, in W.

    ``regime='far'`` applies when d >> lambda_T >> R (1/d^2 decay) with
    the plate factor Re[(1 + eps)/sqrt(eps - 1)]; ``regime='near'`` when
    lambda_T >> d >> R (1/d^3 decay) with Im[(eps - 1)/(eps + 1)].  Both
    factors enter through their magnitudes so that the result is positive
    when the sphere is hotter.
    """
    _check_config(cfg, SpherePlate)
    geo = cfg.geometry
    temps = [t for t in (cfg.T1, cfg.T2) if t > 0]
    lam = thermal_wavelength(max(temps))
    lam_lo = thermal_wavelength(min(temps))
    if regime == "far":
        ok = geo.d > 5 * lam and lam_lo > 10 * geo.R
    elif regime == "near":
        ok = lam > 5 * geo.d and geo.d > 5 * geo.R
    else:
        raise ValueError("regime must be 'far' or 'near'")
    if not ok:
        warnings.warn(f"{regime} evanescent asymptotics used outside their regime", ValidityWarning, stacklevel=2)
    if cfg.T1 == cfg.T2:
        return 0.0

    def kernel(w):
        eps = _plate_eps(geo, w)
        TM, TN = _mie(geo.sphere, geo.mu_sphere, w, geo.R, 1)
        A = _absorptivity(TM, TN)[..., 0]
        if regime == "far":
            # both polarizations near the light line: Im r_M + Im r_N ~ 2 (kappa/k0) Re[(1+eps)/sqrt(eps-1)]
            mat = np.abs(((1 + eps) / _principal_sqrt(eps - 1)).real)
            return 0.75 * C0**2 / geo.d**2 / w**2 * mat * A.sum(axis=-1)
        mat = np.abs(((eps - 1) / (1 + eps)).imag)
        return 0.75 * C0**3 / geo.d**3 / w**3 * mat * A[..., 1]

    res = _two_temperature_integral(kernel, cfg.T1, cfg.T2, [geo.sphere, geo.plate], rtol)
    return float(res.value)


def _principal_sqrt(z):
    return np.sqrt(np.asarray(z, dtype=complex))


# ---------------------------------------------------------------------------
# assembly with the environment


def one_sided_transfer(kernel: Callable, T: float, materials=(), rtol: float = 1e-7) -> float:
    """(2 hbar/pi) int w n(T) kernel(w) dw: transfer sourced by one body at T alone."""
    if T <= 0:
        return 0.0
    return float(_two_temperature_integral(kernel, T, 0.0, materials, rtol).value)


def total_heat_to_object2(
    cfg: TwoBodyConfig,
    method: str = "one_reflection",
    l_max: int | None = None,
    *,
    H12_of_T: Callable[[float], float] | None = None,
    emission2_of_T: Callable[[float], float] | None = None,
) -> float:
    """Net heat absorbed by body 2 with body 1 at T1, body 2 at T2, environment at T_env.

    Sum over sources alpha = 1, 2 of H_alpha(T_alpha) - H_alpha(T_env):
    the source 1 term is the pairwise transfer sourced by body 1 alone; the
    source 2 term is the negative isolated emission of body 2 (reabsorption
    after reflection at body 1 is not included).  Callers may supply both
    pieces as functions of temperature.
    """
    cfg.validate()
    geo = cfg.geometry
    if H12_of_T is None:
        H12_of_T = _pair_source_function(cfg, method, l_max)
    if emission2_of_T is None:
        emission2_of_T = _emission_function(geo)
    part1 = H12_of_T(cfg.T1) - H12_of_T(cfg.T_env)
    part2 = -(emission2_of_T(cfg.T2) - emission2_of_T(cfg.T_env))
    return float(part1 + part2)


def _pair_source_function(cfg: TwoBodyConfig, method: str, l_max: int | None):
    geo = cfg.geometry
    if isinstance(geo, SphereSphere):
        L = l_max or max(2, _seed_lmax(max(geo.R1, geo.R2), geo.d - geo.R1 - geo.R2, [cfg.T1, cfg.T2, cfg.T_env]) // 4)
        if method == "dipole":
            kern = lambda w: sphere_sphere_kernel_dipole(geo, w)  # noqa: E731
        elif method == "exact":
            kern = lambda w: sphere_sphere_kernel_exact(geo, w, L)  # noqa: E731
        else:
            kern = lambda w: sphere_sphere_kernel_1refl(geo, w, L)  # noqa: E731
        mats = [geo.material1, geo.material2]
    else:
        L = l_max or 1
        kern = lambda w: sphere_plate_kernel_1refl(geo, w, L).sum(axis=-1)  # noqa: E731
        mats = [geo.sphere, geo.plate]
    return lambda T: one_sided_transfer(kern, T, mats)


def _emission_function(geo):
    if isinstance(geo, SphereSphere):
        return lambda T: sphere_emission(geo.material2, geo.R2, T, geo.mu2).total if T > 0 else 0.0
    from .radiation import plate_emission

    # per unit area; a plate's loss is only meaningful per area, callers
    # normally supply their own function here
    return lambda T: plate_emission(geo.plate, geo.mu_plate, T) if T > 0 else 0.0


__all__ = [
    "ConfigError",
    "TruncationError",
    "ConditioningError",
    "SphereSphere",
    "SpherePlate",
    "TwoBodyConfig",
    "TransferResult",
    "sphere_sphere_transfer_1refl",
    "sphere_sphere_transfer_dipole",
    "sphere_sphere_transfer_exact",
    "sphere_plate_transfer_1refl",
    "sphere_plate_transfer_asymptotic",
    "total_heat_to_object2",
    "dipole_transfer_kernel",
]
