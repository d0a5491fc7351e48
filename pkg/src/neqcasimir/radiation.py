"""Thermal emission of isolated plates, slabs, spheres and cylinders."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .materials import HBAR, KB, SIGMA_SB, OpticalModel, as_finite, bose_occupation
from .quadrature import adaptive_gk, propagating_rule, thermal_window
from .scattering import (
    C0,
    CoverageError,
    CylinderTMatrix,
    ValidityWarning,
    _response,
    fresnel_arrays,
    mie_arrays,
    polarizability,
    slab_arrays,
)


@dataclass
class EmissionSpectrum:
    """Spectral emission and its integral."""

    omega_grid: np.ndarray
    integrand: np.ndarray  # dH/domega in W s
    total: float
    l_max: int | None = None
    tail: float = 0.0
    converged: bool = True
    warnings: list[str] = field(default_factory=list)


def material_breakpoints(*materials, window: tuple[float, float]) -> list[float]:
    """Frequencies around material features inside the integration window."""
    pts: list[float] = []
    lo, hi = window
    for m in materials:
        if isinstance(m, OpticalModel) and not m.is_limit:
            for w0, width in m.features(lo, hi):
                for p in (w0 - 5 * width, w0, w0 + 5 * width):
                    if lo < p < hi:
                        pts.append(p)
    return sorted(set(pts))


def _spectral(fun: Callable[[np.ndarray], np.ndarray], temperatures, materials=(), rtol=1e-7, atol=0.0):
    window = thermal_window(temperatures)
    pts = material_breakpoints(*materials, window=window)
    return adaptive_gk(fun, window[0], window[1], points=pts, rtol=rtol, atol=atol, initial=8)


# ---------------------------------------------------------------------------
# plates


def _plate_kernel(material, mu, omega: np.ndarray, thickness: float | None = None) -> np.ndarray:
    """int_{k < w/c} d^2k/(2 pi)^2 sum_P (1 - |r|^2 - |t|^2) for each omega."""
    kp_unit, _, w_unit = propagating_rule(1.0 * C0, 0.0, n=16)  # rule for k0 = 1
    k0 = omega / C0
    kp = k0[:, None] * kp_unit[None, :]
    eps = _response(material, omega)[:, None]
    muv = _response(mu, omega)[:, None]
    if thickness is None:
        rM, rN = fresnel_arrays(eps, muv, kp, omega[:, None])
        a = (1 - np.abs(rM) ** 2) + (1 - np.abs(rN) ** 2)
    else:
        r, t = slab_arrays(eps, muv, thickness, kp, omega[:, None])
        a = (1 - np.abs(r) ** 2 - np.abs(t) ** 2).sum(axis=0)
    return (a * w_unit[None, :]).sum(axis=1) * k0**2


def plate_emission(material, mu=None, T: float = 300.0, *, rtol: float = 1e-8) -> float:
    """Emission of one face of a half-space per unit area, in W/m^2.

    ``material=None`` (or eps = 1) with ``blackbody=True`` semantics is obtained
    through :func:`blackbody_flux`; a PerfectMirror emits nothing.
    """
    if T <= 0:
        raise ValueError("temperature must be positive")
    if isinstance(material, OpticalModel) and material.is_limit:
        return 0.0

    def fun(w):
        return HBAR / (2 * np.pi) * w * bose_occupation(T, w) * _plate_kernel(material, mu, w)

    return float(_spectral(fun, [T], [material], rtol=rtol, atol=1e-14 * blackbody_flux(T)).value)


def plate_emission_reflectivity(r_func: Callable, T: float, *, rtol: float = 1e-9) -> float:
    """Plate emission for caller-supplied reflection r(k_perp, omega) -> (rM, rN)."""
    kp_unit, _, w_unit = propagating_rule(C0, 0.0, n=16)

    def fun(w):
        k0 = w / C0
        kp = k0[:, None] * kp_unit[None, :]
        rM, rN = r_func(kp, w[:, None])
        a = (1 - np.abs(rM) ** 2) + (1 - np.abs(rN) ** 2)
        a = np.broadcast_to(a, kp.shape)
        kern = (a * w_unit[None, :]).sum(axis=1) * k0**2
        return HBAR / (2 * np.pi) * w * bose_occupation(T, w) * kern

    return float(_spectral(fun, [T], rtol=rtol).value)


def blackbody_flux(T: float) -> float:
    """sigma T^4."""
    return SIGMA_SB * T**4


def emissivity(material, T: float, mu=None) -> float:
    """Hemispherical emissivity of a half-space, plate emission / sigma T^4."""
    return plate_emission(material, mu, T) / blackbody_flux(T)


def slab_emission(material, mu, thickness: float, T: float, *, rtol: float = 1e-8) -> tuple[float, float]:
    """Emission of the right and left faces of a free-standing slab, in W/m^2."""
    if T <= 0:
        raise ValueError("temperature must be positive")
    if isinstance(material, OpticalModel) and material.is_limit:
        return 0.0, 0.0

    def fun(w):
        return HBAR / (2 * np.pi) * w * bose_occupation(T, w) * _plate_kernel(material, mu, w, thickness)

    face = float(_spectral(fun, [T], [material], rtol=rtol, atol=1e-14 * blackbody_flux(T)).value)
    return face, face


# ---------------------------------------------------------------------------
# spheres


def sphere_channel_absorptivity(TM: np.ndarray, TN: np.ndarray) -> np.ndarray:
    """-(Re T + |T|^2) summed over P with (2l+1) multiplicity, per omega."""
    l = np.arange(1, TM.shape[-1] + 1)
    a = -(TM.real + np.abs(TM) ** 2) - (TN.real + np.abs(TN) ** 2)
    return (a * (2 * l + 1)).sum(axis=-1)


def s_matrix_absorptivity(TM: np.ndarray, TN: np.ndarray) -> np.ndarray:
    """Same quantity from the S-matrix form (1 - |S|^2)/4 with S = 1 + 2T."""
    l = np.arange(1, TM.shape[-1] + 1)
    a = sum((1 - np.abs(1 + 2 * T) ** 2) / 4 for T in (TM, TN))
    return (a * (2 * l + 1)).sum(axis=-1)


def seed_lmax(R: float, T: float) -> int:
    """max(8, ceil(5 omega R / c)) at the Wien peak x = 2.82."""
    w_peak = 2.821439 * KB * T / HBAR
    return max(8, math.ceil(5 * w_peak * R / C0))


def sphere_emission(
    material,
    R: float,
    T: float,
    mu=None,
    *,
    l_max: int | None = None,
    rtol: float = 1e-6,
    max_lmax: int = 400,
) -> EmissionSpectrum:
    """Thermal emission of a homogeneous sphere into a cold environment.

    With ``l_max=None`` the multipole order starts from :func:`seed_lmax`
    and is doubled until the relative change drops below ``rtol``; the last
    change is reported as ``tail``.
    """
    if T <= 0 or R <= 0:
        raise ValueError("need T > 0 and R > 0")
    if isinstance(material, OpticalModel) and material.is_limit:
        return EmissionSpectrum(np.array([]), np.array([]), 0.0, 0, 0.0)

    def run(L):
        def fun(w):
            TM, TN = mie_arrays(_response(material, w), _response(mu, w), w * R / C0, L)
            return 2 * HBAR / np.pi * w * bose_occupation(T, w) * sphere_channel_absorptivity(TM, TN)

        return _spectral(fun, [T], [material], rtol=rtol * 0.1, atol=floor), fun

    floor = 1e-14 * 4 * np.pi * R * R * blackbody_flux(T)

    if l_max is not None:
        res, fun = run(l_max)
        return EmissionSpectrum(res.nodes, fun(res.nodes), float(res.value), l_max, 0.0, res.converged)
    L = seed_lmax(R, T)
    res, fun = run(L)
    prev = res.value
    tail = abs(prev)
    while True:
        L2 = 2 * L
        if L2 > max_lmax:
            warn = f"multipole sum not converged at l_max={L}"
            warnings.warn(warn, RuntimeWarning, stacklevel=2)
            return EmissionSpectrum(res.nodes, fun(res.nodes), float(prev), L, tail, False, [warn])
        res2, fun2 = run(L2)
        tail = abs(res2.value - prev)
        if tail <= max(rtol * abs(res2.value), 1e3 * floor):
            return EmissionSpectrum(res2.nodes, fun2(res2.nodes), float(res2.value), L2, tail, res2.converged)
        L, prev, res, fun = L2, res2.value, res2, fun2


def sphere_emission_approx(level: str, material, R: float, T: float, mu=None, *, rtol: float = 1e-7) -> float:
    """Small-sphere approximations of the emission.

    ``dipole_full`` keeps l = 1 with the quadratic term, ``dipole_linear``
    drops it and ``polarizability`` uses Im of the static polarizability
    formula (non-magnetic only).  A ``ValidityWarning`` is emitted when the
    size guard of the chosen level is exceeded at the Wien frequency.
    """
    lam_T = HBAR * C0 / (KB * T)
    eps_w = complex(_response(material, np.asarray(2.821439 * KB * T / HBAR)))
    if level == "dipole_full":
        ok = R < 0.1 * lam_T
    elif level == "dipole_linear":
        ok = abs(np.sqrt(eps_w)) * R < 0.1 * lam_T
    elif level == "polarizability":
        ok = abs(np.sqrt(eps_w)) * R < 0.1 * lam_T
        if mu is not None:
            raise ValueError("the polarizability level applies to non-magnetic spheres only")
    else:
        raise ValueError("level must be dipole_full, dipole_linear or polarizability")
    if not ok:
        warnings.warn(f"{level} approximation used outside its validity range", ValidityWarning, stacklevel=2)

    def fun(w):
        occ = w * bose_occupation(T, w)
        if level == "polarizability":
            alpha = polarizability(_response(material, w), R)
            return 4 * HBAR / (C0**3 * np.pi) * w**3 * occ * alpha.imag
        TM, TN = mie_arrays(_response(material, w), _response(mu, w), w * R / C0, 1)
        if level == "dipole_full":
            a = -(TM.real + np.abs(TM) ** 2 + TN.real + np.abs(TN) ** 2)[..., 0]
        else:
            a = -(TM.real + TN.real)[..., 0]
        return 6 * HBAR / np.pi * occ * a

    floor = 1e-14 * 4 * np.pi * R * R * blackbody_flux(T)
    return float(_spectral(fun, [T], [material], rtol=rtol, atol=floor).value)


# ---------------------------------------------------------------------------
# cylinders


def cylinder_emission(cyl: CylinderTMatrix, T: float, *, n_kz: int = 32, rtol: float = 1e-7) -> float:
    """Emission per unit length of an infinite cylinder, in W/m.

    Frequency-independent or callable T-matrices are integrated adaptively
    in omega; tables keyed by ``omega`` are integrated with the trapezoid
    rule over their tabulated frequencies.
    """
    t, wt = np.polynomial.legendre.leggauss(n_kz)

    def band(w: float) -> float:
        k0 = w / C0
        kz = k0 * t
        acc = 0.0
        for n in cyl.orders:
            B = cyl.block(n, kz, w)  # (n_kz, 2, 2)
            diag = np.einsum("kpp->kp", B)
            a = diag.real + np.abs(diag) ** 2 + np.abs(B[:, [0, 1], [1, 0]]) ** 2
            acc += float((a.sum(axis=1) * wt).sum() * k0 / (2 * np.pi))
        return acc

    freqs = sorted({k[0] for k in cyl._table if k[0] is not None}) if cyl._func is None else []
    if freqs:
        w = np.array(freqs)
        vals = np.array([-2 * HBAR / np.pi * wi * bose_occupation(T, wi) * band(wi) for wi in w])
        return float(np.trapezoid(vals, w)) if len(w) > 1 else 0.0

    def fun(w):
        return np.array([-2 * HBAR / np.pi * wi * bose_occupation(T, wi) * band(wi) for wi in w])

    try:
        return float(_spectral(fun, [T], rtol=rtol).value)
    except CoverageError:
        raise


def net_exchange(H_of_T: Callable[[float], float], T_obj: float, T_env: float) -> float:
    """Net power lost to the environment, H(T_obj) - H(T_env)."""
    return H_of_T(T_obj) - H_of_T(T_env)


def as_emitter(material):
    """Finite stand-in for limit materials (used by callers that need numbers)."""
    return as_finite(material) if isinstance(material, OpticalModel) else material
