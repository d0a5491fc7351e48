"""Scattering data of single bodies: spheres, half-spaces, slabs and cylinders."""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import constants as const

from .materials import OpticalModel, as_finite
from .special import SaturationWarning, psi_log_derivative, spherical_hn_array, spherical_jn_array

C0 = const.c


class SaturationError(ArithmeticError):
    """A Mie channel could not be evaluated in floating point."""


class ValidityWarning(UserWarning):
    """An approximation is used outside its range of validity."""


class CoverageError(ValueError):
    """Tabulated scattering data do not cover the requested point."""


def _response(model, omega):
    """Permittivity (or permeability) values from a model, a number or None."""
    if model is None:
        return np.ones_like(np.asarray(omega, dtype=complex))
    if isinstance(model, OpticalModel):
        return np.asarray(as_finite(model).epsilon(omega), dtype=complex)
    return np.broadcast_to(np.asarray(model, dtype=complex), np.shape(omega)).copy()


def _branch_root(z):
    """Square root with non-negative imaginary part."""
    q = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(q.imag < 0, -q, q)


# ---------------------------------------------------------------------------
# spheres


def mie_arrays(eps, mu, x, lmax: int):
    """Mie coefficients T^M_l, T^N_l for l = 1..lmax.

    Parameters
    ----------
    eps, mu : array_like
        Relative permittivity and permeability of the sphere.
    x : array_like
        Size parameter R omega / c (complex on the imaginary axis).

    Returns
    -------
    TM, TN : ndarray, shape ``x.shape + (lmax,)``

    Notes
    -----
    Written with the logarithmic derivative of psi_l = z j_l(z) inside the
    sphere, which removes the overflow of j_l at large |Im z|.  Channels in
    which h_l(x) overflows (tiny spheres, high l) have negligible T and are
    set to zero.
    """
    eps = np.asarray(eps, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    x = np.asarray(x, dtype=complex)
    eps, mu, x = np.broadcast_arrays(eps, mu, x)
    xt = np.sqrt(eps * mu) * x
    ls = np.arange(1, lmax + 1)
    with np.errstate(all="ignore"), warnings.catch_warnings():
        warnings.simplefilter("ignore", SaturationWarning)
        j = spherical_jn_array(lmax, x.reshape(-1)).reshape(x.shape + (lmax + 1,))
        h = spherical_hn_array(lmax, x.reshape(-1)).reshape(x.shape + (lmax + 1,))
        D = psi_log_derivative(lmax, xt.reshape(-1)).reshape(x.shape + (lmax + 1,))
        jl, hl = j[..., 1:], h[..., 1:]
        dpsi = x[..., None] * j[..., :-1] - ls * jl  # d/dx [x j_l]
        dxi = x[..., None] * h[..., :-1] - ls * hl
        inner = xt[..., None] * D[..., 1:]  # d/dxt [xt j_l(xt)] / j_l(xt)
        inner = np.where((xt == 0)[..., None], ls + 1.0, inner)  # eps mu = 0 limit
        TM = -(mu[..., None] * dpsi - jl * inner) / (mu[..., None] * dxi - hl * inner)
        TN = -(eps[..., None] * dpsi - jl * inner) / (eps[..., None] * dxi - hl * inner)
    out = []
    for T in (TM, TN):
        bad = ~np.isfinite(T)
        if np.any(bad):
            overflow = ~np.isfinite(hl) | (np.abs(hl) > 1e290)
            if np.any(bad & ~overflow):
                raise SaturationError("Mie coefficient not representable for some (omega, l) channel")
            T = np.where(bad, 0.0, T)
        out.append(T)
    return out[0], out[1]


@dataclass(frozen=True)
class MieTMatrix:
    """Diagonal T-matrix of a homogeneous sphere; ``T[P][l-1]`` with P = 0 (M), 1 (N)."""

    l_max: int
    omega: complex
    R: float
    T: np.ndarray = field(repr=False)

    def element(self, P: str, l: int) -> complex:
        return complex(self.T[{"M": 0, "N": 1}[P], l - 1])

    def absorptivity(self) -> np.ndarray:
        """-(Re T + |T|^2) per channel; non-negative for passive spheres."""
        return -(self.T.real + np.abs(self.T) ** 2)


def mie_t(material, mu_material, omega: complex, R: float, l_max: int) -> MieTMatrix:
    """Mie T-matrix of a homogeneous sphere of radius ``R``."""
    if R <= 0 or l_max < 1:
        raise ValueError("need R > 0 and l_max >= 1")
    if np.real(omega) <= 0 and np.imag(omega) <= 0:
        raise ValueError("frequency must be positive (or on the positive imaginary axis)")
    eps = _response(material, omega)
    mu = _response(mu_material, omega)
    TM, TN = mie_arrays(eps, mu, omega * R / C0, l_max)
    return MieTMatrix(l_max, omega, R, np.stack([TM, TN]))


def sphere_t(material, omega, R: float, lmax: int, mu_material=None):
    """Vectorized Mie coefficients over an array of frequencies.

    Returns ``(TM, TN)`` of shape ``omega.shape + (lmax,)``.
    """
    omega = np.asarray(omega)
    eps = _response(material, omega)
    mu = _response(mu_material, omega)
    return mie_arrays(eps, mu, omega * R / C0, lmax)


@dataclass(frozen=True)
class SmallSphereT:
    TN: complex
    TM: complex
    size: float
    valid: bool


def small_sphere_arrays(eps, mu, x):
    """Three-term small-size expansion of (T_1^N, T_1^M)."""
    eps = np.asarray(eps, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    x = np.asarray(x, dtype=complex)

    def t1(a, b):
        return (
            1j * 2 * (a - 1) / (3 * (a + 2)) * x**3
            + 1j * (4 - 6 * a + a * a * (1 + b)) / (5 * (2 + a) ** 2) * x**5
            - 4 * (a - 1) ** 2 / (9 * (2 + a) ** 2) * x**6
        )

    return t1(eps, mu), t1(mu, eps)


def small_sphere_t(material, omega: float, R: float, mu_material=None) -> SmallSphereT:
    """Leading dipole coefficients from the small-sphere expansion.

    Emits a ``ValidityWarning`` when |sqrt(eps mu)| R omega / c >= 0.3.
    """
    eps = complex(_response(material, omega))
    mu = complex(_response(mu_material, omega))
    x = omega * R / C0
    size = abs(np.sqrt(eps * mu)) * abs(x)
    valid = size < 0.3
    if not valid:
        warnings.warn(f"small-sphere expansion used at size {size:.3g} >= 0.3", ValidityWarning, stacklevel=2)
    TN, TM = small_sphere_arrays(eps, mu, x)
    return SmallSphereT(complex(TN), complex(TM), size, valid)


def polarizability(eps, R: float):
    """Static dipole polarizability ((eps - 1)/(eps + 2)) R^3."""
    eps = np.asarray(eps, dtype=complex)
    return (eps - 1) / (eps + 2) * R**3


# ---------------------------------------------------------------------------
# planar interfaces


def fresnel_arrays(eps, mu, k_perp, omega, k_z=None):
    """Fresnel coefficients (r^M, r^N) of a half-space, broadcasting all inputs.

    Passing ``k_z`` (i kappa for evanescent waves) avoids the cancellation
    in omega^2/c^2 - k_perp^2 close to the light line.
    """
    eps = np.asarray(eps, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    k0sq = (np.asarray(omega, dtype=complex) / C0) ** 2
    if k_z is None:
        kp2 = np.asarray(k_perp, dtype=float) ** 2
        kz = _branch_root(k0sq - kp2)
        kz1 = _branch_root(eps * mu * k0sq - kp2)
    else:
        kz = np.asarray(k_z, dtype=complex)
        kz1 = _branch_root(kz * kz + (eps * mu - 1) * k0sq)
    with np.errstate(invalid="ignore", divide="ignore"):
        rM = (mu * kz - kz1) / (mu * kz + kz1)
        rN = (eps * kz - kz1) / (eps * kz + kz1)
    return rM, rN


def fresnel_r(material_p, mu_p, k_perp, omega):
    """Half-space reflection coefficients for M (TE) and N (TM) waves."""
    eps = _response(material_p, omega)
    mu = _response(mu_p, omega)
    return fresnel_arrays(eps, mu, k_perp, omega)


@dataclass(frozen=True)
class SlabCoefficients:
    """Reflection and transmission amplitudes of a slab, indexed [P] with P = 0 (M), 1 (N).

    Transmission is referenced to free propagation over the slab thickness,
    so that a vacuum slab has t = 1.  The slab is mirror symmetric, hence
    r_L = r_R and t_L = t_R.
    """

    thickness: float
    k_perp: np.ndarray
    omega: np.ndarray
    r_R: np.ndarray
    t_R: np.ndarray

    @property
    def r_L(self) -> np.ndarray:
        return self.r_R

    @property
    def t_L(self) -> np.ndarray:
        return self.t_R

    def absorptivity(self) -> np.ndarray:
        return 1.0 - np.abs(self.r_R) ** 2 - np.abs(self.t_R) ** 2


def slab_arrays(eps, mu, thickness: float, k_perp, omega):
    """Airy summation for a free-standing slab. Returns (r, t) each of shape (2, ...)."""
    eps = np.asarray(eps, dtype=complex)
    mu = np.asarray(mu, dtype=complex)
    rM, rN = fresnel_arrays(eps, mu, k_perp, omega)
    r01 = np.stack(np.broadcast_arrays(rM, rN))
    if math.isinf(thickness):
        return r01, np.zeros_like(r01)
    if thickness <= 0:
        raise ValueError("slab thickness must be positive")
    k0sq = (np.asarray(omega, dtype=complex) / C0) ** 2
    kp2 = np.asarray(k_perp, dtype=float) ** 2
    kz = _branch_root(k0sq - kp2)
    kz1 = _branch_root(eps * mu * k0sq - kp2)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        e2 = np.exp(2j * kz1 * thickness)
        e1 = np.exp(1j * (kz1 - kz) * thickness)
        den = 1 - r01**2 * e2
        r = r01 * (1 - e2) / den
        t = (1 - r01**2) * e1 / den
    return r, t


def slab_coefficients(material, mu, thickness: float, k_perp, omega) -> SlabCoefficients:
    eps_v = _response(material, omega)
    mu_v = _response(mu, omega)
    r, t = slab_arrays(eps_v, mu_v, thickness, k_perp, omega)
    return SlabCoefficients(thickness, np.asarray(k_perp), np.asarray(omega), r, t)


def plate_t_elements(slab: SlabCoefficients) -> dict[str, np.ndarray]:
    """Plane-wave T-matrix elements of a slab, keyed by (out side, in side)."""
    diag = (slab.t_R - 1) / 2
    off = slab.r_R / 2
    return {"RR": diag, "LL": (slab.t_L - 1) / 2, "RL": off, "LR": slab.r_L / 2}


# ---------------------------------------------------------------------------
# cylinders (caller-supplied data)


def _cnum(v) -> complex:
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, (int, float)):
        return complex(v)
    raise CoverageError(f"complex values must be given as [re, im], got {v!r}")


class CylinderTMatrix:
    """Polarization-mixing cylinder T-matrix supplied as data or as a callable.

    Tabulated data are a list of records ``{n, k_z, T_MM, T_MN, T_NM, T_NN}``
    (optionally with ``omega``).  Between tabulated k_z values the elements are
    linearly interpolated; a point outside the tabulated k_z range of an order
    n raises ``CoverageError``.  A callable ``f(n, k_z, omega) -> (2, 2)`` may be
    given instead.  Block layout is ``[[MM, MN], [NM, NN]]``.
    """

    def __init__(self, data: list[dict] | Callable | None = None, n_max: int | None = None):
        self._func = data if callable(data) else None
        self._table: dict[tuple[float | None, int], tuple[np.ndarray, np.ndarray]] = {}
        if self._func is None:
            rows: dict[tuple[float | None, int], list] = {}
            for rec in data or []:
                try:
                    n = int(rec["n"])
                    kz = float(rec["k_z"])
                    w = float(rec["omega"]) if "omega" in rec else None
                    blk = np.array(
                        [[_cnum(rec["T_MM"]), _cnum(rec["T_MN"])], [_cnum(rec["T_NM"]), _cnum(rec["T_NN"])]]
                    )
                except KeyError as exc:
                    raise CoverageError(f"cylinder record missing key {exc}") from None
                rows.setdefault((w, n), []).append((kz, blk))
            for key, items in rows.items():
                items.sort(key=lambda t: t[0])
                self._table[key] = (np.array([t[0] for t in items]), np.array([t[1] for t in items]))
        orders = sorted({k[1] for k in self._table})
        self.n_max = n_max if n_max is not None else (max(abs(n) for n in orders) if orders else 0)

    @classmethod
    def from_json(cls, source: str) -> "CylinderTMatrix":
        """Load from a JSON file path or a JSON string."""
        text = source
        if not source.lstrip().startswith("["):
            with open(source, encoding="utf-8") as fh:
                text = fh.read()
        return cls(json.loads(text))

    @property
    def orders(self) -> list[int]:
        if self._func is not None:
            return list(range(-self.n_max, self.n_max + 1))
        return sorted({k[1] for k in self._table})

    def _key(self, n: int, omega: float | None):
        if (None, n) in self._table:
            return (None, n)
        if omega is not None:
            for (w, nn) in self._table:
                if nn == n and w is not None and math.isclose(w, omega, rel_tol=1e-9):
                    return (w, nn)
        return None

    def block(self, n: int, k_z, omega: float | None = None) -> np.ndarray:
        """2x2 polarization block(s) at order n for scalar or array k_z."""
        if self._func is not None:
            kz = np.atleast_1d(np.asarray(k_z, dtype=float))
            out = np.array([np.asarray(self._func(n, float(k), omega), dtype=complex) for k in kz])
            return out if np.ndim(k_z) else out[0]
        key = self._key(n, omega)
        if key is None:
            raise CoverageError(f"no cylinder data for order n={n} at omega={omega}")
        grid, vals = self._table[key]
        kz = np.asarray(k_z, dtype=float)
        lo, hi = grid[0], grid[-1]
        tol = 1e-12 * max(abs(lo), abs(hi), 1.0)
        if np.any(kz < lo - tol) or np.any(kz > hi + tol):
            raise CoverageError(f"k_z outside tabulated range [{lo}, {hi}] for order n={n}")
        flat = vals.reshape(len(grid), 4)
        res = np.stack(
            [np.interp(kz, grid, flat[:, i].real) + 1j * np.interp(kz, grid, flat[:, i].imag) for i in range(4)], -1
        )
        return res.reshape(kz.shape + (2, 2))

    def passivity_violation(self, omega: float | None = None) -> float:
        """Largest negative eigenvalue of -(T + T^H)/2 - T^H T over tabulated propagating points."""
        worst = 0.0
        for (w, n), (grid, vals) in self._table.items():
            if omega is not None and w is not None and not math.isclose(w, omega, rel_tol=1e-9):
                continue
            for kz, T in zip(grid, vals):
                if w is not None and abs(kz) > w / C0:
                    continue
                A = -(T + T.conj().T) / 2 - T.conj().T @ T
                worst = min(worst, float(np.linalg.eigvalsh(A).min()))
        return -worst

    def symmetry_violation(self) -> float:
        """max |T^{PP'}_{n,kz} - T^{P'P}_{-n,-kz}| over tabulated pairs present in both."""
        worst = 0.0
        for (w, n), (grid, vals) in self._table.items():
            mirror = self._table.get((w, -n))
            if mirror is None:
                continue
            g2, v2 = mirror
            for kz, T in zip(grid, vals):
                idx = np.nonzero(np.isclose(g2, -kz, rtol=1e-12, atol=1e-300))[0]
                if idx.size:
                    worst = max(worst, float(np.abs(T - v2[idx[0]].T).max()))
        return worst
