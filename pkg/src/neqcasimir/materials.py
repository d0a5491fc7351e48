"""Dielectric response models, thermal weights and low-frequency expansions.

All quantities are SI.  Frequencies are angular (rad/s).  Every model
accepts complex frequencies as well, which is what the imaginary-axis
(Matsubara) evaluation of equilibrium quantities needs.
"""

from __future__ import annotations

import csv
import io
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import constants as const
from scipy.optimize import brentq

HBAR = const.hbar
C0 = const.c
KB = const.k
EV = const.e / const.hbar  # 1 eV expressed in rad/s

#: Stefan-Boltzmann constant written in terms of hbar, c and k_B.
SIGMA_SB = math.pi**2 * KB**4 / (60.0 * HBAR**3 * C0**2)

#: Finite permittivity used wherever a perfect mirror needs a numeric stand-in.
#: Negative and real: a lossless plasma far below its plasma frequency, so
#: half-spaces reflect all propagating waves and spheres absorb nothing.
MIRROR_EPSILON = -1.0e8


class MaterialError(ValueError):
    """Base class for material-model failures."""


class LimitMaterialError(MaterialError):
    """Raised when a symbolic limit material is asked for a finite response."""


class FrequencyRangeError(MaterialError):
    """Raised when a tabulated model is queried outside its samples."""


class UnsupportedExpansionError(MaterialError):
    """Raised when a low-frequency insulator expansion does not exist."""


class IngestionError(MaterialError):
    """Raised for malformed tabulated permittivity data."""


class OpticalModel(ABC):
    """Isotropic, local permittivity and permeability."""

    @abstractmethod
    def epsilon(self, omega):
        """Complex permittivity at angular frequency ``omega``."""

    def mu(self, omega):
        """Relative permeability; all shipped models are non-magnetic."""
        return np.ones_like(np.asarray(omega, dtype=complex))

    @property
    def is_conductor(self) -> bool:
        return False

    @property
    def is_limit(self) -> bool:
        return False

    def resonances(self) -> list[tuple[float, float]]:
        """Poles of the response as ``(center, width)`` pairs in rad/s."""
        return []

    def features(self, omega_min: float = 1e9, omega_max: float = 1e17) -> list[tuple[float, float]]:
        """Frequencies where integrands of this material can be sharply peaked.

        Returns the material poles plus the surface-mode frequencies where
        Re eps crosses -1 (plate) or -2 (sphere), each with a width estimate.
        Quadrature uses these as breakpoints.
        """
        out = [(w0, g) for (w0, g) in self.resonances() if omega_min <= w0 <= omega_max]
        grid = np.geomspace(omega_min, omega_max, 4000)
        try:
            eps = np.asarray(self.epsilon(grid))
        except (FrequencyRangeError, LimitMaterialError):
            return out
        for target in (-1.0, -2.0):
            g = eps.real - target
            idx = np.nonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0)[0]
            for i in idx:
                f = lambda w: float(np.real(self.epsilon(w))) - target  # noqa: E731
                try:
                    w0 = brentq(f, grid[i], grid[i + 1], xtol=1e-12 * grid[i])
                except ValueError:
                    continue
                h = 1e-6 * w0
                slope = abs(float(np.real(self.epsilon(w0 + h) - self.epsilon(w0 - h)))) / (2 * h)
                width = abs(float(np.imag(self.epsilon(w0)))) / slope if slope > 0 else 1e-3 * w0
                out.append((w0, max(width, 1e-7 * w0)))
        return sorted(out)


@dataclass(frozen=True)
class Drude(OpticalModel):
    """Free-electron metal, eps = 1 - wp^2 / (w (w + i w_tau))."""

    omega_p: float
    omega_tau: float

    @classmethod
    def from_ev(cls, omega_p_ev: float, omega_tau_ev: float) -> "Drude":
        return cls(omega_p_ev * EV, omega_tau_ev * EV)

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=complex)
        return 1.0 - self.omega_p**2 / (w * (w + 1j * self.omega_tau))

    @property
    def is_conductor(self) -> bool:
        return True

    def resonances(self):
        wt = self.omega_tau
        return [(wt, wt), (self.omega_p / math.sqrt(3.0), wt), (self.omega_p / math.sqrt(2.0), wt)]


@dataclass(frozen=True)
class SiCModel(OpticalModel):
    """Single polar-phonon (Lorentz) response of silicon carbide type crystals."""

    eps_inf: float
    omega_lo: float
    omega_to: float
    gamma: float

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=complex)
        num = w**2 - self.omega_lo**2 + 1j * w * self.gamma
        den = w**2 - self.omega_to**2 + 1j * w * self.gamma
        return self.eps_inf * num / den

    @property
    def eps_static(self) -> float:
        return self.eps_inf * self.omega_lo**2 / self.omega_to**2

    def resonances(self):
        return [(self.omega_to, self.gamma), (self.omega_lo, self.gamma)]


@dataclass(frozen=True)
class TwoOscillator(OpticalModel):
    """Two Lorentz oscillators: one infrared resonance and one electronic one."""

    C: float
    omega_res: float
    gamma: float
    D: float
    Omega_res: float
    Gamma: float

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=complex)
        ir = self.C * self.omega_res**2 / (self.omega_res**2 - w**2 - 1j * self.gamma * w)
        uv = self.D * self.Omega_res**2 / (self.Omega_res**2 - w**2 - 1j * self.Gamma * w)
        return 1.0 + ir + uv

    def resonances(self):
        return [(self.omega_res, self.gamma), (self.Omega_res, self.Gamma)]


@dataclass(frozen=True)
class ConstantPermittivity(OpticalModel):
    value: complex

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=complex)
        return np.full(w.shape, complex(self.value)) if w.shape else complex(self.value)


@dataclass(frozen=True)
class LinearizedInsulator(OpticalModel):
    """eps = eps0 + i lambda_in w / c, the low-frequency form of any insulator."""

    eps0: float
    lambda_in: float

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=complex)
        return self.eps0 + 1j * self.lambda_in * w / C0


@dataclass(frozen=True)
class PerfectMirror(OpticalModel):
    """Symbolic |eps| -> infinity limit; has no finite permittivity."""

    def epsilon(self, omega):
        raise LimitMaterialError("perfect mirror is a limit material; use finite_standin()")

    @property
    def is_limit(self) -> bool:
        return True

    def finite_standin(self) -> ConstantPermittivity:
        return ConstantPermittivity(MIRROR_EPSILON)


@dataclass(frozen=True)
class Tabulated(OpticalModel):
    """Sampled permittivity, linearly interpolated in log(omega)."""

    omega: tuple[float, ...]
    eps: tuple[complex, ...]
    _log_w: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        if w.size < 2:
            raise IngestionError("tabulated model needs at least two samples")
        if np.any(w <= 0) or np.any(np.diff(w) <= 0):
            raise IngestionError("tabulated frequencies must be positive and strictly increasing")
        if np.any(np.imag(np.asarray(self.eps)) < 0):
            raise IngestionError("tabulated Im eps must be non-negative")
        object.__setattr__(self, "_log_w", np.log(w))

    def epsilon(self, omega):
        w = np.asarray(omega)
        if np.iscomplexobj(w) and np.any(np.imag(w) != 0):
            raise FrequencyRangeError("tabulated data cannot be continued to complex frequency")
        w = np.real(w).astype(float)
        lo, hi = self.omega[0], self.omega[-1]
        if np.any(w < lo * (1 - 1e-12)) or np.any(w > hi * (1 + 1e-12)):
            raise FrequencyRangeError(f"frequency outside tabulated range [{lo:g}, {hi:g}] rad/s")
        x = np.log(np.clip(w, lo, hi))
        e = np.asarray(self.eps)
        re = np.interp(x, self._log_w, e.real)
        im = np.interp(x, self._log_w, e.imag)
        out = re + 1j * im
        return out if out.shape else complex(out)

    def features(self, omega_min: float = 1e9, omega_max: float = 1e17):
        return super().features(max(omega_min, self.omega[0]), min(omega_max, self.omega[-1]))


def ingest_tabulated(stream: str | io.TextIOBase) -> Tabulated:
    """Read ``omega_rad_per_s,re_eps,im_eps`` rows into a :class:`Tabulated` model.

    A single header row is allowed.  Errors report the 1-based row number.
    """
    text = stream if isinstance(stream, str) else stream.read()
    rows = list(csv.reader(io.StringIO(text)))
    omega: list[float] = []
    eps: list[complex] = []
    for num, row in enumerate(rows, start=1):
        cells = [c.strip() for c in row]
        if not cells or all(c == "" for c in cells) or cells[0].startswith("#"):
            continue
        if len(cells) != 3:
            raise IngestionError(f"row {num}: expected 3 columns, got {len(cells)}")
        try:
            w, re, im = (float(c) for c in cells)
        except ValueError:
            if num == 1 and not omega:
                continue  # header
            raise IngestionError(f"row {num}: cannot parse {row!r}") from None
        if not all(map(math.isfinite, (w, re, im))):
            raise IngestionError(f"row {num}: non-finite value")
        if w <= 0:
            raise IngestionError(f"row {num}: frequency must be positive")
        if omega and w <= omega[-1]:
            raise IngestionError(f"row {num}: frequencies must be strictly increasing")
        if im < 0:
            raise IngestionError(f"row {num}: Im eps = {im} violates passivity")
        omega.append(w)
        eps.append(complex(re, im))
    if len(omega) < 2:
        raise IngestionError("need at least two data rows")
    return Tabulated(tuple(omega), tuple(eps))


# ---------------------------------------------------------------------------
# shipped parameter sets

GOLD = Drude.from_ev(9.03, 2.67e-2)
ALUMINIUM = Drude.from_ev(12.04, 12.87e-2)
ALUMINIUM_DENSITY = 2700.0  # kg/m^3
SIC = SiCModel(6.7, 0.12 * EV, 0.098 * EV, 5.88e-4 * EV)
OSCILLATOR_PLATE = TwoOscillator(3.0, 1e13, 1e11, 1.0, 1e16, 5e14)
OSCILLATOR_SPHERE = TwoOscillator(1.5, 1.19e13, 1e11, 0.5, 1e16, 5e14)


def as_finite(model: OpticalModel) -> OpticalModel:
    """Replace a symbolic limit material by its finite numeric stand-in."""
    return model.finite_standin() if isinstance(model, PerfectMirror) else model


def epsilon(model: OpticalModel, omega):
    return model.epsilon(omega)


# ---------------------------------------------------------------------------
# thermal weights


def bose_occupation(T: float, omega):
    """Mean photon number 1/(exp(hbar w / k_B T) - 1); zero at T = 0."""
    w = np.asarray(omega, dtype=float)
    if T < 0:
        raise ValueError("temperature must be non-negative")
    if T == 0:
        return np.zeros_like(w) if w.shape else 0.0
    x = HBAR * w / (KB * T)
    with np.errstate(over="ignore"):
        n = 1.0 / np.expm1(x)
    return n if n.shape else float(n)


def thermal_wavelength(T: float) -> float:
    """lambda_T = hbar c / (k_B T)."""
    if T <= 0:
        raise ValueError("thermal wavelength needs T > 0")
    return HBAR * C0 / (KB * T)


@dataclass(frozen=True)
class ThermalContext:
    T: float

    def __post_init__(self):
        if self.T < 0:
            raise ValueError("temperature must be non-negative")

    @property
    def lambda_T(self) -> float:
        return thermal_wavelength(self.T)

    def occupation(self, omega):
        return bose_occupation(self.T, omega)


# ---------------------------------------------------------------------------
# low-frequency insulator expansion


@dataclass(frozen=True)
class InsulatorExpansion:
    """eps ~ eps0 + i lambda_in w/c and alpha ~ alpha0 + i alpha_i0 lambda_in w/c."""

    eps0: float
    lambda_in: float
    alpha0: float
    alpha_i0: float

    def as_model(self) -> LinearizedInsulator:
        return LinearizedInsulator(self.eps0, self.lambda_in)


def _low_window(model: OpticalModel) -> tuple[float, float]:
    if isinstance(model, Tabulated):
        return model.omega[0], min(10 * model.omega[0], model.omega[-1])
    poles = [w for w, _ in model.resonances()]
    w0 = min(poles) if poles else 1e13
    return 1e-4 * w0, 1e-3 * w0


def insulator_expansion(
    model: OpticalModel, R: float, window: Sequence[float] | None = None
) -> InsulatorExpansion:
    """Static permittivity and linear loss length of an insulator, plus sphere polarizabilities.

    ``lambda_in`` is the least-squares constant of Im eps(w) c / w over ``window``
    (default: the lowest resonance-free decade).
    """
    if model.is_conductor or model.is_limit:
        raise UnsupportedExpansionError(f"{type(model).__name__} has no finite static permittivity")
    if isinstance(model, LinearizedInsulator):
        eps0, lam = float(model.eps0), float(model.lambda_in)
    else:
        lo, hi = window if window is not None else _low_window(model)
        w = np.geomspace(lo, hi, 32)
        eps = np.asarray(model.epsilon(w))
        if np.any(np.abs(eps) > 1e6) or not np.all(np.isfinite(eps)):
            raise UnsupportedExpansionError("permittivity diverges at low frequency")
        y = eps.imag * C0 / w
        lam = float(np.mean(y))  # least squares for a constant
        # static value: extrapolate Re eps with the quadratic low-frequency form
        A = np.vstack([np.ones_like(w), (w / hi) ** 2]).T
        eps0 = float(np.linalg.lstsq(A, eps.real, rcond=None)[0][0])
    if eps0 <= 1:
        raise UnsupportedExpansionError(f"static permittivity {eps0} must exceed 1")
    return InsulatorExpansion(
        eps0=eps0,
        lambda_in=lam,
        alpha0=(eps0 - 1) / (eps0 + 2) * R**3,
        alpha_i0=3 * R**3 / (eps0 + 2) ** 2,
    )
