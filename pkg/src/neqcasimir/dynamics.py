"""Force balance and motion of a sphere in front of a plate.

Dynamics work with the force along increasing separation,
``F_d = -F_attractive + F_gravity_d``, so that ``m d'' = F_d``.  A zero of
``F_d`` is stable when ``dF_d/dd < 0``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, RectBivariateSpline
from scipy.optimize import brentq

from .forces import total_force
from .materials import (
    ALUMINIUM,
    ALUMINIUM_DENSITY,
    HBAR,
    KB,
    OSCILLATOR_PLATE,
    OSCILLATOR_SPHERE,
    SIC,
)
from .scattering import C0, ValidityWarning, _response
from .transfer import ConfigError, SpherePlate, TwoBodyConfig, sphere_plate_transfer_1refl

G_ACCEL = 9.81


@dataclass(frozen=True)
class BodySpec:
    """A solid sphere (``R_inner = 0``) or a spherical shell.

    ``orientation`` is ``'above'`` (gravity pulls toward the plate) or
    ``'below'`` (gravity pulls away from it).  Shells are treated optically
    as solid spheres of radius ``R``.
    """

    R: float
    density: float
    material: object
    R_inner: float = 0.0
    specific_heat: float = 800.0
    orientation: str = "above"

    def __post_init__(self):
        if self.R <= 0 or self.density <= 0:
            raise ConfigError("radius and density must be positive")
        if not 0 <= self.R_inner < self.R:
            raise ConfigError("shell inner radius must satisfy 0 <= R_inner < R")
        if self.orientation not in ("above", "below"):
            raise ConfigError("orientation must be 'above' or 'below'")

    @property
    def mass(self) -> float:
        return 4 / 3 * math.pi * (self.R**3 - self.R_inner**3) * self.density

    @property
    def heat_capacity(self) -> float:
        return self.specific_heat * self.mass

    def gravity_d(self, g: float = G_ACCEL) -> float:
        """Gravitational force along increasing d."""
        w = self.mass * g
        return -w if self.orientation == "above" else w


def skin_depth(material, omega: float) -> float:
    """c / (w Im sqrt(eps))."""
    n = np.sqrt(complex(_response(material, np.array([omega]))[0]))
    return C0 / (omega * n.imag) if n.imag > 0 else math.inf


@dataclass
class Scenario:
    """Sphere near a plate at fixed plate and environment temperatures."""

    body: BodySpec
    plate: object
    T_s: float
    T_p: float
    T_env: float
    method: str = "dipole"
    l_max: int | None = None
    g: float = G_ACCEL
    include_equilibrium: bool = True
    rtol: float = 1e-5
    notes: list[str] = field(default_factory=list)

    def __post_init__(self):
        if self.body.R_inner > 0:
            T = max(self.T_s, self.T_p, self.T_env)
            delta = skin_depth(self.body.material, 2.8 * KB * T / HBAR)
            if self.body.R - self.body.R_inner < 3 * delta:
                msg = f"shell wall {self.body.R - self.body.R_inner:.3g} m is below 3 skin depths ({delta:.3g} m)"
                warnings.warn(msg, ValidityWarning, stacklevel=2)
                self.notes.append(msg)

    @property
    def weight(self) -> float:
        return self.body.mass * self.g

    def config(self, d: float, T_s: float | None = None) -> TwoBodyConfig:
        geo = SpherePlate(self.body.R, d, self.body.material, self.plate)
        return TwoBodyConfig(geo, self.T_s if T_s is None else T_s, self.T_p, self.T_env)

    def casimir_d(self, d: float, T_s: float | None = None) -> float:
        """Casimir force along increasing d (positive = away from the plate)."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            fb = total_force(
                self.config(d, T_s), self.method, self.l_max, include_equilibrium=self.include_equilibrium, rtol=self.rtol
            )
        return -fb.F_total

    def heat_to_plate(self, d: float, T_s: float | None = None) -> float:
        """H^{s->p} at one-reflection order."""
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ValidityWarning)
            res = sphere_plate_transfer_1refl(self.config(d, T_s), l_max=self.l_max or 1, rtol=1e-5)
        return res.H_1to2


def force_profile(scn: Scenario, d_grid: Sequence[float]) -> list[dict]:
    """Rows {d_m, F_d_N, F_over_FG, interaction, self, equilibrium, gravity, error}.

    ``F_d`` includes gravity and is positive away from the plate;
    ``F_over_FG`` is the force toward the plate divided by the weight.
    """
    rows = []
    grav = scn.body.gravity_d(scn.g)
    for d in d_grid:
        row = {"d_m": float(d), "gravity": grav, "error": None}
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", ValidityWarning)
                fb = total_force(
                    scn.config(d), scn.method, scn.l_max, include_equilibrium=scn.include_equilibrium, rtol=scn.rtol
                )
            row.update(
                interaction=fb.F_interaction_from_other,
                self=fb.F_self,
                equilibrium=fb.F_equilibrium,
                F_d_N=grav - fb.F_total,
            )
            row["F_over_FG"] = -row["F_d_N"] / scn.weight
        except (ArithmeticError, RuntimeError, ValueError) as exc:
            row.update(interaction=math.nan, self=math.nan, equilibrium=math.nan, F_d_N=math.nan, F_over_FG=math.nan)
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# cached force field


class ForceField:
    """Cubic interpolant of the Casimir force (and optionally H^{s->p}) on log d.

    With ``T_grid`` the force and heat flow are tabulated on (log d, T_s).
    The d-grid is refined by midpoint bisection until the interpolation
    error at midpoints is below ``tol`` times max(|F|, weight) locally.
    """

    def __init__(
        self,
        scn: Scenario,
        d_min: float,
        d_max: float,
        *,
        n0: int = 17,
        tol: float = 5e-3,
        T_grid: Sequence[float] | None = None,
        with_heat: bool = False,
        max_points: int = 200,
    ):
        if not d_max > d_min > scn.body.R:
            raise ConfigError("force grid must satisfy R < d_min < d_max")
        self.scn = scn
        self.T_grid = None if T_grid is None else np.asarray(sorted(T_grid), dtype=float)
        self.with_heat = with_heat
        self._cache: dict[float, np.ndarray] = {}
        x = np.linspace(math.log(d_min), math.log(d_max), n0)
        self._refine(x, tol, max_points)

    def _eval(self, x: float) -> np.ndarray:
        if x not in self._cache:
            d = math.exp(x)
            Ts = [self.scn.T_s] if self.T_grid is None else list(self.T_grid)
            F = [self.scn.casimir_d(d, T) for T in Ts]
            H = [self.scn.heat_to_plate(d, T) for T in Ts] if self.with_heat else [0.0] * len(Ts)
            self._cache[x] = np.array([F, H])
        return self._cache[x]

    def _table(self, x) -> np.ndarray:
        return np.array([self._eval(v) for v in x])  # (n, 2, nT)

    def _refine(self, x, tol, max_points):
        weight = self.scn.weight
        while True:
            spl = CubicSpline(x, self._table(x)[:, 0, :], axis=0)
            mid = 0.5 * (x[1:] + x[:-1])
            fm = np.array([self._eval(v)[0] for v in mid])
            scale = np.maximum(np.abs(fm), weight)
            bad = np.max(np.abs(spl(mid) - fm) / scale, axis=1) > tol
            x = np.sort(np.concatenate([x, mid[bad]]))
            if not bad.any():
                break
            if x.size > max_points:
                warnings.warn("force grid refinement stopped at the point limit", RuntimeWarning, stacklevel=3)
                break
        self.x = x
        vals = self._table(x)
        self._F = vals[:, 0, :]
        self._H = vals[:, 1, :]
        if self.T_grid is None:
            self._fs = CubicSpline(x, self._F[:, 0])
            self._hs = CubicSpline(x, self._H[:, 0])
        else:
            k = min(3, self.T_grid.size - 1)
            self._fs = RectBivariateSpline(x, self.T_grid, self._F, kx=3, ky=k)
            self._hs = RectBivariateSpline(x, self.T_grid, self._H, kx=3, ky=k)

    @property
    def d_min(self) -> float:
        return math.exp(self.x[0])

    @property
    def d_max(self) -> float:
        return math.exp(self.x[-1])

    def _clip_T(self, T):
        return float(np.clip(T, self.T_grid[0], self.T_grid[-1]))

    def casimir(self, d: float, T_s: float | None = None) -> float:
        x = math.log(d)
        if self.T_grid is None:
            return float(self._fs(x))
        return float(self._fs(x, self._clip_T(T_s), grid=False))

    def heat(self, d: float, T_s: float | None = None) -> float:
        x = math.log(d)
        if self.T_grid is None:
            return float(self._hs(x))
        return float(self._hs(x, self._clip_T(T_s), grid=False))

    def force_d(self, d: float, T_s: float | None = None) -> float:
        """Total force along increasing d, including gravity."""
        return self.casimir(d, T_s) + self.scn.body.gravity_d(self.scn.g)


# ---------------------------------------------------------------------------
# levitation points


def find_levitation_points(
    force: Callable[[float], float] | Scenario | ForceField,
    d_range: tuple[float, float],
    *,
    n_scan: int = 41,
    rtol: float = 1e-6,
) -> list[tuple[float, str]]:
    """Zeros of the force along d in ``d_range`` with their stability.

    ``force`` is a callable F_d(d), a :class:`ForceField` or a
    :class:`Scenario` (evaluated directly, including gravity).
    """
    if isinstance(force, ForceField):
        f = force.force_d
    elif isinstance(force, Scenario):
        scn = force
        grav = scn.body.gravity_d(scn.g)
        f = lambda d: scn.casimir_d(d) + grav  # noqa: E731
    else:
        f = force
    lo, hi = d_range
    grid = np.geomspace(lo, hi, n_scan) if lo > 0 else np.linspace(lo, hi, n_scan)
    vals = np.array([f(d) for d in grid])
    out = []
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if fa == 0:
            root = a
        elif fa * fb < 0:
            root = brentq(f, a, b, xtol=rtol * a, rtol=rtol)
        else:
            continue
        # F_d decreasing through the zero restores the sphere
        out.append((float(root), "stable" if fb < fa else "unstable"))
    return out


# ---------------------------------------------------------------------------
# trajectories


class StepFloorError(RuntimeError):
    """Integration failed; ``state`` holds the last accepted state."""

    def __init__(self, msg, state):
        super().__init__(msg)
        self.state = state


@dataclass
class Trajectory:
    t: np.ndarray
    d: np.ndarray
    v: np.ndarray
    T_s: np.ndarray
    event: str | None

    @property
    def contact_time(self) -> float | None:
        return float(self.t[-1]) if self.event == "contact" else None

    def rows(self):
        return [
            {"t_s": float(a), "d_m": float(b), "v_mps": float(c), "Ts_K": float(e)}
            for a, b, c, e in zip(self.t, self.d, self.v, self.T_s)
        ]


def integrate_trajectory(
    field: ForceField | Callable[[float, float], float],
    mass: float,
    state0: tuple[float, float, float],
    t_end: float,
    *,
    with_cooling: bool = False,
    heat: Callable[[float, float], float] | None = None,
    heat_capacity: float | None = None,
    d_contact: float | None = None,
    d_escape: float | None = None,
    rtol: float = 1e-9,
    atol: tuple[float, float, float] | None = None,
    max_step: float = math.inf,
    n_samples: int = 2000,
) -> Trajectory:
    """Integrate m d'' = F_d(d, T_s) and, with cooling, T_s' = -H^{s->p}(d, T_s)/kappa.

    ``state0 = (d, v, T_s)``.  Contact (d = d_contact) and escape
    (d = d_escape) terminate the run.
    """
    if isinstance(field, ForceField):
        F = field.force_d
        heat = heat or field.heat
        heat_capacity = heat_capacity or field.scn.body.heat_capacity
        d_contact = field.d_min if d_contact is None else d_contact
        d_escape = field.d_max if d_escape is None else d_escape
    else:
        F = field
    if with_cooling and (heat is None or not heat_capacity):
        raise ConfigError("cooling needs a heat-flow function and a heat capacity")
    d_contact = 0.0 if d_contact is None else d_contact
    d_escape = math.inf if d_escape is None else d_escape
    if not d_contact < state0[0] < d_escape:
        raise ConfigError("initial separation outside the integration window")

    def rhs(t, y):
        d, v, T = y
        d = min(max(d, d_contact), d_escape)
        dT = -heat(d, T) / heat_capacity if with_cooling else 0.0
        return [v, F(d, T) / mass, dT]

    def contact(t, y):
        return y[0] - d_contact

    contact.terminal, contact.direction = True, -1

    def escape(t, y):
        return y[0] - d_escape

    escape.terminal, escape.direction = True, 1
    scale = abs(state0[0])
    atol = atol or (1e-12 * scale, 1e-12 * scale / 1e-3, 1e-9 * max(state0[2], 1.0))
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        list(state0),
        method="DOP853",
        rtol=rtol,
        atol=atol,
        events=[contact, escape],
        dense_output=True,
        max_step=max_step,
    )
    if sol.status == -1:
        raise StepFloorError(sol.message, sol.y[:, -1])
    event = None
    t_last = sol.t[-1]
    if sol.t_events[0].size:
        event = "contact"
    elif sol.t_events[1].size:
        event = "escape"
    ts = np.linspace(0.0, t_last, n_samples)
    y = sol.sol(ts)
    return Trajectory(ts, y[0], y[1], y[2], event)


def oscillation_period(traj: Trajectory) -> float:
    """Mean period from successive maxima of d(t)."""
    d = traj.d
    idx = np.where((d[1:-1] > d[:-2]) & (d[1:-1] >= d[2:]))[0] + 1
    if idx.size < 2:
        # fall back on minima
        idx = np.where((d[1:-1] < d[:-2]) & (d[1:-1] <= d[2:]))[0] + 1
    if idx.size < 2:
        return math.nan
    return float(np.mean(np.diff(traj.t[idx])))


def count_bounces(traj: Trajectory) -> int:
    """Number of turning points where the sphere moves back away from the plate."""
    v = traj.v
    return int(np.sum((v[:-1] < 0) & (v[1:] >= 0)))


# ---------------------------------------------------------------------------
# reference scenarios


def shell_below_sic(T_env: float = 2862.0, T_s: float = 300.0) -> Scenario:
    """Aluminium shell (73/23 nm) hanging below a SiC plate at 300 K."""
    body = BodySpec(73e-9, ALUMINIUM_DENSITY, ALUMINIUM, R_inner=23e-9, orientation="below")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        return Scenario(body, SIC, T_s, 300.0, T_env)


def hot_oscillator_sphere(T_s: float = 916.0) -> Scenario:
    """Oscillator sphere (R = 60 nm, 2 g/cm^3) above an oscillator plate at 300 K."""
    body = BodySpec(60e-9, 2000.0, OSCILLATOR_SPHERE, specific_heat=800.0, orientation="above")
    return Scenario(body, OSCILLATOR_PLATE, T_s, 300.0, 300.0)


__all__ = [
    "G_ACCEL",
    "BodySpec",
    "Scenario",
    "ForceField",
    "Trajectory",
    "StepFloorError",
    "skin_depth",
    "force_profile",
    "find_levitation_points",
    "integrate_trajectory",
    "oscillation_period",
    "count_bounces",
    "shell_below_sic",
    "hot_oscillator_sphere",
]
