"""Integration engines shared by radiation, transfer and force calculations.

The frequency integrals are smooth apart from material resonances, so the
workhorse is a batched adaptive Gauss-Kronrod (7/15) rule that evaluates all
pending panels in one vectorized call.  The final composite rule is returned
so that kernels sampled once can be re-weighted for other temperatures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import constants as const
from scipy.special import spherical_jn

HBAR = const.hbar
KB = const.k
C0 = const.c

X_MIN, X_MAX = 1e-4, 45.0

_XGK = np.array(
    [
        0.991455371120812639206854697526329,
        0.949107912342758524526189684047851,
        0.864864423359769072789712788640926,
        0.741531185599394439863864773280788,
        0.586087235467691130294144845693013,
        0.405845151377397166906606412076961,
        0.207784955007898467600689403773245,
        0.000000000000000000000000000000000,
    ]
)
_WGK = np.array(
    [
        0.022935322010529224963732008058970,
        0.063092092629978553290700663189204,
        0.104790010322250183839876322541518,
        0.140653259715525918745189590510238,
        0.169004726639267902826583426598550,
        0.190350578064785409913256402421014,
        0.204432940075298892414161999234649,
        0.209482141084727828012999174891714,
    ]
)
_WG = np.array(
    [
        0.129484966168869693270611432679082,
        0.279705391489276667901467771423780,
        0.381830050505118944950369775488975,
        0.417959183673469387755102040816327,
    ]
)
NODES15 = np.concatenate([-_XGK[:-1], _XGK[::-1]])
WK15 = np.concatenate([_WGK[:-1], _WGK[::-1]])
WG7 = np.zeros(15)
WG7[1:7:2] = _WG[:3]
WG7[7] = _WG[3]
WG7[9:15:2] = _WG[2::-1]


@dataclass
class QuadResult:
    """Value, conservative error estimate and the composite rule actually used."""

    value: np.ndarray | float
    error: np.ndarray | float
    converged: bool
    nodes: np.ndarray = field(repr=False, default=None)
    weights: np.ndarray = field(repr=False, default=None)
    n_evals: int = 0

    def reweight(self, samples: np.ndarray) -> np.ndarray:
        """Integrate other samples taken at ``nodes`` with the same rule."""
        return np.tensordot(self.weights, samples, axes=(0, 0))


def _panel_rule(a: np.ndarray, b: np.ndarray):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    x = c[:, None] + h[:, None] * NODES15[None, :]
    return x, h


def adaptive_gk(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    *,
    points: Sequence[float] = (),
    rtol: float = 1e-8,
    atol: float = 0.0,
    max_panels: int = 4000,
    initial: int = 1,
) -> QuadResult:
    """Adaptive Gauss-Kronrod G7/K15 quadrature of a vector-valued integrand.

    ``f`` receives a 1-D array of abscissae and returns an array of shape
    ``(n,) + out_shape``.  Panels are refined by bisection in a fixed,
    position-ordered manner, so results are reproducible bit for bit.
    The error of each panel is |K15 - G7| summed over panels, which is
    conservative for smooth integrands.
    """
    if not b > a:
        raise ValueError("need b > a")
    edges = [a] + sorted(p for p in points if a < p < b) + [b]
    edges = np.asarray(edges, dtype=float)
    if initial > 1:
        edges = np.unique(np.concatenate([np.linspace(edges[i], edges[i + 1], initial + 1) for i in range(len(edges) - 1)]))
    done_lo, done_hi, done_K, done_E = [], [], [], []
    pend_lo, pend_hi = edges[:-1], edges[1:]
    n_evals = 0
    converged = False
    while True:
        x, h = _panel_rule(pend_lo, pend_hi)
        vals = np.asarray(f(x.reshape(-1)))
        n_evals += x.size
        vals = vals.reshape(x.shape + vals.shape[1:])
        K = np.tensordot(WK15, vals, axes=(0, 1)) * h.reshape((-1,) + (1,) * (vals.ndim - 2))
        G = np.tensordot(WG7, vals, axes=(0, 1)) * h.reshape((-1,) + (1,) * (vals.ndim - 2))
        E = np.abs(K - G)
        lo = np.concatenate([np.asarray(done_lo), pend_lo]) if done_lo else pend_lo
        hi = np.concatenate([np.asarray(done_hi), pend_hi]) if done_hi else pend_hi
        allK = np.concatenate([np.asarray(done_K).reshape((-1,) + K.shape[1:]), K]) if done_K else K
        allE = np.concatenate([np.asarray(done_E).reshape((-1,) + E.shape[1:]), E]) if done_E else E
        order = np.argsort(lo, kind="stable")
        lo, hi, allK, allE = lo[order], hi[order], allK[order], allE[order]
        total = allK.sum(axis=0)
        scale = np.maximum(rtol * np.abs(total), atol)
        scale = np.where(scale > 0, scale, np.finfo(float).tiny)
        norm_err = (allE / scale).reshape(len(lo), -1).max(axis=1)
        if norm_err.sum() <= 1.0:
            converged = True
            break
        if len(lo) >= max_panels:
            break
        # bisect the worst panels until the untouched ones fit the budget
        idx = np.argsort(-norm_err, kind="stable")
        cum = np.cumsum(norm_err[idx])
        remaining = norm_err.sum() - cum
        n_split = int(np.searchsorted(-remaining, -0.5) + 1)
        n_split = max(1, min(n_split, len(idx), max_panels - len(lo)))
        split = np.zeros(len(lo), dtype=bool)
        split[idx[:n_split]] = True
        keep = ~split
        done_lo, done_hi = list(lo[keep]), list(hi[keep])
        done_K, done_E = list(allK[keep]), list(allE[keep])
        mid = 0.5 * (lo[split] + hi[split])
        pend_lo = np.concatenate([lo[split], mid])
        pend_hi = np.concatenate([mid, hi[split]])
    x, h = _panel_rule(lo, hi)
    nodes = x.reshape(-1)
    weights = (h[:, None] * WK15[None, :]).reshape(-1)
    err = allE.sum(axis=0)
    if np.ndim(total) == 0:
        total, err = float(total), float(err)
    return QuadResult(total, err, converged, nodes, weights, n_evals)


# ---------------------------------------------------------------------------
# Filon-Legendre panels for integrands f(x) + Re[g(x) exp(i kappa x)]


def _legendre_moments(kmax: int, w: float) -> np.ndarray:
    """int_{-1}^{1} P_k(t) e^{i w t} dt = 2 i^k j_k(w), k = 0..kmax."""
    k = np.arange(kmax + 1)
    return 2.0 * (1j**k) * spherical_jn(k, w)


def _filon_panel(g: Callable, kappa: float, a: float, b: float, n: int) -> complex:
    t, wt = np.polynomial.legendre.leggauss(n)
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    vals = np.asarray(g(c + h * t), dtype=complex)
    V = np.polynomial.legendre.legvander(t, n - 1)
    norms = (2 * np.arange(n) + 1) / 2.0
    coef = norms[:, None] * (V * wt[:, None]).T @ vals.reshape(n, -1)
    mom = _legendre_moments(n - 1, kappa * h)
    return h * np.exp(1j * kappa * c) * (mom @ coef).reshape(vals.shape[1:])


def integrate_oscillatory(
    smooth: Callable | None,
    envelope: Callable,
    kappa: float,
    a: float,
    b: float,
    *,
    rtol: float = 1e-8,
    atol: float = 0.0,
    max_panels: int = 4000,
) -> QuadResult:
    """int_a^b [smooth(x) + Re(envelope(x) e^{i kappa x})] dx.

    Panels narrow enough that kappa * width <= pi/4 are integrated with G7K15;
    wider panels switch to Filon-Legendre interpolation of the envelope with
    16 and 8 nodes, whose difference serves as the error estimate.
    """
    edges = [(a, b)]
    total = 0.0
    err = 0.0
    n_panels = 0
    converged = True
    stack = [(a, b)]
    pieces = []
    while stack:
        lo, hi = stack.pop()
        n_panels += 1
        w = hi - lo
        if kappa * w <= math.pi / 4:
            fun = lambda x: (smooth(x) if smooth else 0.0) + np.real(envelope(x) * np.exp(1j * kappa * x))  # noqa: E731
            r = adaptive_gk(fun, lo, hi, rtol=rtol, atol=atol / 4, max_panels=64)
            pieces.append((lo, r.value, r.error))
            converged &= r.converged
            continue
        fine = _filon_panel(envelope, kappa, lo, hi, 16).real
        coarse = _filon_panel(envelope, kappa, lo, hi, 8).real
        if smooth is not None:
            r = adaptive_gk(smooth, lo, hi, rtol=rtol, max_panels=64)
            fine, coarse = fine + r.value, coarse + r.value
        e = np.max(np.abs(fine - coarse))
        tol_here = max(rtol * np.max(np.abs(fine)), atol * w / (b - a))
        if e <= tol_here or n_panels > max_panels:
            converged &= e <= tol_here
            pieces.append((lo, fine, e))
        else:
            mid = 0.5 * (lo + hi)
            stack.extend([(mid, hi), (lo, mid)])
    pieces.sort(key=lambda p: p[0])
    for _, v, e in pieces:
        total = total + v
        err = err + e
    del edges
    return QuadResult(total, err, converged, None, None, n_panels)


# ---------------------------------------------------------------------------
# frequency integrals


def thermal_window(temperatures: Sequence[float]) -> tuple[float, float]:
    """Frequency window covering x = hbar w / k_B T in [1e-4, 45] for all T > 0."""
    Ts = [T for T in temperatures if T > 0]
    if not Ts:
        raise ValueError("at least one positive temperature is required")
    return X_MIN * KB * min(Ts) / HBAR, X_MAX * KB * max(Ts) / HBAR


def integrate_spectrum(
    f: Callable[[np.ndarray], np.ndarray],
    T: float,
    *,
    rtol: float = 1e-8,
    atol: float = 0.0,
    points: Sequence[float] = (),
) -> tuple[float, float]:
    """int f(x) dx over the reduced frequency x = hbar w / k_B T in [1e-4, 45].

    ``points`` are breakpoints in the same reduced variable.
    """
    del T  # the substitution is done by the caller's f
    r = adaptive_gk(f, X_MIN, X_MAX, points=points, rtol=rtol, atol=atol)
    return r.value, r.error


def frequency_rule(
    kernel: Callable[[np.ndarray], np.ndarray],
    temperatures: Sequence[float],
    *,
    features: Sequence[tuple[float, float]] = (),
    rtol: float = 1e-6,
    max_panels: int = 2000,
) -> tuple[QuadResult, np.ndarray]:
    """Sample ``kernel(omega)`` adaptively for Bose weights at all given temperatures.

    The integrand driving refinement is omega * n(omega, T) * kernel for
    every temperature at once (vector-valued), so the returned rule and
    samples can be re-weighted for any of those temperatures, or any
    temperature in between.  Returns ``(rule, samples)`` with samples
    shaped ``(n_nodes,) + kernel_shape``.
    """
    lo, hi = thermal_window(temperatures)
    Ts = np.array([T for T in temperatures if T > 0], dtype=float)
    pts = []
    for w0, width in features:
        if lo < w0 < hi:
            pts.extend([w0 - 3 * width, w0, w0 + 3 * width])
    cache: dict[float, np.ndarray] = {}

    def driver(w):
        k = np.asarray(kernel(w))
        for wi, ki in zip(w, k):
            cache[float(wi)] = ki
        occ = 1.0 / np.expm1(np.clip(HBAR * w[:, None] / (KB * Ts[None, :]), None, 700))
        weight = w[:, None] * occ
        kk = k.reshape(len(w), -1)
        return (weight[:, :, None] * kk[:, None, :]).reshape(len(w), -1)

    rule = adaptive_gk(driver, lo, hi, points=pts, rtol=rtol, max_panels=max_panels, initial=8)
    samples = np.array([cache[float(x)] for x in rule.nodes])
    return rule, samples


# ---------------------------------------------------------------------------
# transverse wave-vector integrals


def _gl_panels(edges: np.ndarray, n: int):
    t, w = np.polynomial.legendre.leggauss(n)
    a, b = edges[:-1], edges[1:]
    x = (0.5 * (a + b))[:, None] + (0.5 * (b - a))[:, None] * t[None, :]
    wt = (0.5 * (b - a))[:, None] * w[None, :]
    return x.reshape(-1), wt.reshape(-1)


EV_CUTOFF = 40.0


def propagating_rule(omega: float, d: float = 0.0, n: int = 12):
    """Nodes over k_perp < omega/c carrying the measure d^2k_perp/(2 pi)^2.

    Parameterized by k_z in (0, omega/c], where the measure is
    k_z dk_z / (2 pi); panels are graded toward grazing incidence and,
    when an e^{2 i k_z d} factor is expected, kept narrower than a quarter
    oscillation.  Returns ``(k_perp, k_z, weights)``.
    """
    k0 = omega / C0
    s_edges = [0.0, 1 / 256, 1 / 64, 1 / 16, 1 / 4, 1.0]
    n_osc = int(math.ceil(2 * k0 * d / (math.pi / 2))) if d > 0 else 0
    if n_osc > 4:
        s_edges = sorted(set(s_edges[:-1] + list(np.linspace(1 / 4, 1.0, n_osc + 1))))
    s, ws = _gl_panels(np.asarray(s_edges), n)
    kz = s * k0
    kp = k0 * np.sqrt(np.clip(1 - s * s, 0.0, None))
    return kp, kz, ws * k0 * kz / (2 * np.pi)


def evanescent_rule(omega: float, d: float, n: int = 12, cutoff: float = EV_CUTOFF):
    """Nodes over k_perp > omega/c carrying the measure d^2k_perp/(2 pi)^2.

    Parameterized by u = |k_z| d in (0, cutoff] with measure
    u du / (2 pi d^2); geometric panels resolve both the e^{-2u} decay and
    the region just above the light line.  Returns ``(k_perp, kappa, weights)``
    with kappa = |k_z|.
    """
    if d <= 0:
        raise ValueError("evanescent integrals need d > 0")
    k0 = omega / C0
    edges = np.array([0.0, 1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.6, 1.5, 3.0, 6.0, 12.0, 20.0, cutoff])
    edges = edges[edges <= cutoff]
    u, wu = _gl_panels(edges, n)
    kappa = u / d
    kp = np.sqrt(k0 * k0 + kappa * kappa)
    return kp, kappa, wu * u / (2 * np.pi * d * d)


def integrate_kperp(f: Callable[[np.ndarray], np.ndarray], omega: float, d: float, split: bool = True):
    """Propagating and evanescent parts of int d^2k_perp/(2 pi)^2 f(k_perp).

    Returns ``(pr, ev, err)``; ``err`` compares against a rule with half as
    many nodes per panel.
    """
    kp, _, w = propagating_rule(omega, d)
    pr = np.tensordot(w, f(kp), axes=(0, 0))
    kp2, _, w2 = propagating_rule(omega, d, n=6)
    pr2 = np.tensordot(w2, f(kp2), axes=(0, 0))
    ev = ev2 = 0.0
    if d > 0:
        ke, _, we = evanescent_rule(omega, d)
        ev = np.tensordot(we, f(ke), axes=(0, 0))
        ke2, _, we2 = evanescent_rule(omega, d, n=6)
        ev2 = np.tensordot(we2, f(ke2), axes=(0, 0))
    err = np.abs(pr - pr2) + np.abs(ev - ev2)
    if not split:
        return pr + ev, err
    return pr, ev, err


# ---------------------------------------------------------------------------
# truncation policy


def auto_lmax(R: float, d_s: float | None, lambda_T: float | None, c1: float = 5.0, c2: float = 5.0) -> int:
    """Seed multipole order: max(8, ceil(c1 R/d_s), ceil(c2 R/lambda_T))."""
    if R <= 0:
        raise ValueError("R must be positive")
    seed = 8
    if d_s is not None:
        if d_s <= 0:
            raise ValueError("surface separation must be positive")
        seed = max(seed, math.ceil(c1 * R / d_s - 1e-9))
    if lambda_T is not None:
        if lambda_T <= 0:
            raise ValueError("thermal wavelength must be positive")
        seed = max(seed, math.ceil(c2 * R / lambda_T - 1e-9))
    return int(seed)
