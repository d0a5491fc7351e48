"""End-to-end acceptance checks, one PASS/FAIL line per criterion.

Each test records its line through the ``report`` fixture and then asserts
the outcome, so a failing criterion shows up both in the summary block and
as a failed test.
"""

import math
import subprocess
import sys
import time
import warnings
from pathlib import Path

import numpy as np
import pytest
from scipy import constants as const

from neqcasimir.dynamics import (
    ForceField,
    count_bounces,
    find_levitation_points,
    hot_oscillator_sphere,
    integrate_trajectory,
    oscillation_period,
    shell_below_sic,
)
from neqcasimir.forces import (
    equilibrium_force,
    sphere_plate_force_interaction,
    sphere_plate_force_lowT,
    sphere_plate_force_self,
    sphere_sphere_force_dipole,
    sphere_sphere_force_interaction,
    sphere_sphere_force_lowT,
    sphere_sphere_force_self,
    total_force,
)
from neqcasimir.materials import (
    GOLD,
    MIRROR_EPSILON,
    ConstantPermittivity,
    LinearizedInsulator,
    thermal_wavelength,
)
from neqcasimir.radiation import (
    blackbody_flux,
    plate_emission,
    plate_emission_reflectivity,
    sphere_emission,
    sphere_emission_approx,
)
from neqcasimir.scattering import ValidityWarning
from neqcasimir.transfer import (
    SpherePlate,
    SphereSphere,
    TwoBodyConfig,
    sphere_plate_transfer_1refl,
    sphere_sphere_transfer_1refl,
    sphere_sphere_transfer_dipole,
    sphere_sphere_transfer_exact,
)
from neqcasimir.waves import green_oracle, green_partial_waves

HBAR, C, KB = const.hbar, const.c, const.k
TESTS = Path(__file__).resolve().parent


def _slope(x, y):
    return float(np.polyfit(np.log(x), np.log(np.abs(y)), 1)[0])


# 1 ------------------------------------------------------------------------


def test_green_function_expansion(report):
    rng = np.random.default_rng(7)
    omega = 1e15
    k = omega / C
    worst = 0.0
    t0 = time.perf_counter()
    n = 0
    while n < 50:
        rp = rng.normal(size=3)
        rp *= 0.2 / k / np.linalg.norm(rp)
        s = rng.normal(size=3)
        s *= rng.uniform(0.5, 10.0) / k / np.linalg.norm(s)
        r = rp + s
        # keep the source well inside the field point for l_max = 40
        if np.linalg.norm(r) < 2.5 * np.linalg.norm(rp):
            continue
        ref = green_oracle(r, rp, omega)
        got = green_partial_waves(r, rp, omega, 40)
        worst = max(worst, np.linalg.norm(got - ref) / np.linalg.norm(ref))
        n += 1
    dt = time.perf_counter() - t0
    ok = worst < 1e-6 and dt < 30
    report(1, ok, f"Green's expansion at 50 pairs, max rel err {worst:.2e}, {dt:.1f} s")
    assert ok


# 2 ------------------------------------------------------------------------


def test_blackbody_limit(report):
    errs = []
    for T in (10.0, 300.0, 2000.0):
        H = plate_emission_reflectivity(lambda kp, w: (np.zeros_like(kp), np.zeros_like(kp)), T)
        sigma_T4 = math.pi**2 * KB**4 / (60 * HBAR**3 * C**2) * T**4
        errs.append(abs(H / sigma_T4 - 1))
    ok = max(errs) < 1e-4
    report(2, ok, f"non-reflecting plate vs sigma T^4, max rel err {max(errs):.1e}")
    assert ok


# 3 ------------------------------------------------------------------------


def test_mirror_limits(report):
    mirror = ConstantPermittivity(MIRROR_EPSILON)
    T, R = 300.0, 1e-6
    plate = plate_emission(mirror, T=T) / blackbody_flux(T)
    sphere = sphere_emission(mirror, R, T).total / (4 * math.pi * R * R * blackbody_flux(T))
    ok = abs(plate) < 1e-6 and abs(sphere) < 1e-6
    report(3, ok, f"|eps| = 1e8 mirror: plate {plate:.1e}, sphere {sphere:.1e} of blackbody")
    assert ok


# 4 ------------------------------------------------------------------------


def test_gold_emission_curve(report):
    T = 300.0
    sig = blackbody_flux(T)
    lam = thermal_wavelength(T)
    t0 = time.perf_counter()
    radii = np.geomspace(10e-9, 2e-6, 12)
    H = np.array([sphere_emission(GOLD, R, T, rtol=1e-5).total for R in radii])
    area = H / (4 * math.pi * radii**2 * sig)
    volume = H / (4 / 3 * math.pi * radii**3 * sig)
    R_area = radii[np.argmax(area)]
    R_vol = radii[np.argmax(volume)]

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        pol = sphere_emission_approx("polarizability", GOLD, 100e-9, T)
    mie100 = sphere_emission(GOLD, 100e-9, T, rtol=1e-6).total
    pol_ratio = max(pol / mie100, mie100 / pol)

    dip_err = 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ValidityWarning)
        for R in radii[radii <= 0.1 * lam]:
            full = sphere_emission(GOLD, R, T, rtol=1e-6).total
            dip_err = max(dip_err, abs(sphere_emission_approx("dipole_full", GOLD, R, T) / full - 1))
    dt = time.perf_counter() - t0

    peak_ok = 50e-9 <= R_area <= 200e-9
    ok = peak_ok and pol_ratio > 2 and dip_err < 0.1 and dt < 300
    report(
        4,
        ok,
        f"gold sphere: area-normalized max at R = {R_area * 1e9:.0f} nm "
        f"(volume-normalized max at {R_vol * 1e9:.0f} nm), polarizability off by x{pol_ratio:.1f} at 100 nm, "
        f"l=1 vs Mie max dev {dip_err:.1%} for R <= 0.1 lambda_T, {dt:.0f} s",
    )
    assert ok


# 5 ------------------------------------------------------------------------


def test_transfer_symmetry_and_positivity(report):
    rng = np.random.default_rng(11)
    worst_sym = 0.0
    worst_neg = -np.inf
    zero = 0.0
    T = 400.0
    for _ in range(10):
        R1, R2 = rng.uniform(20e-9, 150e-9, 2)
        d = R1 + R2 + rng.uniform(0.2, 3.0) * (R1 + R2)
        m1 = ConstantPermittivity(complex(rng.uniform(-30, 15), rng.uniform(0.1, 15)))
        m2 = ConstantPermittivity(complex(rng.uniform(-30, 15), rng.uniform(0.1, 15)))
        geo = SphereSphere(R1, R2, d, m1, m2)
        fwd = sphere_sphere_transfer_exact(TwoBodyConfig(geo, T, 0.0), 5, rtol=1e-10)
        # sphere 2 at T radiating into sphere 1
        rev = sphere_sphere_transfer_exact(TwoBodyConfig(geo, T, 0.0), 5, reverse=True, rtol=1e-10)
        worst_sym = max(worst_sym, abs(fwd.H_1to2 - rev.H_1to2) / abs(fwd.H_1to2))
        for r in (fwd, rev):
            scale = np.abs(r.spectrum).max()
            worst_neg = max(worst_neg, -r.spectrum.min() / scale)
        zero = max(zero, abs(sphere_sphere_transfer_exact(TwoBodyConfig(geo, T, T), 5).H_1to2))
    ok = worst_sym < 1e-6 and worst_neg <= 1e-14 and zero == 0.0
    report(
        5,
        ok,
        f"10 random pairs: max |H12-H21|/H {worst_sym:.1e}, min integrand {-worst_neg:+.1e} x scale, "
        f"H(T,T) = {zero}",
    )
    assert ok


# 6 ------------------------------------------------------------------------


def test_dipole_ladder(report):
    m1 = ConstantPermittivity(3.0 + 1.0j)
    m2 = ConstantPermittivity(5.0 + 0.4j)
    devs = {}
    ss = TwoBodyConfig(SphereSphere(20e-9, 30e-9, 1e-6, m1, m2), 400.0, 300.0)
    devs["transfer"] = sphere_sphere_transfer_dipole(ss).H_1to2 / sphere_sphere_transfer_1refl(ss, 1, rtol=1e-8).H_1to2
    devs["ss interaction"] = sphere_sphere_force_dipole("interaction", ss) / sphere_sphere_force_interaction(ss, 1, rtol=1e-8)
    devs["ss self"] = sphere_sphere_force_dipole("self", ss) / sphere_sphere_force_self(ss, 1, rtol=1e-8)
    sp = TwoBodyConfig(SpherePlate(20e-9, 1e-6, m1, m2), 400.0, 300.0)
    devs["sp interaction"] = sphere_plate_force_interaction(sp, dipole=True, rtol=1e-8) / sphere_plate_force_interaction(
        sp, 1, rtol=1e-8
    )
    devs["sp self"] = sphere_plate_force_self(sp, dipole=True, rtol=1e-8) / sphere_plate_force_self(sp, 1, rtol=1e-8)
    worst = max(abs(v - 1) for v in devs.values())

    R1, R2 = 50e-9, 60e-9
    ratios = []
    for d in (20 * (R1 + R2), 30 * (R1 + R2)):
        cfg = TwoBodyConfig(SphereSphere(R1, R2, d, m1, m2), 400.0, 300.0)
        ex = sphere_sphere_transfer_exact(cfg, 3, rtol=1e-8).H_1to2
        one = sphere_sphere_transfer_1refl(cfg, 3, rtol=1e-8).H_1to2
        ratios.append(ex / one)
    ratio_dev = max(abs(r - 1) for r in ratios)
    ok = worst < 1e-3 and ratio_dev < 1e-2
    report(6, ok, f"dipole forms vs l=1 parents max dev {worst:.1e}; exact/one-reflection at d >= 20(R1+R2) within {ratio_dev:.1e}")
    assert ok


# 7 ------------------------------------------------------------------------


def test_power_laws(report):
    plate = ConstantPermittivity(3.0 + 1.0j)
    sphere = ConstantPermittivity(3.0 + 1.0j)
    T = 300.0
    lam = thermal_wavelength(T)

    def hev(R, d):
        cfg = TwoBodyConfig(SpherePlate(R, d, sphere, plate), T, 0.0)
        return sphere_plate_transfer_1refl(cfg, 1, rtol=1e-8).evanescent

    near = [lam / 80, lam / 50]
    s_near = _slope(near, [hev(near[0] / 20, d) for d in near])
    far = [15 * lam, 25 * lam]
    s_far = _slope(far, [hev(20e-9, d) for d in far])

    # sphere-sphere far field: sphere 1 hot, force on sphere 2
    ds = [20 * lam, 40 * lam]
    f_ss = []
    for d in ds:
        cfg = TwoBodyConfig(SphereSphere(50e-9, 50e-9, d, sphere, plate), T, 0.0)
        f_ss.append(sphere_sphere_force_dipole("interaction", cfg))
    s_ss = _slope(ds, f_ss)
    ss_repulsive = all(f < 0 for f in f_ss)

    # sphere-plate far field: hot plate, force on a cold sphere
    f_pr, f_ev = [], []
    for d in ds:
        cfg = TwoBodyConfig(SpherePlate(50e-9, d, sphere, plate), 0.0, T)
        pr, ev = sphere_plate_force_interaction(cfg, dipole=True, split=True, rtol=1e-8)
        f_pr.append(pr)
        f_ev.append(ev)
    s_sp_total = _slope(ds, np.add(f_pr, f_ev))
    s_sp_ev = _slope(ds, f_ev)
    sp_repulsive = all(p + e < 0 for p, e in zip(f_pr, f_ev))

    checks = {
        "Hev near": abs(s_near + 3) < 0.1,
        "Hev far": abs(s_far + 2) < 0.1,
        "ss force": abs(s_ss + 2) < 0.1 and ss_repulsive,
        "sp force": abs(s_sp_total + 2) < 0.1 and sp_repulsive,
    }
    ok = all(checks.values())
    failed = [k for k, v in checks.items() if not v]
    report(
        7,
        ok,
        f"slopes: Hev near {s_near:.3f}, Hev far {s_far:.3f}, sphere-sphere force {s_ss:.3f} "
        f"(repulsive {ss_repulsive}), sphere-plate force total {s_sp_total:.3f} with d-dependent "
        f"evanescent part {s_sp_ev:.3f} (repulsive {sp_repulsive})" + (f"; failed: {', '.join(failed)}" if failed else ""),
    )
    assert ok


# 8 ------------------------------------------------------------------------


def test_low_temperature_closed_forms(report):
    T = 300.0
    lam = thermal_wavelength(T)
    m1 = LinearizedInsulator(3.0, lam / 30)
    m2 = LinearizedInsulator(5.0, lam / 30)
    devs = {}
    cfg = TwoBodyConfig(SphereSphere(30e-9, 30e-9, 2e-6, m1, m2), T, 0.0)
    devs["FT"] = sphere_sphere_force_lowT("interaction", cfg) / sphere_sphere_force_dipole("interaction", cfg)

    def sp(R, d):
        return TwoBodyConfig(SpherePlate(R, d, m1, m2), 0.0, T)

    cfg = sp(30e-9, 10e-6)
    pr, _ = sphere_plate_force_interaction(cfg, dipole=True, split=True, rtol=1e-9)
    devs["propf"] = sphere_plate_force_lowT("propagating", cfg) / pr
    cfg = sp(30e-9, 1e-3)
    _, ev = sphere_plate_force_interaction(cfg, dipole=True, split=True, rtol=1e-9)
    devs["evf"] = sphere_plate_force_lowT("ev_far", cfg) / ev
    cfg = sp(10e-9, 0.1e-6)
    _, ev = sphere_plate_force_interaction(cfg, dipole=True, split=True, rtol=1e-9)
    devs["evc"] = sphere_plate_force_lowT("ev_near", cfg) / ev
    worst = max(abs(v - 1) for v in devs.values())
    ok = worst < 0.05
    report(8, ok, "low-T closed forms vs quadrature: " + ", ".join(f"{k} {abs(v - 1):.2%}" for k, v in devs.items()))
    assert ok


# 9 ------------------------------------------------------------------------


def test_equilibrium_cross_check(report):
    m1 = ConstantPermittivity(3.0 + 1.0j)
    m2 = ConstantPermittivity(5.0 + 0.4j)
    same = []
    for geo in (SphereSphere(30e-9, 40e-9, 1e-6, m1, m2), SpherePlate(30e-9, 1e-6, m1, m2)):
        cfg = TwoBodyConfig(geo, 300.0, 300.0, 300.0)
        same.append(total_force(cfg).F_total == equilibrium_force(cfg))
    eps = ConstantPermittivity(3.0)
    ds = [2e-6, 4e-6]
    F = [equilibrium_force(TwoBodyConfig(SphereSphere(10e-9, 10e-9, d, eps, eps), 0.0, 0.0, 0.0)) for d in ds]
    s = _slope(ds, F)
    ok = all(same) and abs(s + 8) < 0.1
    report(9, ok, f"total == equilibrium at common T: {all(same)}; T_env -> 0 sphere-sphere slope {s:.3f}")
    assert ok


# 10 -----------------------------------------------------------------------


@pytest.mark.slow
def test_levitated_shell_scenario(report):
    t0 = time.perf_counter()
    scn = shell_below_sic()
    ff = ForceField(scn, 0.5e-6, 10e-6, n0=13)
    pts = find_levitation_points(ff, (0.5e-6, 9e-6))
    stable = [d for d, kind in pts if kind == "stable" and 0.5e-6 <= d <= 5e-6]
    period = math.nan
    small = math.nan
    event = None
    if stable:
        ds = stable[0]
        # release 4 um further from the plate
        tr = integrate_trajectory(ff, scn.body.mass, (ds + 4e-6, 0.0, scn.T_s), 0.3)
        event = tr.event
        period = oscillation_period(tr) if tr.event is None else math.nan
        sm = integrate_trajectory(ff, scn.body.mass, (ds + 0.05e-6, 0.0, scn.T_s), 0.1)
        small = oscillation_period(sm)
    dt = time.perf_counter() - t0
    ok = bool(stable) and 5e-3 <= period <= 0.1 and dt < 1800
    where = f"{stable[0] * 1e6:.3f} um" if stable else "none"
    report(
        10,
        ok,
        f"shell below SiC: stable point {where}; release at d* + 4 um -> "
        + (f"period {period * 1e3:.1f} ms" if event is None else f"{event} after {tr.contact_time * 1e3:.2f} ms")
        + f"; small-oscillation period {small * 1e3:.1f} ms; {dt:.0f} s",
    )
    assert ok


# 11 -----------------------------------------------------------------------


@pytest.mark.slow
def test_hot_sphere_drop_scenario(report):
    t0 = time.perf_counter()
    scn = hot_oscillator_sphere()
    ff = ForceField(scn, 90e-9, 2e-6, n0=13, T_grid=[300, 340, 400, 500, 620, 760, 916], with_heat=True)
    m = scn.body.mass
    hot = integrate_trajectory(ff, m, (0.8e-6, 0.0, 916.0), 0.1, with_cooling=True)
    cold = integrate_trajectory(ff, m, (0.8e-6, 0.0, 300.0), 0.1, with_cooling=True)
    bounces = count_bounces(hot)
    ratio = hot.contact_time / cold.contact_time if hot.event == cold.event == "contact" else math.nan
    dt = time.perf_counter() - t0
    ok = bounces >= 1 and abs(ratio - 4) <= 2
    report(
        11,
        ok,
        f"hot sphere drop: {bounces} bounces, contact after {hot.contact_time * 1e3:.2f} ms (hot) "
        f"vs {cold.contact_time * 1e3:.3f} ms (300 K), ratio {ratio:.1f}; {dt:.0f} s",
    )
    assert ok


# 12 -----------------------------------------------------------------------


def test_property_suites_standalone(report):
    t0 = time.perf_counter()
    out = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-m", "property", "-p", "no:cacheprovider", str(TESTS / "test_properties.py")],
        capture_output=True,
        text=True,
    )
    dt = time.perf_counter() - t0
    tail = out.stdout.strip().splitlines()[-1] if out.stdout.strip() else out.stderr.strip()
    ok = out.returncode == 0 and dt < 120
    report(12, ok, f"property suites: {tail} in {dt:.1f} s")
    assert ok
