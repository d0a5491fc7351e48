import math

import numpy as np
import pytest
from scipy import constants as const

from neqcasimir.forces import (
    equilibrium_force,
    sp_interaction_kernel,
    sp_interaction_kernel_dipole,
    sp_self_kernel,
    sp_self_kernel_dipole,
    sphere_plate_force_interaction,
    sphere_plate_force_lowT,
    sphere_sphere_force_dipole,
    sphere_sphere_force_lowT,
    ss_interaction_kernel,
    ss_interaction_kernel_dipole,
    ss_self_kernel,
    ss_self_kernel_dipole,
    static_plate_factor,
    thermal_integral,
    total_force,
)
from neqcasimir.materials import MIRROR_EPSILON, ConstantPermittivity, LinearizedInsulator
from neqcasimir.transfer import SpherePlate, SphereSphere, TwoBodyConfig

HBAR, C = const.hbar, const.c
M1 = ConstantPermittivity(3.0 + 1.0j)
M2 = ConstantPermittivity(5.0 + 0.4j)
W = np.geomspace(1e12, 3e15, 11)


@pytest.mark.parametrize("d", [0.2e-6, 3e-6, 60e-6])
def test_sphere_sphere_kernels_reduce_to_dipole(d):
    geo = SphereSphere(20e-9, 30e-9, d, M1, M2)
    assert np.allclose(ss_interaction_kernel(geo, W, 1), ss_interaction_kernel_dipole(geo, W), rtol=1e-9)
    assert np.allclose(ss_self_kernel(geo, W, 1), ss_self_kernel_dipole(geo, W), rtol=1e-9)


@pytest.mark.parametrize("d", [0.3e-6, 5e-6])
def test_sphere_plate_kernels_reduce_to_dipole(d):
    geo = SpherePlate(20e-9, d, M1, M2)
    a = sp_interaction_kernel(geo, W, 1)
    b = sp_interaction_kernel_dipole(geo, W)
    assert np.allclose(a, b, rtol=1e-8, atol=1e-12 * np.abs(b).max())
    assert np.allclose(sp_self_kernel(geo, W, 1), sp_self_kernel_dipole(geo, W), rtol=1e-8)


def test_thermal_integral_vanishes_at_equal_temperatures():
    assert thermal_integral(lambda w: np.ones_like(w), 300.0, 300.0) == 0.0


def test_static_plate_factor_limits():
    assert static_plate_factor(1.0) == pytest.approx(1.0)
    assert 0 < static_plate_factor(5.0) < 1


def test_casimir_polder_sphere_sphere():
    eps = 3.0
    R, d = 10e-9, 2e-6
    geo = SphereSphere(R, R, d, ConstantPermittivity(eps), ConstantPermittivity(eps))
    F = equilibrium_force(TwoBodyConfig(geo, 0, 0, 0.0))
    alpha = (eps - 1) / (eps + 2) * R**3
    assert F == pytest.approx(161 * HBAR * C * alpha**2 / (4 * math.pi * d**8), rel=1e-3)


def test_casimir_polder_sphere_mirror():
    eps = 3.0
    R, d = 10e-9, 2e-6
    geo = SpherePlate(R, d, ConstantPermittivity(eps), ConstantPermittivity(MIRROR_EPSILON))
    F = equilibrium_force(TwoBodyConfig(geo, 0, 0, 0.0))
    alpha = (eps - 1) / (eps + 2) * R**3
    assert F == pytest.approx(3 * HBAR * C * alpha / (2 * math.pi * d**5), rel=1e-3)


def test_hot_black_plate_repels_in_far_field():
    geo = SpherePlate(50e-9, 40e-6, M1, ConstantPermittivity(2.0 + 2.0j))
    pr, ev = sphere_plate_force_interaction(TwoBodyConfig(geo, 0.0, 600.0), dipole=True, split=True)
    assert pr < 0


def test_assembly_at_common_temperature():
    geo = SphereSphere(30e-9, 30e-9, 1e-6, M1, M2)
    cfg = TwoBodyConfig(geo, 300.0, 300.0, 300.0)
    fb = total_force(cfg)
    assert fb.F_interaction_from_other == 0.0 and fb.F_self == 0.0
    assert fb.F_total == fb.F_equilibrium == equilibrium_force(cfg)
    with pytest.raises(ValueError):
        total_force(cfg, method="exact")


def test_bad_term_names():
    lin = LinearizedInsulator(3.0, 1e-7)
    cfg = TwoBodyConfig(SphereSphere(10e-9, 10e-9, 1e-6, lin, lin), 300.0, 300.0)
    with pytest.raises(ValueError):
        sphere_sphere_force_dipole("both", cfg)
    with pytest.raises(ValueError):
        sphere_sphere_force_lowT("far", cfg)
    cfgp = TwoBodyConfig(SpherePlate(10e-9, 1e-6, lin, lin), 300.0, 300.0)
    with pytest.raises(ValueError):
        sphere_plate_force_lowT("mid", cfgp)


def test_low_t_interaction_matches_quadrature():
    T = 300.0
    lam = HBAR * C / (const.k * T)
    m1 = LinearizedInsulator(3.0, lam / 30)
    m2 = LinearizedInsulator(5.0, lam / 30)
    cfg = TwoBodyConfig(SphereSphere(30e-9, 30e-9, 2e-6, m1, m2), T, 0.0)
    num = sphere_sphere_force_dipole("interaction", cfg)
    assert sphere_sphere_force_lowT("interaction", cfg) == pytest.approx(num, rel=0.01)
