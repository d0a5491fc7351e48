import numpy as np
import pytest

from neqcasimir.materials import SIC, ConstantPermittivity, thermal_wavelength
from neqcasimir.transfer import (
    ConfigError,
    SpherePlate,
    SphereSphere,
    TwoBodyConfig,
    sphere_plate_kernel_1refl,
    sphere_plate_kernel_dipole_limit,
    sphere_plate_transfer_1refl,
    sphere_plate_transfer_asymptotic,
    sphere_sphere_kernel_1refl,
    sphere_sphere_kernel_dipole,
    sphere_sphere_kernel_exact,
    sphere_sphere_transfer_1refl,
    sphere_sphere_transfer_dipole,
    sphere_sphere_transfer_exact,
    total_heat_to_object2,
)

M1 = ConstantPermittivity(3.0 + 1.0j)
M2 = ConstantPermittivity(5.0 + 0.4j)


def _ss(R1=50e-9, R2=70e-9, d=400e-9, T1=400.0, T2=300.0):
    return TwoBodyConfig(SphereSphere(R1, R2, d, M1, M2), T1, T2)


def test_configuration_errors():
    with pytest.raises(ConfigError, match="overlap"):
        TwoBodyConfig(SphereSphere(1e-7, 1e-7, 1.5e-7, M1, M2), 300, 300).validate()
    with pytest.raises(ConfigError):
        TwoBodyConfig(SpherePlate(1e-7, 0.5e-7, M1, M2), 300, 300).validate()
    with pytest.raises(ConfigError):
        TwoBodyConfig(SpherePlate(1e-7, 1e-6, M1, M2), -1, 300).validate()
    with pytest.raises(ConfigError):
        sphere_sphere_transfer_1refl(TwoBodyConfig(SpherePlate(1e-7, 1e-6, M1, M2), 300, 200), 2)


def test_equal_temperatures_give_zero():
    assert sphere_sphere_transfer_1refl(_ss(T1=300.0, T2=300.0), 2).H_1to2 == 0.0
    cfg = TwoBodyConfig(SpherePlate(50e-9, 1e-6, M1, SIC), 300.0, 300.0)
    assert sphere_plate_transfer_1refl(cfg, 1).H_1to2 == 0.0


def test_sign_follows_temperature_difference():
    hot = sphere_sphere_transfer_1refl(_ss(T1=400.0, T2=300.0), 3).H_1to2
    cold = sphere_sphere_transfer_1refl(_ss(T1=300.0, T2=400.0), 3).H_1to2
    assert hot > 0 and cold == pytest.approx(-hot, rel=1e-6)


def test_dipole_kernel_is_l1_truncation():
    geo = SphereSphere(20e-9, 30e-9, 2e-6, M1, M2)
    w = np.geomspace(1e12, 1e15, 9)
    assert np.allclose(sphere_sphere_kernel_1refl(geo, w, 1), sphere_sphere_kernel_dipole(geo, w), rtol=1e-10)


def test_exact_kernel_approaches_one_reflection():
    geo = SphereSphere(50e-9, 50e-9, 150e-9, M1, M2)
    w = np.geomspace(1e13, 1e15, 5)
    ex = sphere_sphere_kernel_exact(geo, w, 4)
    one = sphere_sphere_kernel_1refl(geo, w, 4)
    assert np.all(ex > 0)
    far = SphereSphere(50e-9, 50e-9, 5e-6, M1, M2)
    assert np.allclose(sphere_sphere_kernel_exact(far, w, 3), sphere_sphere_kernel_1refl(far, w, 3), rtol=1e-3)
    assert not np.allclose(ex, one, rtol=1e-3)


def test_exact_transfer_reciprocity():
    cfg = _ss(d=250e-9)
    a = sphere_sphere_transfer_exact(cfg, 4, rtol=1e-8).H_1to2
    b = sphere_sphere_transfer_exact(cfg, 4, reverse=True, rtol=1e-8).H_1to2
    assert abs(a - b) < 1e-8 * abs(a)


def test_automatic_lmax_converges():
    r = sphere_sphere_transfer_1refl(_ss(d=200e-9), rtol=1e-4)
    assert r.converged and r.l_max >= 2


def test_dipole_guard_warns_for_large_spheres():
    from neqcasimir.scattering import ValidityWarning

    with pytest.warns(ValidityWarning):
        r = sphere_sphere_transfer_dipole(_ss(R1=200e-9, R2=200e-9, d=600e-9))
    assert r.warnings


def test_sphere_plate_parts_and_dipole_limit():
    geo = SpherePlate(30e-9, 1e-6, M1, SIC)
    cfg = TwoBodyConfig(geo, 500.0, 300.0)
    r = sphere_plate_transfer_1refl(cfg, 1)
    assert r.propagating > 0 and r.evanescent > 0
    assert r.H_1to2 == pytest.approx(r.propagating + r.evanescent)
    # a non-reflecting plate: the propagating kernel equals the d-independent limit
    vac = SpherePlate(30e-9, 3e-6, M1, ConstantPermittivity(1.0 + 1e-12j))
    w = np.geomspace(1e13, 1e15, 6)
    k = sphere_plate_kernel_1refl(vac, w, 1)
    assert np.allclose(k[:, 0], sphere_plate_kernel_dipole_limit(vac, w), rtol=1e-6)


def test_near_evanescent_closed_form():
    # smooth lossy dielectric, lambda_T >> d >> R
    plate = ConstantPermittivity(3.0 + 1.0j)
    T = 300.0
    d = thermal_wavelength(T) / 50
    cfg = TwoBodyConfig(SpherePlate(d / 20, d, M1, plate), T, 0.0)
    full = sphere_plate_transfer_1refl(cfg, 1, rtol=1e-6).evanescent
    near = sphere_plate_transfer_asymptotic("near", cfg)
    assert near == pytest.approx(full, rel=0.03)


def test_far_evanescent_closed_form():
    plate = ConstantPermittivity(3.0 + 1.0j)
    T = 300.0
    d = 10 * thermal_wavelength(T)
    cfg = TwoBodyConfig(SpherePlate(20e-9, d, M1, plate), T, 0.0)
    full = sphere_plate_transfer_1refl(cfg, 1, rtol=1e-7).evanescent
    far = sphere_plate_transfer_asymptotic("far", cfg)
    assert far == pytest.approx(full, rel=0.02)
    with pytest.raises(ValueError):
        sphere_plate_transfer_asymptotic("mid", cfg)


def test_total_heat_assembly():
    cfg = TwoBodyConfig(SphereSphere(50e-9, 60e-9, 1e-6, M1, M2), 400.0, 300.0, 300.0)
    H = lambda T: 1e-12 * (T / 300.0) ** 4  # noqa: E731
    E = lambda T: 3e-12 * (T / 300.0) ** 4  # noqa: E731
    got = total_heat_to_object2(cfg, H12_of_T=H, emission2_of_T=E)
    assert got == pytest.approx(H(400.0) - H(300.0))
    # everything at the environment temperature: nothing flows
    eq = TwoBodyConfig(cfg.geometry, 300.0, 300.0, 300.0)
    assert total_heat_to_object2(eq, "dipole") == pytest.approx(0.0, abs=1e-30)
