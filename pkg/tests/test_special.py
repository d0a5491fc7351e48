import mpmath
import numpy as np
import pytest
from scipy import special as sp

from neqcasimir.special import (
    assoc_legendre,
    legendre_table,
    psi_log_derivative,
    riccati_derivative,
    sph_bessel_j,
    sph_hankel_h1,
    spherical_hn_array,
    spherical_jn_array,
    wigner3j,
    wigner3j_first_column,
)


def _mp_j(l, z):
    return complex(mpmath.sqrt(mpmath.pi / (2 * z)) * mpmath.besselj(l + 0.5, z))


def _mp_h(l, z):
    return complex(mpmath.sqrt(mpmath.pi / (2 * z)) * mpmath.hankel1(l + 0.5, z))


@pytest.mark.parametrize("z", [1e-3, 0.3, 2.0 + 0.5j, 7.5, 25.0 - 3j, 3j, 0.05 + 40j])
@pytest.mark.parametrize("l", [0, 1, 5, 20, 45])
def test_bessel_j_against_mpmath(l, z):
    mpmath.mp.dps = 40
    ref = _mp_j(l, mpmath.mpc(z))
    got = sph_bessel_j(l, z)
    assert abs(got - ref) <= 1e-12 * abs(ref) + 1e-300


@pytest.mark.parametrize("z", [0.7, 4.0 + 1j, 30.0, 2j])
@pytest.mark.parametrize("l", [0, 1, 3, 12])
def test_hankel_against_mpmath(l, z):
    mpmath.mp.dps = 40
    ref = _mp_h(l, mpmath.mpc(z))
    assert abs(sph_hankel_h1(l, z) - ref) <= 1e-12 * abs(ref)


def test_bessel_real_axis_matches_scipy():
    z = np.linspace(0.1, 50, 37)
    got = spherical_jn_array(30, z).real
    ref = np.stack([sp.spherical_jn(l, z) for l in range(31)], axis=-1)
    assert np.allclose(got, ref, rtol=1e-10, atol=1e-300)
    assert np.allclose(spherical_hn_array(8, z).imag, np.stack([sp.spherical_yn(l, z) for l in range(9)], -1), rtol=1e-10)


def test_bessel_at_origin():
    out = spherical_jn_array(4, 0.0)
    assert out[0] == 1 and np.all(out[1:] == 0)
    with pytest.raises(ZeroDivisionError):
        sph_hankel_h1(2, 0.0)
    with pytest.raises(ValueError):
        sph_bessel_j(-1, 1.0)


def test_bessel_near_sin_zero():
    # j_0 vanishes at pi; normalization must switch to j_1
    z = np.pi
    assert abs(sph_bessel_j(3, z) - sp.spherical_jn(3, z)) < 1e-14


@pytest.mark.parametrize("kind", ["j", "h1"])
@pytest.mark.parametrize("l", [0, 1, 4])
def test_riccati_derivative_finite_difference(kind, l):
    z, h = 2.3 + 0.4j, 1e-6
    f = sph_bessel_j if kind == "j" else sph_hankel_h1
    fd = ((z + h) * f(l, z + h) - (z - h) * f(l, z - h)) / (2 * h)
    assert abs(riccati_derivative(kind, l, z) - fd) < 1e-8 * max(1, abs(fd))


def test_psi_log_derivative_large_imaginary():
    z = 3.0 + 200j  # j_l overflows here, the ratio does not
    D = psi_log_derivative(5, z)
    mpmath.mp.dps = 60
    for l in (1, 5):
        zz = mpmath.mpc(z)
        psi = lambda t: t * mpmath.sqrt(mpmath.pi / (2 * t)) * mpmath.besselj(l + 0.5, t)  # noqa: E731
        ref = complex(mpmath.diff(psi, zz) / psi(zz))
        assert abs(D[l] - ref) < 1e-10 * abs(ref)


def test_legendre_table_matches_scipy():
    x = np.linspace(-0.95, 0.95, 9)
    P, dP = legendre_table(6, x)
    for l in range(7):
        for m in range(l + 1):
            assert np.allclose(P[:, l, m], sp.lpmv(m, l, x), atol=1e-12)
    h = 1e-6
    Pp, _ = legendre_table(6, x + h)
    Pm, _ = legendre_table(6, x - h)
    assert np.allclose(dP, (Pp - Pm) / (2 * h), atol=1e-5)


def test_assoc_legendre_negative_m():
    p, _ = assoc_legendre(3, -2, 0.3)
    assert p == pytest.approx(sp.lpmv(2, 3, 0.3) / 120.0)
    with pytest.raises(ValueError):
        assoc_legendre(2, 3, 0.1)
    with pytest.raises(ValueError):
        legendre_table(2, 1.5)


def test_wigner3j_known_values():
    assert wigner3j(1, 1, 0, 0, 0, 0) == pytest.approx(-1 / np.sqrt(3))
    assert wigner3j(1, 1, 2, 1, -1, 0) == pytest.approx(1 / np.sqrt(30))
    assert wigner3j(2, 2, 2, 0, 0, 0) == pytest.approx(-np.sqrt(2 / 35))
    assert wigner3j(1, 1, 1, 0, 0, 0) == 0.0  # odd l sum, m = 0
    assert wigner3j(1, 1, 3, 0, 0, 0) == 0.0  # triangle violated


def test_wigner3j_column_large_l():
    jmin, col = wigner3j_first_column(40, 37, np.array([3]), np.array([-5]))
    col = col.reshape(-1)
    for j in (jmin, jmin + 7, 60, 77):
        assert col[j - jmin] == pytest.approx(wigner3j(j, 40, 37, 2, 3, -5), abs=1e-13)
