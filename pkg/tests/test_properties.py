"""Randomized invariants: passivity, Wronskians, 3j orthogonality, translation generator."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neqcasimir.materials import Drude, LinearizedInsulator, SiCModel, TwoOscillator
from neqcasimir.radiation import s_matrix_absorptivity, sphere_channel_absorptivity
from neqcasimir.scattering import mie_arrays
from neqcasimir.special import spherical_hn_array, spherical_jn_array, wigner3j, wigner3j_first_column
from neqcasimir.waves import C0, pz_matrix, translation_u_blocks, translation_v_blocks

pytestmark = pytest.mark.property
FAST = settings(max_examples=60, deadline=None)

pos = st.floats(1e-3, 1e3)
omega = st.floats(1e9, 1e17)


@FAST
@given(st.floats(1e13, 1e17), st.floats(1e10, 1e15), omega)
def test_drude_is_passive(wp, wt, w):
    assert Drude(wp, wt).epsilon(w).imag >= 0


@FAST
@given(st.floats(1.0, 20.0), st.floats(1e13, 1e14), st.floats(0.1, 1.0), st.floats(1e10, 1e13), omega)
def test_polar_phonon_is_passive(eps_inf, wto, frac_gap, gamma, w):
    wlo = wto * (1 + frac_gap)
    assert SiCModel(eps_inf, wlo, wto, gamma).epsilon(w).imag >= 0


@FAST
@given(pos, st.floats(1e12, 1e15), st.floats(1e9, 1e13), pos, st.floats(1e15, 1e17), st.floats(1e12, 1e15), omega)
def test_two_oscillator_is_passive(C, wr, g, D, Wr, G, w):
    assert TwoOscillator(C, wr, g, D, Wr, G).epsilon(w).imag >= 0


@FAST
@given(st.floats(1.0, 50.0), st.floats(0.0, 1e-3), omega)
def test_linearized_is_passive(eps0, lam, w):
    assert LinearizedInsulator(eps0, lam).epsilon(w).imag >= 0


passive_eps = st.tuples(st.floats(-200.0, 200.0), st.floats(0.0, 200.0)).map(lambda t: complex(*t))


@FAST
@given(passive_eps, st.floats(1e-2, 20.0))
def test_mie_channels_absorb(eps, x):
    TM, TN = mie_arrays(eps, 1.0, x, 30)
    for T in (TM, TN):
        a = -(T.real + np.abs(T) ** 2)
        assert np.all(a >= -1e-12)


@FAST
@given(passive_eps, st.floats(1e-2, 20.0))
def test_s_matrix_form_equals_t_form(eps, x):
    TM, TN = mie_arrays(eps, 1.0, x, 25)
    a = sphere_channel_absorptivity(TM, TN)
    b = s_matrix_absorptivity(TM, TN)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


complex_arg = st.tuples(st.floats(0.05, 60.0), st.floats(-5.0, 5.0)).map(lambda t: complex(*t))


@FAST
@given(complex_arg)
def test_bessel_hankel_cross_product(z):
    # j_l h_{l-1} - j_{l-1} h_l = i / z^2 for every l
    L = 40
    j = spherical_jn_array(L, z)
    h = spherical_hn_array(L, z)
    lhs = j[1:] * h[:-1] - j[:-1] * h[1:]
    target = 1j / z**2
    # the product of a decaying j_l and a growing h_l stays O(1/z^2)
    ok = np.abs(h[1:]) < 1e250
    assert np.allclose(lhs[ok], target, rtol=1e-9, atol=0)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 5), st.integers(1, 5), st.integers(0, 10), st.integers(0, 10))
def test_wigner3j_orthogonality(l1, l2, a, b):
    lo, hi = abs(l1 - l2), l1 + l2
    l3 = lo + a % (hi - lo + 1)
    l3p = lo + b % (hi - lo + 1)
    for m3 in range(-min(l3, l3p), min(l3, l3p) + 1):
        s = 0.0
        for m1 in range(-l1, l1 + 1):
            m2 = -m1 - m3
            if abs(m2) <= l2:
                s += wigner3j(l1, l2, l3, m1, m2, m3) * wigner3j(l1, l2, l3p, m1, m2, m3)
        assert s * (2 * l3 + 1) == pytest.approx(1.0 if l3 == l3p else 0.0, abs=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 25), st.integers(0, 25), st.integers(-6, 6), st.integers(-6, 6))
def test_wigner3j_column_matches_racah(l2, l3, m2, m3):
    m2 = max(-l2, min(l2, m2))
    m3 = max(-l3, min(l3, m3))
    m1 = -m2 - m3
    jmin, col = wigner3j_first_column(l2, l3, m2, m3)
    col = np.ravel(col)
    for k, j in enumerate(range(jmin, l2 + l3 + 1)):
        if abs(m1) <= j:
            assert col[k] == pytest.approx(wigner3j(j, l2, l3, m1, m2, m3), abs=1e-12)


def _truncate(A, L):
    """Restrict a (2n, 2n) block at order L + 1 to order L (drop the top l)."""
    n = A.shape[-1] // 2
    keep = np.r_[0 : n - 1, n : 2 * n - 1]
    return A[np.ix_(keep, keep)]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 4), st.floats(0.5, 30.0), st.sampled_from([+1, -1]))
def test_translation_generator_finite_difference(m, kd, sign):
    L = 6
    w = 1e14
    d = kd * C0 / w
    h = 1e-5 * d
    up = translation_u_blocks(sign, m, d + h, [w], L)[0]
    dn = translation_u_blocks(sign, m, d - h, [w], L)[0]
    fd = (up - dn) / (2 * h)
    U = translation_u_blocks(sign, m, d, [w], L + 1)[0]
    pz = pz_matrix(m, w, L + 1)
    exact = _truncate(-sign * pz @ U, L)
    assert np.allclose(fd, exact, rtol=1e-6, atol=1e-7 * np.abs(exact).max())


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 4), st.floats(0.5, 20.0))
def test_regular_translation_generator(m, kd):
    L = 6
    w = 1e14
    d = kd * C0 / w
    h = 1e-5 * d
    fd = (translation_v_blocks(m, d + h, [w], L)[0] - translation_v_blocks(m, d - h, [w], L)[0]) / (2 * h)
    V = translation_v_blocks(m, d, [w], L + 1)[0]
    exact = _truncate(-pz_matrix(m, w, L + 1) @ V, L)
    assert np.allclose(fd, exact, rtol=1e-6, atol=1e-7 * np.abs(exact).max())
