import io
import math

import numpy as np
import pytest
from scipy import constants as const

from neqcasimir.materials import (
    ALUMINIUM,
    EV,
    GOLD,
    SIC,
    SIGMA_SB,
    ConstantPermittivity,
    Drude,
    FrequencyRangeError,
    IngestionError,
    LimitMaterialError,
    LinearizedInsulator,
    PerfectMirror,
    ThermalContext,
    UnsupportedExpansionError,
    as_finite,
    bose_occupation,
    ingest_tabulated,
    insulator_expansion,
    thermal_wavelength,
)


def test_stefan_boltzmann_constant():
    assert SIGMA_SB == pytest.approx(const.Stefan_Boltzmann, rel=1e-9)


def test_thermal_wavelength_and_occupation():
    assert thermal_wavelength(300.0) == pytest.approx(7.63e-6, rel=1e-3)
    with pytest.raises(ValueError):
        thermal_wavelength(0.0)
    w = np.array([1e12, 1e14])
    n = bose_occupation(300.0, w)
    x = const.hbar * w / (const.k * 300.0)
    assert np.allclose(n, 1 / np.expm1(x))
    assert np.all(bose_occupation(0.0, w) == 0)
    assert bose_occupation(300.0, 1e18) == 0.0
    with pytest.raises(ValueError):
        bose_occupation(-1.0, w)
    assert ThermalContext(300.0).lambda_T == thermal_wavelength(300.0)


def test_drude_gold():
    assert GOLD.omega_p == pytest.approx(9.03 * EV)
    w = 1e14
    eps = GOLD.epsilon(w)
    assert eps.real < -1e3 and eps.imag > 0
    assert GOLD.is_conductor
    assert Drude.from_ev(12.04, 0.1287) == ALUMINIUM


def test_sic_static_and_reststrahlen():
    assert SIC.eps_static == pytest.approx(6.7 * (0.12 / 0.098) ** 2)
    assert SIC.epsilon(1e-6 * SIC.omega_to).real == pytest.approx(SIC.eps_static, rel=1e-6)
    mid = 0.5 * (SIC.omega_to + SIC.omega_lo)
    assert SIC.epsilon(mid).real < 0  # reststrahlen band


def test_complex_frequency_gives_real_response():
    # on the imaginary axis a passive model is real and above one
    xi = 1e14j
    for m in (GOLD, SIC, LinearizedInsulator(4.0, 1e-6)):
        e = complex(m.epsilon(xi))
        assert abs(e.imag) < 1e-9 * abs(e) and e.real > 1


def test_features_near_resonances():
    feats = SIC.features()
    assert any(abs(w - SIC.omega_to) < 1e-6 * SIC.omega_to for w, _ in feats)


def test_perfect_mirror():
    m = PerfectMirror()
    assert m.is_limit
    with pytest.raises(LimitMaterialError):
        m.epsilon(1e14)
    assert as_finite(m).epsilon(1e14) == -1e8
    assert as_finite(GOLD) is GOLD


def test_constant_shapes():
    c = ConstantPermittivity(2 + 1j)
    assert c.epsilon(1e14) == 2 + 1j
    assert c.epsilon(np.ones(3)).shape == (3,)


def test_tabulated_ingestion():
    text = "omega,re,im\n1e13,2.0,0.1\n1e14,3.0,0.3\n1e15,4.0,0.0\n"
    m = ingest_tabulated(io.StringIO(text))
    assert m.epsilon(1e14) == pytest.approx(3 + 0.3j)
    mid = math.sqrt(1e13 * 1e14)  # linear in log omega
    assert m.epsilon(mid) == pytest.approx(2.5 + 0.2j)
    with pytest.raises(FrequencyRangeError):
        m.epsilon(1e16)
    with pytest.raises(FrequencyRangeError):
        m.epsilon(1e14j)


@pytest.mark.parametrize(
    "text,row",
    [
        ("1e13,2,0.1\n1e14,3,-0.2\n", "row 2"),
        ("1e13,2,0.1\n1e12,3,0.2\n", "row 2"),
        ("1e13,2,0.1\n1e14,3\n", "row 2"),
        ("1e13,2,0.1\nx,3,0.1\n", "row 2"),
        ("-1,2,0.1\n1e14,3,0.1\n", "row 1"),
        ("1e13,2,nan\n1e14,3,0.1\n", "row 1"),
    ],
)
def test_tabulated_errors_name_the_row(text, row):
    with pytest.raises(IngestionError, match=row):
        ingest_tabulated(text)


def test_tabulated_needs_two_rows():
    with pytest.raises(IngestionError):
        ingest_tabulated("1e13,2,0.1\n")


def test_insulator_expansion():
    lin = LinearizedInsulator(5.0, 2e-7)
    ex = insulator_expansion(lin, 10e-9)
    assert (ex.eps0, ex.lambda_in) == (5.0, 2e-7)
    assert ex.alpha0 == pytest.approx(4 / 7 * 1e-24)
    assert ex.alpha_i0 == pytest.approx(3e-24 / 49)
    assert ex.as_model() == lin
    ex_sic = insulator_expansion(SIC, 10e-9)
    assert ex_sic.eps0 == pytest.approx(SIC.eps_static, rel=1e-6)
    # Im eps ~ eps_inf (wlo^2 - wto^2) gamma w / wto^4 at low frequency
    lam = SIC.eps_inf * (SIC.omega_lo**2 - SIC.omega_to**2) * SIC.gamma / SIC.omega_to**4 * const.c
    assert ex_sic.lambda_in == pytest.approx(lam, rel=1e-4)
    with pytest.raises(UnsupportedExpansionError):
        insulator_expansion(GOLD, 1e-8)
    with pytest.raises(UnsupportedExpansionError):
        insulator_expansion(PerfectMirror(), 1e-8)
