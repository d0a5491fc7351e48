import numpy as np
import pytest

from neqcasimir.waves import (
    C0,
    M,
    N,
    block_ls,
    coeff_a,
    coeff_b,
    conversion_d,
    conversion_d_table,
    green_oracle,
    green_partial_waves,
    green_two_origins,
    plane_wave_out,
    pz_block,
    spherical_waves,
    translation_u,
    translation_u_blocks,
    translation_v_blocks,
    wave_eval,
)

W = 2e14
K = W / C0


def test_coefficients():
    assert coeff_a(2, 1) == pytest.approx(1 / 6)
    assert coeff_b(1, 0) == pytest.approx(np.sqrt(1 * 3 * 2 * 2 / (3 * 5)) / 2)
    assert list(block_ls(-3, 5)) == [3, 4, 5]
    assert list(block_ls(0, 3)) == [1, 2, 3]


def test_green_single_origin():
    rng = np.random.default_rng(3)
    for _ in range(5):
        r = rng.normal(size=3) * 2.0 / K
        rp = rng.normal(size=3) * 0.5 / K
        G = green_partial_waves(r, rp, W, 30)
        ref = green_oracle(r, rp, W)
        assert np.abs(G - ref).max() < 1e-9 * np.abs(ref).max()
        # reciprocity G(r, r') = G(r', r)^T
        assert np.allclose(green_partial_waves(rp, r, W, 30), ref.T, rtol=1e-8, atol=1e-9 * np.abs(ref).max())


def test_green_two_origins():
    d = 3.0 / K
    r2 = np.array([0.2, -0.3, 0.1]) / K
    r1 = np.array([-0.1, 0.25, 0.3]) / K
    G = green_two_origins(r2, r1, W, d, 20)
    x2 = r2 - np.array([0, 0, d])
    ref = green_oracle(x2, r1, W)
    assert np.abs(G - ref).max() < 1e-9 * np.abs(ref).max()


def test_green_oracle_rejects_coincident_points():
    with pytest.raises(ValueError):
        green_oracle([0, 0, 1.0], [0, 0, 1.0], W)


def test_plane_wave_expands_into_regular_waves():
    lmax = 25
    kp = 0.6 * K
    pt = np.array([0.3, -0.2, 0.4]) / K
    same, cross = conversion_d_table(lmax, np.asarray(kp), W)
    E = spherical_waves(lmax, W, pt, "reg")
    for P, name in ((M, "M"), (N, "N")):
        other = N if P == M else M
        got = np.einsum("lm,lmi->i", same, E[P]) + np.einsum("lm,lmi->i", cross, E[other])
        ref = K * plane_wave_out(name, (kp, 0.0), W, pt)
        assert np.allclose(got, ref, atol=1e-9 * np.abs(ref).max())


def test_dipole_conversion_sum_rule():
    for frac in (0.1, 0.5, 0.95):
        kp = frac * K
        kz = np.sqrt(K * K - kp * kp)
        same, cross = conversion_d_table(1, np.asarray(kp), W)
        for tbl in (same, cross):
            assert np.sum(np.abs(tbl[0]) ** 2) == pytest.approx(6 * np.pi * K / kz, rel=1e-12)


def test_conversion_scalar_accessor():
    same, _ = conversion_d_table(2, np.asarray(0.4 * K), W)
    assert conversion_d(2, 1, "M", "M", 0.4 * K, W) == pytest.approx(same[1, 1 + 2])
    assert conversion_d(2, 0, "N", "M", 0.4 * K, W) == 0
    with pytest.raises(ValueError):
        conversion_d_table(2, np.asarray(K), W)


def test_translation_identities():
    # V(0) is the identity and U^+ at this shift reproduces its transpose partner
    V0 = translation_v_blocks(1, 0.0, [W], 5)[0]
    assert np.allclose(V0, np.eye(V0.shape[0]), atol=1e-14)
    d = 2.5 / K
    Up = translation_u_blocks(+1, 2, d, [W], 6)[0]
    Um = translation_u_blocks(-1, 2, d, [W], 6)[0]
    S = np.diag(np.r_[np.ones(5), -np.ones(5)])
    assert np.allclose(Um, S @ Up.T @ S, rtol=1e-10)
    with pytest.raises(ValueError):
        translation_u_blocks(+1, 0, 0.0, [W], 3)


def test_translation_block_wrappers():
    b = translation_u("+", 1, 1e-6, W, 4)
    assert b.kind == "U+" and b.matrix.shape == (8, 8) and list(b.ls) == [1, 2, 3, 4]
    assert pz_block(0, W, 3).matrix.shape == (6, 6)


def test_wave_eval_matches_table():
    pt = np.array([0.5, 0.1, -0.2]) / K
    E = spherical_waves(3, W, pt, "out")
    v = wave_eval("spherical", "out", ("N", 2, -1), pt, W)
    assert np.allclose(v, E[N, 1, -1 + 3])
    with pytest.raises(ValueError):
        spherical_waves(2, W, np.zeros(3), "out")


def _fd(f, pt, h):
    out = []
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        out.append((f(pt + e) - f(pt - e)) / (2 * h))
    return np.array(out)  # [d/dx_i, component]


@pytest.mark.parametrize("kind", ["reg", "out"])
def test_waves_transverse_and_curl_related(kind):
    pt = np.array([0.7, -0.4, 0.9]) / K
    h = 1e-5 / K
    for l, m in ((1, 0), (2, -1), (3, 2)):
        fM = lambda x: wave_eval("spherical", kind, ("M", l, m), x, W)  # noqa: E731
        fN = lambda x: wave_eval("spherical", kind, ("N", l, m), x, W)  # noqa: E731
        J = _fd(fM, pt, h)
        scale = np.abs(fM(pt)).max() * K
        assert abs(np.trace(J)) < 1e-6 * scale
        curl = np.array([J[1, 2] - J[2, 1], J[2, 0] - J[0, 2], J[0, 1] - J[1, 0]])
        assert np.allclose(curl / K, fN(pt), atol=1e-5 * np.abs(fN(pt)).max())
