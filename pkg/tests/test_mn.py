import numpy as np
import pytest

from hydrochain.chain import ChainState
from hydrochain.initial import local_gibbs_sample
from hydrochain.mn import (build_mn,
                           closed_overline_residual, det_identity,
                           inverse_closed_form, limit_suite,
                           scaled_inverse_grid, sn_check,
                           trig_closure_integral, z0_limit)
from hydrochain.profiles import MacroProfile
from hydrochain.wigner import mean_fluct_decompose


def random_params(rng):
    n = int(rng.integers(2, 1025))
    return (float(rng.uniform(0.1, 50)), int(rng.integers(-8, 9)),
            int(rng.integers(0, n)) / n, n, float(rng.uniform(0.2, 5)))


# ---------------------------------------------------------------------------
# assembly


def test_build_concrete_case():
    m = build_mn(1.0, 0, 0.0, 2, 1.0)
    A = m.entries[:2, :2]
    assert np.allclose(A, [[9, -4], [-4, 9]])
    assert np.allclose(m.entries[:2, 2:], -4 * np.eye(2))
    assert np.allclose(m.entries[2:, :2], -4 * np.eye(2))
    assert m.dns == 0 and m.sns == 0 and m.dgn == 0


def test_build_validates():
    with pytest.raises(ValueError):
        build_mn(-1.0, 0, 0.0, 2, 1.0)
    with pytest.raises(ValueError):
        build_mn(1.0, 0, 0.0, 2, 0.0)


def test_coupling_symmetry_under_reflection():
    rng = np.random.default_rng(11)
    for _ in range(300):
        lam, eta, k, n, gam = random_params(rng)
        m = build_mn(lam, eta, k, n, gam)
        m2 = build_mn(lam, -eta, (-k) % 1.0, n, gam)
        assert m2.gnp == pytest.approx(m.gnm, abs=1e-12)
        assert m2.gnm == pytest.approx(m.gnp, abs=1e-12)
        assert m2.gp == pytest.approx(m.gm, abs=1e-12)
        assert m2.gm == pytest.approx(m.gp, abs=1e-12)


def test_half_wavenumber_pure_couplings():
    m = build_mn(2.0, 0, 0.5, 8, 1.3)
    assert m.gp == pytest.approx(1.3)
    assert m.gm == pytest.approx(1.3)


# ---------------------------------------------------------------------------
# determinant


def test_det_concrete_value():
    rep = det_identity(build_mn(1.0, 0, 0.0, 2, 1.0))
    assert rep.det_formula == pytest.approx(1377.0, rel=1e-14)
    assert rep.det_block == pytest.approx(1377.0, rel=1e-12)
    assert rep.det_direct.real == pytest.approx(1377.0, rel=1e-12)
    assert abs(rep.det_direct.imag) < 1e-9


def test_det_direct_vs_formula_random():
    rng = np.random.default_rng(5)
    worst = 0.0
    for _ in range(400):
        rep = det_identity(build_mn(*random_params(rng)))
        worst = max(worst, rep.rel_err)
        assert abs(rep.det_block - rep.det_formula) <= 1e-9 * abs(rep.det_formula)
    assert worst <= 1e-9


def test_det_positive_for_positive_lambda():
    rng = np.random.default_rng(6)
    for _ in range(2000):
        rep = det_identity(build_mn(*random_params(rng)))
        assert rep.det_formula > 0


def test_det_scaled_limit():
    # n^2 det/n^8 at k = xi/n approaches 16 gamma^2 (lam gamma + 2 pi^2 [...])
    lam, gam, eta, xi = 3.0, 1.4, 2, 1
    target = 16 * gam ** 2 * (lam * gam + 2 * np.pi ** 2 * (xi ** 2 + (eta + xi) ** 2))
    gaps = []
    for n in (64, 256, 1024, 4096):
        rep = det_identity(build_mn(lam, eta, xi / n, n, gam))
        gaps.append(abs(n ** 2 * rep.delta_n - target))
    assert gaps[-1] <= 1e-3 * target
    assert gaps[-1] < gaps[0]


# ---------------------------------------------------------------------------
# closed-form inverse


def test_inverse_concrete_case_vs_lu():
    m = build_mn(1.0, 0, 0.0, 2, 1.0)
    inv, coeffs = inverse_closed_form(m)
    lu = np.linalg.inv(m.entries)
    assert np.max(np.abs(inv - lu)) <= 1e-10
    assert coeffs.dp == pytest.approx(441.0)
    assert coeffs.c0 == pytest.approx(288.0)


def test_inverse_random_residuals():
    rng = np.random.default_rng(7)
    for _ in range(300):
        m = build_mn(*random_params(rng))
        inv, _ = inverse_closed_form(m)
        res = np.linalg.norm(m.entries @ inv - np.eye(4))
        assert res <= 1e-8


def test_inverse_normalized_matches_raw():
    rng = np.random.default_rng(8)
    for _ in range(100):
        lam = float(rng.uniform(0.1, 50))
        gam = float(rng.uniform(0.2, 5))
        n = int(rng.integers(2, 65))
        eta = int(rng.integers(-8, 9))
        k = int(rng.integers(0, n)) / n
        m = build_mn(lam, eta, k, n, gam)
        a, _ = inverse_closed_form(m, normalized=True)
        b, _ = inverse_closed_form(m, normalized=False)
        assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(b))


def test_scaled_grid_matches_pointwise():
    lam, eta, n, gam = 4.0, 1, 64, 0.9
    ks = np.arange(n) / n
    tab, delta = scaled_inverse_grid(lam, eta, ks, n, gam)
    for ki in (0, 1, 17, 32, 63):
        inv = tab[:, :, ki] / (delta[ki] * n ** 2)
        lu = np.linalg.inv(build_mn(lam, eta, ki / n, n, gam).entries)
        assert np.max(np.abs(inv - lu)) <= 1e-12 * np.max(np.abs(lu)) + 1e-18


def _dp_expansion(m, n, gam, with_skew_term=True):
    s = np.sin(2 * np.pi * m.k)
    lead = (4 * gam ** 3 + 4 * gam * s ** 2 + 2 * gam * m.sns ** 2
            - 1j * m.dns * (4 * gam ** 2 + m.sns ** 2) / n)
    if with_skew_term:
        # expanding a* |b|^2 + n^3 b* dgn - 2 gm gp n^4 Re a also produces
        # (2 gamma - i sns) dgn / n, which vanishes only at eta = 0
        lead = lead + (2 * gam - 1j * m.sns) * m.dgn / n
    return lead


def test_coefficient_asymptotics():
    # d+ / n^6 approaches its expansion with an O(1/n^2) remainder
    lam, gam, eta = 5.0, 1.0, 1
    k = 0.3
    gaps = []
    for n in (64, 256, 1024, 4096):
        kk = round(k * n) / n
        m = build_mn(lam, eta, kk, n, gam)
        _, coeffs = inverse_closed_form(m)
        gaps.append(abs(coeffs.dp / n ** 6 - _dp_expansion(m, n, gam)))
    ratios = [a / b for a, b in zip(gaps, gaps[1:])]
    # dyadic steps of factor 4 in n: O(1/n^2) means ratios near 16
    assert all(r > 8 for r in ratios)
    assert gaps[-1] <= 1e-5


def test_coefficient_asymptotics_eta_zero_plain_form():
    # at eta = 0 the skew term vanishes and the bare expansion is O(1/n^2)
    lam, gam = 5.0, 1.0
    gaps = []
    for n in (64, 256, 1024):
        kk = round(0.3 * n) / n
        m = build_mn(lam, 0, kk, n, gam)
        _, coeffs = inverse_closed_form(m)
        gaps.append(abs(coeffs.dp / n ** 6
                        - _dp_expansion(m, n, gam, with_skew_term=False)))
    assert gaps[-1] <= 1e-4
    assert gaps[0] / gaps[-1] > 50  # ~ (1024/64)^2 / margin


# ---------------------------------------------------------------------------
# limits


def test_limit_suite_example_values():
    suite = limit_suite(5.0, eta=1, gamma=1.0, xi=2)
    target_b = 24 * np.pi ** 2 / (5 + 26 * np.pi ** 2)
    assert suite["targets"]["b"] == pytest.approx(target_b, rel=1e-12)
    assert suite["rows"][-1]["value_b"] == pytest.approx(target_b, abs=2e-4)
    assert suite["order_a"] >= 0.8
    assert suite["order_b"] >= 0.8
    assert suite["order_c"] >= 0.8


def test_limit_b_vanishes_at_zero_xi():
    suite = limit_suite(5.0, eta=0, gamma=1.0, xi=0)
    assert suite["targets"]["b"] == 0.0
    assert abs(suite["rows"][-1]["value_b"]) <= 1e-6


def test_limit_c_target():
    suite = limit_suite(5.0, eta=1, gamma=1.0, k_fixed=0.25)
    assert np.allclose(suite["targets"]["c"], [0.5, 0, 0, 0.5])


def test_sn_values_and_gap_rate():
    lam, gam, eta = 5.0, 1.0, 1
    limit = (5 + np.pi ** 2) / 2
    rows = [sn_check(lam, eta, gam, n) for n in (64, 256, 1024, 4096)]
    assert rows[0]["limit"] == pytest.approx(limit, rel=1e-12)
    assert rows[-1]["gap"] <= 0.01 * limit
    # O(1/n): gap shrinks by roughly the n ratio
    assert rows[-1]["gap"] <= rows[0]["gap"] / 16
    assert rows[-1]["gamma_n2_Mn"] == pytest.approx(1.0, abs=0.01)


def test_sn_eta_zero_limit():
    rep = sn_check(4.0, 0, 2.0, 2048)
    assert rep["limit"] == pytest.approx(4.0 / 4.0)
    assert rep["gap"] <= 0.01


def test_trig_closure():
    assert trig_closure_integral() == pytest.approx(0.5, abs=1e-10)


# ---------------------------------------------------------------------------
# fluctuation source term


def _fluct_field(states, eta, eta_max):
    _, til = mean_fluct_decompose(states, eta_max)
    return til.values[:, eta + eta_max, :]


def test_z0_homogeneous_gibbs():
    beta, lam, gam = 2.0, 6.0, 1.0
    tau = MacroProfile.constant(1.0)
    bet = MacroProfile.constant(beta)
    M = 1200
    for n, tol in ((32, 0.08), (64, 0.05)):
        states = [local_gibbs_sample(tau, bet, n, np.random.default_rng(3_000_000 + n * 10000 + i))
                  for i in range(M)]
        v0 = _fluct_field(states, 0, 2)
        rep = z0_limit(v0, lam, 0, gam, predicted=1.0 / beta)
        assert abs(rep["value"] - 1 / beta) <= tol
        v1 = _fluct_field(states, 1, 2)
        rep1 = z0_limit(v1, lam, 1, gam, predicted=0.0)
        assert abs(rep1["value"]) <= tol


def test_z0_deterministic_zero():
    n = 32
    st = ChainState(np.cos(2 * np.pi * np.arange(n) / n), np.zeros(n))
    states = [st.copy() for _ in range(4)]
    v0 = _fluct_field(states, 1, 2)
    rep = z0_limit(v0, 5.0, 1, 1.0)
    assert abs(rep["value"]) <= 1e-14


def test_z0_cosine_temperature_profile():
    # temperature 1 + cos(2 pi u)/4: predicted value at eta = 1 is 1/8
    lam, gam, M = 6.0, 1.0, 3000
    temp = MacroProfile.cosine(1.0, 0.25)
    tau = MacroProfile.constant(0.0)
    gaps = []
    for n in (16, 32, 64):
        states = []
        for i in range(M):
            rng = np.random.default_rng(4_000_000 + n * 10_000 + i)
            sd = np.sqrt(temp.grid_values(n))
            r = tau.grid_values(n) + sd * rng.standard_normal(n)
            p = sd * rng.standard_normal(n)
            states.append(ChainState(r, p))
        v1 = _fluct_field(states, 1, 2)
        rep = z0_limit(v1, lam, 1, gam, predicted=0.125)
        gaps.append(rep["gap"])
    assert gaps[-1] <= 0.03


def test_z0_rho_validation():
    with pytest.raises(ValueError):
        z0_limit(np.zeros((4, 8)), 5.0, 0, 1.0, rho=0.7)


# ---------------------------------------------------------------------------
# closed mean system


def test_closed_overline_constant_profile():
    rep = closed_overline_residual(MacroProfile.constant(1.0), 16, 1.0,
                                   eta_max=1, lam=10.0)
    assert rep["fd_residual"] <= 1e-10
    assert rep["laplace_residual"] <= 1e-6


def test_closed_overline_cosine_benchmark():
    rep = closed_overline_residual(MacroProfile.cosine(1.0, 0.5), 32, 1.0,
                                   eta_max=2, lam=10.0)
    assert rep["fd_residual"] <= 1e-6
    assert rep["laplace_residual"] <= 1e-5
    assert max(rep["pairing_gaps"]) <= 1e-3  # n = 32 finite-size level


def test_closed_overline_pairing_n256():
    rep = closed_overline_residual(MacroProfile.cosine(1.0, 0.5), 256, 1.0,
                                   eta_max=2, lam=10.0)
    assert max(rep["pairing_gaps"]) <= 1e-4
    assert max(rep["ibar_gaps"]) <= 1e-3
