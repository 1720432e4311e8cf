import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from hydrochain.chain import (ChainState, ModeRotation, dft, idft,
                              energy_per_site, evolve_deterministic,
                              evolve_mean_wave, flip, simulate, simulate_path,
                              total_elongation, total_energy, wave_function,
                              wave_function_hat, modes_from_mean_wave,
                              mean_wave_from_modes)


def random_state(rng, n):
    return ChainState(rng.normal(size=n), rng.normal(size=n))


def lattice_rhs(n):
    """Independent oracle: site-space equations of motion (no flips)."""
    def rhs(_, y):
        r, p = y[:n], y[n:]
        dr = n ** 2 * (p - np.roll(p, 1))
        dp = n ** 2 * (np.roll(r, -1) - r)
        return np.concatenate([dr, dp])
    return rhs


# ---------------------------------------------------------------------------
# energy and transforms


def test_energy_zero_state():
    st0 = ChainState(np.zeros(5), np.zeros(5))
    assert np.all(energy_per_site(st0) == 0)


def test_energy_single_site():
    st0 = ChainState(np.array([3.0]), np.array([4.0]))
    assert energy_per_site(st0) == pytest.approx([12.5])


def test_energy_parseval(rng0):
    st0 = random_state(rng0, 33)
    psih = wave_function_hat(st0)
    fourier_side = np.sum(np.abs(psih) ** 2) / (2 * st0.n)
    assert total_energy(st0) == pytest.approx(fourier_side, rel=1e-12)


def test_dft_dc_mode():
    n = 8
    st0 = ChainState(np.full(n, 1.7), np.zeros(n))
    rhat, _ = dft(st0)
    assert rhat[0] == pytest.approx(n * 1.7)
    assert np.allclose(rhat[1:], 0, atol=1e-12)


def test_dft_cosine():
    n = 16
    x = np.arange(n)
    st0 = ChainState(np.cos(2 * np.pi * x / n), np.zeros(n))
    rhat, _ = dft(st0)
    expected = np.zeros(n)
    expected[1] = expected[n - 1] = n / 2
    assert np.allclose(rhat, expected, atol=1e-12)


@given(st.integers(2, 64), st.integers(0, 2 ** 32 - 1))
@settings(max_examples=25, deadline=None)
def test_dft_roundtrip_and_parseval(n, seed):
    rng = np.random.default_rng(seed)
    r = rng.normal(size=n)
    p = rng.normal(size=n)
    st0 = ChainState(r, p)
    rhat, phat = dft(st0)
    r2, p2 = idft(rhat, phat)
    assert np.allclose(r2, r, rtol=0, atol=1e-12 * max(1, np.abs(r).max()))
    assert np.allclose(p2, p, rtol=0, atol=1e-12 * max(1, np.abs(p).max()))
    assert np.sum(np.abs(rhat) ** 2) / n == pytest.approx(np.sum(r ** 2), rel=1e-12)


# ---------------------------------------------------------------------------
# deterministic evolution


def test_evolve_fixed_point():
    n = 8
    st0 = ChainState(np.full(n, 0.9), np.zeros(n))
    st1 = evolve_deterministic(st0, 0.37)
    assert np.allclose(st1.r, st0.r, atol=1e-13)
    assert np.allclose(st1.p, 0, atol=1e-13)


def test_evolve_quarter_period_mode():
    # n = 2, mode k = 1/2: (rhat, phat) = (1, 0) rotates to (0, -1) at
    # dt = pi / (4 n^2) = pi / 16
    n = 2
    rhat0 = np.array([0, 1], dtype=complex)
    phat0 = np.zeros(2, dtype=complex)
    st0 = ChainState.from_modes(rhat0, phat0)
    st1 = evolve_deterministic(st0, np.pi / 16)
    rhat1, phat1 = dft(st1)
    assert abs(rhat1[1]) < 1e-12
    assert phat1[1] == pytest.approx(-1.0, abs=1e-12)


@pytest.mark.parametrize("n", [3, 5, 8])
def test_evolve_matches_ode_oracle(n, rng0):
    st0 = random_state(rng0, n)
    dt = 0.7 / n ** 2
    sol = solve_ivp(lattice_rhs(n), (0, dt), np.concatenate([st0.r, st0.p]),
                    method="DOP853", rtol=1e-12, atol=1e-13)
    st1 = evolve_deterministic(st0, dt)
    assert np.allclose(st1.r, sol.y[:n, -1], atol=1e-8)
    assert np.allclose(st1.p, sol.y[n:, -1], atol=1e-8)


def test_evolve_semigroup(rng0):
    st0 = random_state(rng0, 12)
    a = evolve_deterministic(st0, 0.003 + 0.001)
    b = evolve_deterministic(evolve_deterministic(st0, 0.003), 0.001)
    assert np.allclose(a.r, b.r, atol=1e-12 * max(1, np.abs(a.r).max()))
    assert np.allclose(a.p, b.p, atol=1e-12 * max(1, np.abs(a.p).max()))


def test_evolve_per_mode_norm(rng0):
    st0 = random_state(rng0, 16)
    st1 = evolve_deterministic(st0, 0.013)
    rh0, ph0 = dft(st0)
    rh1, ph1 = dft(st1)
    n0 = np.abs(rh0) ** 2 + np.abs(ph0) ** 2
    n1 = np.abs(rh1) ** 2 + np.abs(ph1) ** 2
    assert np.allclose(n1, n0, rtol=1e-12)


def test_mode_rotation_type():
    rot = ModeRotation.for_mode(4, 1)
    assert rot.omega == pytest.approx(2 * 16 * np.sin(np.pi / 4))
    r1, p1 = rot.apply(1.0 + 0j, 0.0 + 0j, 2 * np.pi / rot.omega)
    assert r1 == pytest.approx(1.0, abs=1e-12)  # full period
    assert abs(p1) < 1e-12


# ---------------------------------------------------------------------------
# flips


def test_flip_zero_momentum_noop(rng0):
    st0 = ChainState(rng0.normal(size=6), np.zeros(6))
    st1 = flip(st0, 2)
    assert np.array_equal(st1.p, st0.p)
    assert np.array_equal(st1.r, st0.r)


def test_flip_involution(rng0):
    st0 = random_state(rng0, 9)
    st2 = flip(flip(st0, 4), 4)
    assert np.array_equal(st2.p, st0.p)


def test_flip_energy_bit_exact(rng0):
    st0 = random_state(rng0, 11)
    st1 = flip(st0, 7)
    assert np.array_equal(energy_per_site(st1), energy_per_site(st0))


def test_flip_out_of_range():
    st0 = ChainState(np.zeros(4), np.zeros(4))
    with pytest.raises(IndexError):
        flip(st0, 4)


def test_flip_fourier_cache_consistent(rng0):
    st0 = random_state(rng0, 10)
    st0.modes()
    st1 = flip(st0, 3)
    cached = st1._phat.copy()
    st1._phat = None
    st1._rhat = None
    fresh = st1.modes()[1]
    assert np.allclose(cached, fresh, atol=1e-10)


# ---------------------------------------------------------------------------
# stochastic simulation


@pytest.mark.parametrize("engine", ["numpy", "numba"])
def test_simulate_trivial_on_dc_state(engine):
    # zero momenta, constant r: flips act on p = 0, rotation fixes DC
    n = 8
    st0 = ChainState(np.full(n, 2.0), np.zeros(n))
    st1 = simulate(st0, 0.05, 3.0, np.random.default_rng(5), engine=engine)
    assert np.allclose(st1.r, st0.r, atol=1e-10)
    assert np.allclose(st1.p, 0, atol=1e-10)


def test_simulate_validates_args(rng0):
    st0 = random_state(rng0, 4)
    with pytest.raises(ValueError):
        simulate(st0, 1.0, -1.0, np.random.default_rng(0))
    st0.t = 2.0
    with pytest.raises(ValueError):
        simulate(st0, 1.0, 1.0, np.random.default_rng(0))


def test_simulate_flip_count_poisson():
    n, gamma, t = 8, 2.0, 0.5
    runs = 400
    mean_rate = gamma * n ** 3 * t
    counts = []
    for i in range(runs):
        st0 = ChainState(np.ones(n), np.ones(n))
        _, flips = simulate_path(st0, [t], gamma, np.random.default_rng(1000 + i))
        counts.append(flips)
    avg = np.mean(counts)
    assert abs(avg - mean_rate) <= 4 * np.sqrt(mean_rate / runs)


@pytest.mark.parametrize("engine", ["numpy", "numba"])
def test_simulate_conservation(engine, rng0):
    st0 = random_state(rng0, 32)
    E0, R0 = total_energy(st0), total_elongation(st0)
    st1 = simulate(st0, 0.05, 1.0, np.random.default_rng(77), engine=engine)
    assert abs(total_energy(st1) - E0) / E0 <= 1e-10
    assert abs(total_elongation(st1) - R0) <= 1e-10 * st0.n


def test_simulate_deterministic_given_seed(rng0):
    st0 = random_state(rng0, 16)
    a = simulate(st0, 0.02, 1.5, np.random.default_rng(9), engine="numba")
    b = simulate(st0, 0.02, 1.5, np.random.default_rng(9), engine="numba")
    assert np.array_equal(a.r, b.r) and np.array_equal(a.p, b.p)


def test_simulate_snapshot_grid_invariance(rng0):
    # splitting the horizon differently must not change the trajectory
    st0 = random_state(rng0, 12)
    a = simulate(st0, 0.04, 1.0, np.random.default_rng(3))
    snaps, _ = simulate_path(st0, [0.01, 0.025, 0.04], 1.0,
                             np.random.default_rng(3))
    b = snaps[-1]
    assert np.allclose(a.r, b.r, atol=1e-12)
    assert np.allclose(a.p, b.p, atol=1e-12)


def test_engines_agree(rng0):
    st0 = random_state(rng0, 24)
    a = simulate(st0, 0.05, 1.0, np.random.default_rng(4), engine="numpy")
    b = simulate(st0, 0.05, 1.0, np.random.default_rng(4), engine="numba")
    scale = max(1.0, np.abs(a.r).max(), np.abs(a.p).max())
    assert np.allclose(a.r, b.r, atol=1e-10 * scale)
    assert np.allclose(a.p, b.p, atol=1e-10 * scale)


def test_sign_law_single_site():
    # n = 1: the flow vanishes and p_0 is a pure telegraph sign process with
    # flip rate gamma; P(sign unchanged at t) = (1 + exp(-2 gamma t)) / 2
    gamma, t, runs = 3.0, 0.4, 4000
    same = 0
    for i in range(runs):
        st0 = ChainState(np.array([0.3]), np.array([1.0]))
        st1 = simulate(st0, t, gamma, np.random.default_rng(50_000 + i),
                       engine="numpy")
        same += st1.p[0] > 0
    p_hat = same / runs
    p_true = 0.5 * (1 + np.exp(-2 * gamma * t))
    se = np.sqrt(p_true * (1 - p_true) / runs)
    assert abs(p_hat - p_true) <= 4 * se


def naive_simulate_n2(state, t_end, gamma, rng):
    """Independent law oracle for n = 2: per-site exponential clocks and the
    exact 4x4 propagator between events (site-space, scipy expm)."""
    n = 2
    A = np.zeros((4, 4))
    # order (r0, r1, p0, p1)
    A[0, 2], A[0, 3] = n ** 2, -n ** 2
    A[1, 2], A[1, 3] = -n ** 2, n ** 2
    A[2, 0], A[2, 1] = -n ** 2, n ** 2
    A[3, 0], A[3, 1] = n ** 2, -n ** 2
    y = np.concatenate([state.r, state.p])
    t = state.t
    rate = gamma * n ** 2  # per site
    clocks = t + rng.exponential(1 / rate, size=2)
    while True:
        x = int(np.argmin(clocks))
        tev = clocks[x]
        if tev > t_end:
            y = expm(A * (t_end - t)) @ y
            return ChainState(y[:2], y[2:], t_end)
        y = expm(A * (tev - t)) @ y
        y[2 + x] = -y[2 + x]
        t = tev
        clocks[x] = t + rng.exponential(1 / rate)


def test_sign_law_n2_vs_independent_oracle():
    # distribution of sign(p_0(t)) compared between the production engine and
    # a structurally different simulator (site clocks + expm propagation)
    gamma, t, runs = 1.0, 0.25, 1500
    st0 = ChainState(np.array([0.4, -0.4]), np.array([0.8, 0.1]))
    prod = 0
    ref = 0
    for i in range(runs):
        s1 = simulate(st0, t, gamma, np.random.default_rng(123_000 + i),
                      engine="numba")
        prod += s1.p[0] > 0
        s2 = naive_simulate_n2(st0, t, gamma, np.random.default_rng(456_000 + i))
        ref += s2.p[0] > 0
    p1, p2 = prod / runs, ref / runs
    se = np.sqrt((p1 * (1 - p1) + p2 * (1 - p2)) / runs)
    assert abs(p1 - p2) <= 4 * max(se, 1e-3)


# ---------------------------------------------------------------------------
# mean-wave evolution


def test_mean_wave_zero():
    out = evolve_mean_wave(np.zeros(8, dtype=complex), 0.1, 1.0)
    assert np.all(out == 0)


def test_mean_wave_dc_mode_invariant():
    # real initial data: the k = 0 mode has no flow and no damped part
    n = 8
    psi = np.fft.fft(np.linspace(0.5, 1.5, n)) + 0j
    out = evolve_mean_wave(psi, 0.05, 2.0)
    assert out[0] == pytest.approx(psi[0], rel=1e-12)


def test_mean_wave_matches_ode(rng0):
    # oracle: integrate the damped mode system directly
    n, gamma = 12, 0.8
    r = rng0.normal(size=n)
    p = rng0.normal(size=n)
    psi0 = np.fft.fft(r) + 1j * np.fft.fft(p)

    def rhs(_, y):
        psih = y[:n] + 1j * y[n:]
        k = np.arange(n) / n
        rev = np.conj(psih[(-np.arange(n)) % n])
        d = (-n ** 2 * (2j * np.sin(np.pi * k) ** 2 * psih
                        + np.sin(2 * np.pi * k) * rev)
             - gamma * n ** 2 * (psih - rev))
        return np.concatenate([d.real, d.imag])

    T = 0.4 / n ** 2
    sol = solve_ivp(rhs, (0, T), np.concatenate([psi0.real, psi0.imag]),
                    method="DOP853", rtol=1e-12, atol=1e-14)
    ref = sol.y[:n, -1] + 1j * sol.y[n:, -1]
    got = evolve_mean_wave(psi0, T, gamma)
    assert np.max(np.abs(got - ref)) <= 1e-9 * np.max(np.abs(ref))


def test_mean_wave_matches_ensemble():
    # Monte Carlo oracle: ensemble average of the flip dynamics
    n, gamma, t, M = 16, 1.0, 0.02, 3000
    rng = np.random.default_rng(8)
    base_r = 1.0 + 0.5 * np.cos(2 * np.pi * np.arange(n) / n)
    acc = np.zeros(n, dtype=complex)
    for i in range(M):
        st0 = ChainState(base_r.copy(), np.zeros(n))
        st1 = simulate(st0, t, gamma, np.random.default_rng(700_000 + i))
        acc += wave_function(st1)
    emp = np.fft.fft(acc / M)
    pred = evolve_mean_wave(np.fft.fft(base_r) + 0j, t, gamma)
    # crude per-mode Monte Carlo scale: sqrt(n * var / M), var ~ O(1)
    band = 4 * np.sqrt(n / M) * np.sqrt(np.sum(np.abs(base_r) ** 2))
    assert np.max(np.abs(emp - pred)) <= band


def test_wave_function_identities(rng0):
    st0 = random_state(rng0, 10)
    psi = wave_function(st0)
    assert np.allclose(np.abs(psi) ** 2, 2 * energy_per_site(st0), rtol=1e-12)
    psih = wave_function_hat(st0)
    rhat, phat = dft(st0)
    rh2, ph2 = modes_from_mean_wave(psih)
    assert np.allclose(rh2, rhat, atol=1e-10)
    assert np.allclose(ph2, phat, atol=1e-10)
    assert np.allclose(mean_wave_from_modes(rhat, phat), psih, atol=1e-12)


def test_wave_real_when_momentum_zero(rng0):
    st0 = ChainState(rng0.normal(size=7), np.zeros(7))
    assert np.all(wave_function(st0).imag == 0)
