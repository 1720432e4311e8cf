"""Microscopic dynamics of the velocity-flip harmonic chain.

State: spring elongations r_x and momenta p_x on the discrete circle of n
sites.  In macroscopic time t the motion is

    dr_x = n^2 (p_x - p_{x-1}) dt
    dp_x = n^2 (r_{x+1} - r_x) dt - 2 p_x dN_x,

with N_x independent Poisson clocks of rate gamma n^2 each (gamma n^3 for the
whole chain).  Between flips each Fourier mode pair rotates rigidly at
frequency 2 n^2 sin(pi k), so the simulation is event-driven and carries no
time-discretization error: the returned state is exact in law.

Conserved along every trajectory: sum_x r_x and the energy
H = sum_x (p_x^2 + r_x^2) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _engine
from ._engine import ModeTables

__all__ = [
    "ChainState", "ModeRotation", "energy_per_site", "total_energy",
    "total_elongation", "dft", "idft", "wave_function", "wave_function_hat",
    "evolve_deterministic", "flip", "simulate", "simulate_path",
    "evolve_mean_wave", "mean_wave_from_modes", "modes_from_mean_wave",
]


@dataclass
class ChainState:
    """Configuration (r, p) at macroscopic time t, with a lazy Fourier cache."""

    r: np.ndarray
    p: np.ndarray
    t: float = 0.0
    _rhat: np.ndarray | None = field(default=None, repr=False)
    _phat: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float)
        self.p = np.asarray(self.p, dtype=float)
        if self.r.ndim != 1 or self.r.shape != self.p.shape or self.r.size < 1:
            raise ValueError("r and p must be 1-d arrays of equal positive length")
        if self.t < 0:
            raise ValueError("time must be nonnegative")

    @property
    def n(self) -> int:
        return self.r.size

    def modes(self):
        """Discrete Fourier transforms (rhat, phat), cached."""
        if self._rhat is None:
            self._rhat = np.fft.fft(self.r)
            self._phat = np.fft.fft(self.p)
        return self._rhat, self._phat

    def copy(self) -> "ChainState":
        st = ChainState(self.r.copy(), self.p.copy(), self.t)
        if self._rhat is not None:
            st._rhat = self._rhat.copy()
            st._phat = self._phat.copy()
        return st

    @staticmethod
    def from_modes(rhat: np.ndarray, phat: np.ndarray, t: float = 0.0) -> "ChainState":
        r = np.fft.ifft(rhat)
        p = np.fft.ifft(phat)
        st = ChainState(r.real, p.real, t)
        st._rhat = np.asarray(rhat, dtype=complex)
        st._phat = np.asarray(phat, dtype=complex)
        return st


@dataclass(frozen=True)
class ModeRotation:
    """Per-mode generator of the flip-free flow: rhat' = coupling * phat,
    phat' = -conj(coupling) * rhat, a rotation at frequency omega."""

    k: float
    omega: float
    coupling: complex

    @staticmethod
    def for_mode(n: int, j: int) -> "ModeRotation":
        k = (j % n) / n
        return ModeRotation(k=k,
                            omega=2.0 * n * n * np.sin(np.pi * k),
                            coupling=n * n * (1.0 - np.exp(-2j * np.pi * k)))

    def apply(self, rhat: complex, phat: complex, dt: float) -> tuple[complex, complex]:
        if self.omega == 0.0:
            return rhat, phat
        c = np.cos(self.omega * dt)
        s = np.sin(self.omega * dt)
        u = self.coupling / self.omega
        return c * rhat + s * u * phat, c * phat - s * np.conj(u) * rhat


# ---------------------------------------------------------------------------
# elementary observables


def energy_per_site(state: ChainState) -> np.ndarray:
    """E_x = p_x^2/2 + r_x^2/2  (equals |psi_x|^2 / 2)."""
    return 0.5 * (state.p ** 2 + state.r ** 2)


def total_energy(state: ChainState) -> float:
    # np.sum is pairwise, which keeps the conservation budget tight at n ~ 2^10
    return float(np.sum(energy_per_site(state)))


def total_elongation(state: ChainState) -> float:
    return float(np.sum(state.r))


def dft(state: ChainState):
    """Mode vectors (rhat, phat) with fhat(k_j) = sum_x f_x exp(-2 pi i x j / n)."""
    return state.modes()


def idft(rhat: np.ndarray, phat: np.ndarray):
    """Inverse transform back to site values (real parts of ifft)."""
    return np.fft.ifft(rhat).real, np.fft.ifft(phat).real


def wave_function(state: ChainState) -> np.ndarray:
    """psi_x = r_x + i p_x."""
    return state.r + 1j * state.p


def wave_function_hat(state: ChainState) -> np.ndarray:
    rhat, phat = state.modes()
    return rhat + 1j * phat


# ---------------------------------------------------------------------------
# dynamics


def evolve_deterministic(state: ChainState, dt: float) -> ChainState:
    """Flip-free evolution by dt: exact rotation of every Fourier mode."""
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    n = state.n
    rhat, phat = state.modes()
    tb = ModeTables.get(n, 1.0)
    omega = tb.omega
    c = np.cos(omega * dt)
    s = np.sin(omega * dt)
    coupling = n * n * (1.0 - np.exp(-2j * np.pi * np.arange(n) / n))
    u = np.ones(n, dtype=complex)
    nz = omega > 0
    u[nz] = coupling[nz] / omega[nz]
    s = np.where(nz, s, 0.0)  # omega = 0 modes are fixed points
    rh2 = c * rhat + s * u * phat
    ph2 = c * phat - s * np.conj(u) * rhat
    return ChainState.from_modes(rh2, ph2, state.t + dt)


def flip(state: ChainState, x: int) -> ChainState:
    """Reverse the momentum at site x; energy is unchanged bit for bit."""
    n = state.n
    if not (-n <= x < n):
        raise IndexError(f"site index {x} out of range for n={n}")
    x %= n
    st = state.copy()
    px = st.p[x]
    st.p[x] = -px
    if st._phat is not None:
        # rank-one correction, O(n) instead of an O(n log n) re-transform
        st._phat = st._phat - 2.0 * px * np.exp(-2j * np.pi * x * np.arange(n) / n)
    return st


def simulate(state: ChainState, t_end: float, gamma: float, rng,
             engine: str = "auto") -> ChainState:
    """Run the flip dynamics from state.t to t_end.  Exact in law.

    The global flip clock has rate gamma n^3 in macroscopic time; waiting
    times are exponential and sites uniform.  Identical (seed, engine) input
    reproduces the trajectory bit for bit.
    """
    out, _ = _simulate_impl(state, [t_end], gamma, rng, engine, keep=True)
    return out[0]


def simulate_path(state: ChainState, times, gamma: float, rng,
                  engine: str = "auto", observer=None):
    """Advance through the sorted times, snapshotting (or calling observer).

    Returns (snapshots, flip_count); snapshots is empty when an observer is
    given (observer(index, state) is called instead, avoiding storage).
    """
    return _simulate_impl(state, times, gamma, rng, engine,
                          keep=observer is None, observer=observer)


def _simulate_impl(state, times, gamma, rng, engine, keep, observer=None):
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    times = list(times)
    if any(t < state.t for t in times):
        raise ValueError("cannot simulate backwards: target before state.t")
    if any(b < a for a, b in zip(times, times[1:])):
        raise ValueError("snapshot times must be nondecreasing")
    rhat, phat = state.modes()
    loop = _engine.EventLoopState(rhat, phat, state.t, gamma, rng, engine)
    snaps = []
    for idx, tk in enumerate(times):
        loop.advance(tk)
        rh, ph = loop.modes()
        snap = ChainState.from_modes(rh, ph, tk)
        if keep:
            snaps.append(snap)
        if observer is not None:
            observer(idx, snap)
    return snaps, loop.flips


# ---------------------------------------------------------------------------
# deterministic mean-wave evolution


def modes_from_mean_wave(psi_hat: np.ndarray):
    """Split psihat into its elongation/momentum mode parts.

    rhat(k) = (psihat(k) + conj(psihat(-k))) / 2,
    phat(k) = (psihat(k) - conj(psihat(-k))) / (2i); both Hermitian.
    """
    n = psi_hat.size
    rev = np.conj(psi_hat[(-np.arange(n)) % n])
    return 0.5 * (psi_hat + rev), (psi_hat - rev) / 2j


def mean_wave_from_modes(rhat: np.ndarray, phat: np.ndarray) -> np.ndarray:
    return rhat + 1j * phat


def evolve_mean_wave(psi_bar_hat: np.ndarray, dt: float, gamma: float) -> np.ndarray:
    """Evolve the ensemble-mean wave by dt.

    The mean obeys the flip-free flow plus the damping -gamma n^2
    (psihat(k) - conj(psihat(-k))), i.e. in mode coordinates

        rhat' = alpha phat,   phat' = -conj(alpha) rhat - 2 gamma n^2 phat,

    a constant linear system per mode solved here by its closed-form matrix
    exponential (stable for arbitrarily large gamma n^2 dt).
    """
    if dt < 0:
        raise ValueError("dt must be nonnegative")
    psi_bar_hat = np.asarray(psi_bar_hat, dtype=complex)
    n = psi_bar_hat.size
    rhat, phat = modes_from_mean_wave(psi_bar_hat)
    k = np.arange(n) / n
    alpha = n * n * (1.0 - np.exp(-2j * np.pi * k))
    w2 = np.abs(alpha) ** 2
    G = gamma * n * n
    s = np.sqrt((G * G - w2).astype(complex))
    ep = np.exp((s - G) * dt)
    em = np.exp((-s - G) * dt)
    ch = 0.5 * (ep + em)                      # exp(-G dt) cosh(s dt)
    small = np.abs(s * dt) < 1e-8
    safe = np.where(small, 1.0, s)
    sh = np.where(small,
                  dt * np.exp(-G * dt) * (1.0 + (s * dt) ** 2 / 6.0),
                  (ep - em) / (2.0 * safe))   # exp(-G dt) sinh(s dt)/s
    a11 = ch + sh * G
    a12 = sh * alpha
    a21 = -sh * np.conj(alpha)
    a22 = ch - sh * G
    rh2 = a11 * rhat + a12 * phat
    ph2 = a21 * rhat + a22 * phat
    # k = 0: the flow vanishes and damping only kills the momentum part
    rh2[0] = rhat[0]
    ph2[0] = phat[0] * np.exp(-2.0 * G * dt)
    return mean_wave_from_modes(rh2, ph2)
