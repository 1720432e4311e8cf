"""Spectral solver for the macroscopic elongation/thermal-energy system.

    d_t r     = (1/2 gamma) d_uu r
    d_t e_thm = (1/4 gamma) d_uu e_thm + (1/2 gamma) (d_u r)^2

on the unit torus, for band-limited initial data.  The elongation modes decay
exactly, the thermal equation is integrated per mode by Duhamel's formula
with adaptive quadrature of the (entire, exponential-sum) source, so both
fields are spectrally exact in space and near machine precision in time.

Mechanical energy is e_mech = r^2 / 2; the total e = e_mech + e_thm obeys the
conservation-law form d_t e = (1/4 gamma) d_uu (e + r^2/2), and its torus
average is constant: dissipated mechanical energy reappears as thermal energy.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .profiles import MacroProfile

__all__ = ["MacroState", "solve_elongation", "grad_r_squared_fourier",
           "solve_thermal", "total_energy_profile", "entropy_functional",
           "eval_coeffs", "convolve_coeffs", "pad_coeffs"]


# coefficient arrays are centered: c[m] multiplies exp(2 pi i (m - M) u)


def pad_coeffs(c: np.ndarray, M: int) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    cur = (c.size - 1) // 2
    if cur > M:
        out = c[cur - M:cur + M + 1].copy()
        return out
    out = np.zeros(2 * M + 1, dtype=complex)
    out[M - cur:M + cur + 1] = c
    return out


def convolve_coeffs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients of the pointwise product (full band, no truncation)."""
    return np.convolve(np.asarray(a, complex), np.asarray(b, complex))


def eval_coeffs(c: np.ndarray, u) -> np.ndarray:
    M = (c.size - 1) // 2
    etas = np.arange(-M, M + 1)
    vals = np.tensordot(np.exp(2j * np.pi * np.multiply.outer(np.asarray(u, float), etas)),
                        c, axes=([-1], [0]))
    return vals.real


@dataclass
class MacroState:
    """Fourier data of r(t, .) and e_thm(t, .) with the noise intensity gamma."""

    t: float
    r_hat: np.ndarray
    ethm_hat: np.ndarray
    gamma: float

    @property
    def n_modes(self) -> int:
        return (self.ethm_hat.size - 1) // 2

    @staticmethod
    def from_profiles(tau0: MacroProfile, beta0: MacroProfile, gamma: float,
                      n_modes: int = 64) -> "MacroState":
        """Initial data r = tau0, e_thm = 1/beta0 (projected onto n_modes)."""
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        beta0.require_positive("beta0")
        if n_modes < 2 * tau0.mode_cap + 2:
            raise ValueError("n_modes must be at least 2 * (tau0 band) + 2")
        r_hat = pad_coeffs(tau0.coeffs, tau0.mode_cap)
        grid = 8192
        temp = 1.0 / beta0.eval(np.arange(grid) / grid)
        ft = np.fft.fft(temp) / grid
        ethm = np.zeros(2 * n_modes + 1, dtype=complex)
        ethm[n_modes] = ft[0]
        for e in range(1, n_modes + 1):
            ethm[n_modes + e] = ft[e]
            ethm[n_modes - e] = ft[-e]
        st = MacroState(0.0, r_hat, ethm, gamma)
        if st.min_ethm() <= 0:
            raise ValueError("initial thermal energy must be positive")
        return st

    def min_ethm(self, grid: int = 2048) -> float:
        return float(eval_coeffs(self.ethm_hat, np.arange(grid) / grid).min())

    def advance(self, t: float) -> "MacroState":
        """Solution at absolute time t >= self.t (exact spectral evolution)."""
        dt = t - self.t
        if dt < 0:
            raise ValueError("cannot evolve backwards")
        r2 = solve_elongation(self.r_hat, dt, self.gamma)
        e2 = solve_thermal(self.ethm_hat, self.r_hat, dt, self.gamma)
        return MacroState(t, r2, pad_coeffs(e2, self.n_modes), self.gamma)


def solve_elongation(r0_hat: np.ndarray, t: float, gamma: float) -> np.ndarray:
    """rhat(t, eta) = exp(-(2 pi eta)^2 t / (2 gamma)) rhat(0, eta)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    r0_hat = np.asarray(r0_hat, dtype=complex)
    M = (r0_hat.size - 1) // 2
    etas = np.arange(-M, M + 1)
    return r0_hat * np.exp(-(2 * np.pi * etas) ** 2 * t / (2 * gamma))


def grad_r_squared_fourier(r_hat: np.ndarray) -> np.ndarray:
    """Coefficients of (d_u r)^2: autoconvolution of {2 pi i eta rhat(eta)}."""
    r_hat = np.asarray(r_hat, dtype=complex)
    M = (r_hat.size - 1) // 2
    d = 2j * np.pi * np.arange(-M, M + 1) * r_hat
    return convolve_coeffs(d, d)


def _source_terms(r0_hat: np.ndarray, gamma: float, eta: int):
    """(d_u r_s)^2 coefficient at eta as sum of amp * exp(-rate * s) terms."""
    r0_hat = np.asarray(r0_hat, dtype=complex)
    M = (r0_hat.size - 1) // 2
    amps, rates = [], []
    for xi in range(max(-M, eta - M), min(M, eta + M) + 1):
        zeta = eta - xi
        amp = (2j * np.pi * xi) * (2j * np.pi * zeta) * r0_hat[xi + M] * r0_hat[zeta + M]
        if amp != 0:
            amps.append(amp)
            rates.append(((2 * np.pi * xi) ** 2 + (2 * np.pi * zeta) ** 2) / (2 * gamma))
    return np.array(amps, dtype=complex), np.array(rates, dtype=float)


def solve_thermal(ethm0_hat: np.ndarray, r0_hat: np.ndarray, t: float,
                  gamma: float, rtol: float = 1e-11) -> np.ndarray:
    """Thermal modes at time t via the per-mode integrating factor

        ethm(t, eta) = e^{-mu t} ethm(0, eta)
                       + (1/2 gamma) int_0^t e^{-mu (t-s)} q_eta(s) ds,

    mu = (2 pi eta)^2 / (4 gamma), q_eta = coefficients of (d_u r_s)^2.
    The s-integral is evaluated by adaptive quadrature; the integrand is a
    finite sum of decaying exponentials, so the requested tolerance is cheap.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    ethm0_hat = np.asarray(ethm0_hat, dtype=complex)
    Me = (ethm0_hat.size - 1) // 2
    Mr = (np.asarray(r0_hat).size - 1) // 2
    Mout = max(Me, 2 * Mr)
    out = np.zeros(2 * Mout + 1, dtype=complex)
    if t == 0:
        out[Mout - Me:Mout + Me + 1] = ethm0_hat
        return out
    for eta in range(0, Mout + 1):
        mu = (2 * np.pi * eta) ** 2 / (4 * gamma)
        val = ethm0_hat[eta + Me] * np.exp(-mu * t) if eta <= Me else 0.0
        amps, rates = _source_terms(r0_hat, gamma, eta)
        if amps.size:
            def integrand_re(s):
                return float(np.real(np.exp(-mu * (t - s)) * np.dot(amps, np.exp(-rates * s))))

            def integrand_im(s):
                return float(np.imag(np.exp(-mu * (t - s)) * np.dot(amps, np.exp(-rates * s))))

            scale = float(np.sum(np.abs(amps))) * t + 1e-300
            re, _ = quad(integrand_re, 0.0, t, epsrel=rtol, epsabs=rtol * scale, limit=200)
            im, _ = quad(integrand_im, 0.0, t, epsrel=rtol, epsabs=rtol * scale, limit=200)
            val = val + (re + 1j * im) / (2 * gamma)
        out[Mout + eta] = val
        out[Mout - eta] = np.conj(val)
    return out


def total_energy_profile(state: MacroState):
    """Coefficient arrays (e, e_mech) of the total and mechanical energy,
    both on the band of e_thm plus the r autoconvolution width."""
    mech = 0.5 * convolve_coeffs(state.r_hat, state.r_hat)
    Mm = (mech.size - 1) // 2
    M = max(Mm, state.n_modes)
    e = pad_coeffs(mech, M) + pad_coeffs(state.ethm_hat, M)
    return e, pad_coeffs(mech, M)


def entropy_functional(state: MacroState, grid: int = 2048) -> float:
    """int_T log e_thm(t, u) du by the (periodic, uniform) trapezoid rule;
    nondecreasing in t along solutions."""
    vals = eval_coeffs(state.ethm_hat, np.arange(grid) / grid)
    if np.any(vals <= 0):
        raise ValueError("thermal energy must be positive on the grid")
    return float(np.mean(np.log(vals)))
