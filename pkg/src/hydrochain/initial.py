"""Initial ensembles: thermodynamic conversions and local Gibbs sampling.

The product measure with tension profile tau0 and inverse-temperature profile
beta0 samples, independently per site x,

    r_x ~ Normal(tau0(x/n), 1/beta0(x/n)),    p_x ~ Normal(0, 1/beta0(x/n)),

so the mean elongation profile is tau0 and the expected energy per site is
1/beta0 + tau0^2/2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import ChainState
from .profiles import MacroProfile

__all__ = ["thermo_r", "thermo_e", "local_gibbs_sample", "thermal_spectrum",
           "check_assumptions", "SpectrumReport", "AssumptionReport"]


def thermo_r(tau: float, beta: float) -> float:
    """Equilibrium elongation at tension tau and inverse temperature beta."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return float(tau)


def thermo_e(tau: float, beta: float) -> float:
    """Equilibrium energy per site: 1/beta thermal plus tau^2/2 mechanical."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return 1.0 / beta + 0.5 * tau * tau


def local_gibbs_sample(tau0: MacroProfile, beta0: MacroProfile, n: int,
                       rng) -> ChainState:
    """Draw one chain configuration from the site-inhomogeneous Gibbs product.

    Draw order (r block first, then p block) is fixed so a seeded stream
    reproduces the sample exactly.
    """
    if n < 1:
        raise ValueError("n must be positive")
    beta_vals = beta0.grid_values(n)
    if np.any(beta_vals <= 0):
        raise ValueError("beta0 must be strictly positive on the lattice")
    sd = 1.0 / np.sqrt(beta_vals)
    tau_vals = tau0.grid_values(n)
    r = tau_vals + sd * rng.standard_normal(n)
    p = sd * rng.standard_normal(n)
    return ChainState(r, p, 0.0)


@dataclass
class SpectrumReport:
    """Thermal energy spectrum of an ensemble at a common time.

    u[k]       (2n)^{-1} E[|phat(k)|^2 + |rhat(k) - E rhat(k)|^2]
    u_wave[k]  (2n)^{-1} E[|psihat(k) - E psihat(k)|^2]
    stderr[k]  ensemble standard error of u[k]
    """

    u: np.ndarray
    u_wave: np.ndarray
    stderr: np.ndarray
    mean_energy: float
    l2_density: float
    n: int
    ensemble: int

    def bracket_ok(self, tol: float = 1e-9) -> bool:
        """Cauchy-Schwarz envelope u_wave/2 <= u <= 2 u_wave."""
        lo = 0.5 * self.u_wave - tol * (1.0 + self.u_wave)
        hi = 2.0 * self.u_wave + tol * (1.0 + self.u_wave)
        return bool(np.all(self.u >= lo) and np.all(self.u <= hi))


def thermal_spectrum(ensemble) -> SpectrumReport:
    """Estimate the thermal energy spectrum from states at a common time."""
    states = list(ensemble)
    m = len(states)
    if m < 2:
        raise ValueError("need an ensemble of at least 2 states")
    n = states[0].n
    if any(s.n != n for s in states) or any(s.t != states[0].t for s in states):
        raise ValueError("ensemble states must share n and t")
    rh = np.stack([s.modes()[0] for s in states])
    ph = np.stack([s.modes()[1] for s in states])
    rbar = rh.mean(axis=0)
    pbar = ph.mean(axis=0)
    samples = (np.abs(ph) ** 2 + np.abs(rh - rbar) ** 2) / (2 * n)
    u = samples.mean(axis=0)
    stderr = samples.std(axis=0, ddof=1) / np.sqrt(m)
    psih = rh + 1j * ph
    u_wave = (np.abs(psih - (rbar + 1j * pbar)) ** 2).mean(axis=0) / (2 * n)
    mean_energy = float((np.abs(psih) ** 2).mean(axis=0).sum() / (2 * n * n))
    return SpectrumReport(u=u, u_wave=u_wave, stderr=stderr,
                          mean_energy=mean_energy,
                          l2_density=float((u ** 2).mean()),
                          n=n, ensemble=m)


@dataclass
class AssumptionReport:
    mean_energy: float
    max_p_sigmas: float          # max_x |mean p_x| / stderr
    max_r_dev_sigmas: float      # max_x |mean r_x - r0(x/n)| / stderr, if r0 given
    l2_spectral_density: float   # n^{-1} sum_k u(k)^2
    flags: list

    @property
    def ok(self) -> bool:
        return not self.flags


def check_assumptions(ensemble, r0: MacroProfile | None = None,
                      sigma_limit: float = 5.0,
                      l2_density_limit: float | None = None) -> AssumptionReport:
    """Diagnostics for an initial ensemble: centred momenta, elongation means
    on the target profile, and square-integrable thermal spectrum density.

    l2_density_limit defaults to a generous multiple of the flat-spectrum
    value (mean thermal energy squared); ensembles whose spectrum piles up on
    a few modes exceed it and get flagged.
    """
    states = list(ensemble)
    m = len(states)
    n = states[0].n
    flags = []
    P = np.stack([s.p for s in states])
    R = np.stack([s.r for s in states])
    p_mean = P.mean(axis=0)
    p_se = P.std(axis=0, ddof=1) / np.sqrt(m) if m > 1 else np.full(n, np.inf)
    max_p = float(np.max(np.abs(p_mean) / np.maximum(p_se, 1e-300)))
    if np.all(p_se == 0):
        max_p = 0.0 if np.all(p_mean == 0) else np.inf
    if max_p > sigma_limit:
        flags.append(f"momentum means off zero ({max_p:.1f} sigmas)")
    max_r = 0.0
    if r0 is not None:
        target = r0.grid_values(n)
        r_se = R.std(axis=0, ddof=1) / np.sqrt(m) if m > 1 else np.full(n, np.inf)
        dev = np.abs(R.mean(axis=0) - target)
        max_r = float(np.max(dev / np.maximum(r_se, 1e-300)))
        if np.all(r_se == 0):
            max_r = 0.0 if np.allclose(dev, 0) else np.inf
        if max_r > sigma_limit:
            flags.append(f"elongation means off r0 ({max_r:.1f} sigmas)")
    if m >= 2:
        spec = thermal_spectrum(states)
        l2 = spec.l2_density
        thermal_mean = float(spec.u.mean())
        limit = l2_density_limit if l2_density_limit is not None \
            else max(10.0 * thermal_mean ** 2, 1e-12)
        if l2 > limit:
            flags.append(f"thermal spectrum l2 density {l2:.3g} exceeds {limit:.3g}")
        if not spec.bracket_ok():
            flags.append("wave/plain spectrum envelope violated")
        mean_energy = spec.mean_energy
    else:
        l2 = 0.0
        mean_energy = float(np.mean(0.5 * (P ** 2 + R ** 2)))
    return AssumptionReport(mean_energy=mean_energy, max_p_sigmas=max_p,
                            max_r_dev_sigmas=max_r, l2_spectral_density=l2,
                            flags=flags)
