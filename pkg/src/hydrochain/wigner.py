"""Ensemble Wigner estimators, their Laplace transforms, and macroscopic targets.

The two-point correlation of the wave function psi = r + i p resolves energy
jointly over the lattice wavenumber k and a macroscopic modulation index eta:

    W+(eta, k) = (2n)^{-1} E[ psihat(k + eta/n) psihat(k)^* ]

with companions Y+, Y-, W- closing its evolution (products of psihat and its
conjugate at the mirrored wavenumbers).  All shifts k + eta/n are taken mod 1.

Species are stored in the order (W+, Y+, Y-, W-).  The k-average of W+ over
the lattice equals the Fourier transform of the mean energy profile exactly,
sample by sample, which is what ties these estimators to the energy field.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .chain import ChainState, wave_function_hat
from .profiles import MacroProfile

__all__ = [
    "SPECIES", "WignerField", "LaplaceWignerField", "PairingPoly",
    "single_state_wigner", "wigner_estimate", "pair_with_test_function",
    "mean_fluct_decompose", "macro_wigner", "discrete_macro_wigner",
    "laplace_accumulate", "laplace_series", "laplace_macro",
    "laplace_grad_sq", "mech_thermal_laplace_targets",
    "export_wigner_csv", "export_laplace_csv",
]

SPECIES = ("W+", "Y+", "Y-", "W-")


def _species_samples(psih: np.ndarray, eta_max: int) -> np.ndarray:
    """One-state sample array, shape (4, 2*eta_max+1, n)."""
    n = psih.size
    k = np.arange(n)
    out = np.empty((4, 2 * eta_max + 1, n), dtype=complex)
    conj = np.conj(psih)
    for m, eta in enumerate(range(-eta_max, eta_max + 1)):
        up = psih[(k + eta) % n]
        dn_conj = conj[(-k - eta) % n]
        out[0, m] = up * conj[k] / (2 * n)
        out[1, m] = up * psih[(-k) % n] / (2 * n)
        out[2, m] = dn_conj * conj[k] / (2 * n)
        out[3, m] = dn_conj * psih[(-k) % n] / (2 * n)
    return out


def single_state_wigner(state: ChainState, eta_max: int) -> np.ndarray:
    """Species samples for one configuration (no ensemble averaging)."""
    if 2 * eta_max >= state.n:
        raise ValueError("need 2 * eta_max < n")
    return _species_samples(wave_function_hat(state), eta_max)


@dataclass
class WignerField:
    """Ensemble-averaged Wigner species on the (eta, k) grid.

    values[s, m, k] averages species s at eta = m - eta_max; stderr_re/im are
    per-cell standard errors of the real/imaginary parts (zero for a
    single-state field).
    """

    n: int
    eta_max: int
    t: float
    values: np.ndarray
    ensemble_count: int
    stderr_re: np.ndarray | None = field(default=None, repr=False)
    stderr_im: np.ndarray | None = field(default=None, repr=False)

    def species(self, name: str) -> np.ndarray:
        return self.values[SPECIES.index(name)]

    def at(self, name: str, eta: int) -> np.ndarray:
        if abs(eta) > self.eta_max:
            raise ValueError("eta outside stored band")
        return self.values[SPECIES.index(name), eta + self.eta_max]

    def k_average(self, name: str, eta: int) -> complex:
        return complex(self.at(name, eta).mean())


def wigner_estimate(ensemble, eta_max: int) -> WignerField:
    """Plain ensemble average of the species samples at a common time."""
    states = list(ensemble)
    if not states:
        raise ValueError("empty ensemble")
    n = states[0].n
    t = states[0].t
    if any(s.n != n or s.t != t for s in states):
        raise ValueError("ensemble states must share n and t")
    if 2 * eta_max >= n:
        raise ValueError("need 2 * eta_max < n")
    acc = np.zeros((4, 2 * eta_max + 1, n), dtype=complex)
    acc_re2 = np.zeros_like(acc, dtype=float)
    acc_im2 = np.zeros_like(acc, dtype=float)
    for s in states:
        sample = _species_samples(wave_function_hat(s), eta_max)
        acc += sample
        acc_re2 += sample.real ** 2
        acc_im2 += sample.imag ** 2
    m = len(states)
    mean = acc / m
    if m > 1:
        var_re = np.maximum(acc_re2 / m - mean.real ** 2, 0.0) * m / (m - 1)
        var_im = np.maximum(acc_im2 / m - mean.imag ** 2, 0.0) * m / (m - 1)
        se_re = np.sqrt(var_re / m)
        se_im = np.sqrt(var_im / m)
    else:
        se_re = np.zeros_like(acc_re2)
        se_im = np.zeros_like(acc_im2)
    return WignerField(n=n, eta_max=eta_max, t=t, values=mean,
                       ensemble_count=m, stderr_re=se_re, stderr_im=se_im)


@dataclass
class PairingPoly:
    """Trigonometric test function G(u, v) = sum g[eta, xi] e^{2pi i eta u} e^{2pi i xi v}.

    Its Fourier transform in u is FG(eta, v) = sum_xi g[eta, xi] e^{2pi i xi v}.
    """

    coeffs: dict  # {(eta, xi): complex}

    @property
    def eta_band(self) -> int:
        return max((abs(e) for e, _ in self.coeffs), default=0)

    @staticmethod
    def from_profile(g: MacroProfile) -> "PairingPoly":
        """G(u, v) = g(u), independent of the second variable."""
        return PairingPoly({(eta, 0): g.coeff(eta)
                               for eta in range(-g.mode_cap, g.mode_cap + 1)
                               if g.coeff(eta) != 0})

    @staticmethod
    def mode(eta: int, xi: int = 0, coeff: complex = 1.0) -> "PairingPoly":
        return PairingPoly({(eta, xi): coeff})

    def fg(self, eta: int, v) -> np.ndarray:
        """FG(eta, v) evaluated at points v."""
        v = np.asarray(v, dtype=float)
        out = np.zeros(v.shape, dtype=complex)
        for (e, xi), g in self.coeffs.items():
            if e == eta:
                out += g * np.exp(2j * np.pi * xi * v)
        return out

    def fg_integral(self, eta: int) -> complex:
        """int_T FG(eta, v) dv (only xi = 0 survives)."""
        return complex(self.coeffs.get((eta, 0), 0.0))

    def eval(self, u, v) -> np.ndarray:
        u = np.asarray(u, float)
        v = np.asarray(v, float)
        out = np.zeros(np.broadcast(u, v).shape, dtype=complex)
        for (e, xi), g in self.coeffs.items():
            out += g * np.exp(2j * np.pi * (e * u + xi * v))
        return out


def pair_with_test_function(fld: WignerField, G: PairingPoly,
                            species: str = "W+") -> complex:
    """n^{-1} sum_k sum_eta field(eta, k) FG(eta, k)^*.

    For G depending only on u this equals n^{-1} sum_x E[E_x] G(x/n)^*.
    """
    if G.eta_band > fld.eta_max:
        raise ValueError("test function uses eta outside the stored band")
    k = np.arange(fld.n) / fld.n
    s = SPECIES.index(species)
    tot = 0.0 + 0.0j
    for eta in range(-fld.eta_max, fld.eta_max + 1):
        fg = G.fg(eta, k)
        if np.any(fg != 0):
            tot += np.sum(fld.values[s, eta + fld.eta_max] * np.conj(fg))
    return complex(tot / fld.n)


def pair_sample(sample: np.ndarray, n: int, eta_max: int, G: PairingPoly,
                species: str = "W+") -> complex:
    """Pairing of a single-state species sample array (for per-trajectory CIs)."""
    k = np.arange(n) / n
    s = SPECIES.index(species)
    tot = 0.0 + 0.0j
    for eta in range(-eta_max, eta_max + 1):
        fg = G.fg(eta, k)
        if np.any(fg != 0):
            tot += np.sum(sample[s, eta + eta_max] * np.conj(fg))
    return complex(tot / n)


def mean_fluct_decompose(ensemble, eta_max: int):
    """Split the ensemble Wigner field into mean and fluctuation parts.

    The mean field is built from the ensemble-mean wave (a single
    deterministic configuration); the fluctuation field averages the species
    samples of the centred waves.  Their sum reproduces the plain estimate
    exactly, cell by cell.
    """
    states = list(ensemble)
    if len(states) < 2:
        raise ValueError("need an ensemble of at least 2 states")
    n = states[0].n
    t = states[0].t
    if any(s.n != n or s.t != t for s in states):
        raise ValueError("ensemble states must share n and t")
    waves = np.stack([wave_function_hat(s) for s in states])
    mean_wave = waves.mean(axis=0)
    wbar = _species_samples(mean_wave, eta_max)
    acc = np.zeros_like(wbar)
    for w in waves:
        acc += _species_samples(w - mean_wave, eta_max)
    wtilde = acc / len(states)
    bar = WignerField(n=n, eta_max=eta_max, t=t, values=wbar, ensemble_count=len(states))
    til = WignerField(n=n, eta_max=eta_max, t=t, values=wtilde, ensemble_count=len(states))
    return bar, til


# ---------------------------------------------------------------------------
# macroscopic-profile Wigner functions


def macro_wigner(r: MacroProfile, eta: int, xi: int) -> complex:
    """W(r; eta, xi) = (1/2) Fr(xi + eta) Fr(xi)^*  on integer wavenumbers."""
    return 0.5 * r.coeff(xi + eta) * np.conj(r.coeff(xi))


def discrete_macro_wigner(r: MacroProfile, n: int, eta_max: int) -> np.ndarray:
    """Lattice counterpart (2n)^{-1} (F_n r)(k + eta/n) (F_n r)(k)^*."""
    if 2 * eta_max >= n:
        raise ValueError("need 2 * eta_max < n")
    fr = np.fft.fft(r.grid_values(n))
    k = np.arange(n)
    out = np.empty((2 * eta_max + 1, n), dtype=complex)
    for m, eta in enumerate(range(-eta_max, eta_max + 1)):
        out[m] = fr[(k + eta) % n] * np.conj(fr[k]) / (2 * n)
    return out


# ---------------------------------------------------------------------------
# Laplace transforms


@dataclass
class LaplaceWignerField:
    """Time-Laplace transforms of a Wigner field series on a saved t-grid.

    values[l] has the same (species, eta, k) layout as WignerField.values;
    tail_bound[l] = sup_t |field| e^{-lambda T} / lambda is the truncation
    part of the error budget.
    """

    n: int
    eta_max: int
    lambdas: np.ndarray
    values: np.ndarray          # (L, 4, 2M+1, n)
    t_grid: np.ndarray
    tail_bound: np.ndarray      # (L,)
    ensemble_count: int

    def at(self, lam: float, name: str, eta: int) -> np.ndarray:
        l = int(np.argmin(np.abs(self.lambdas - lam)))
        return self.values[l, SPECIES.index(name), eta + self.eta_max]


def laplace_series(t_grid: np.ndarray, series: np.ndarray, lam: float):
    """Trapezoid quadrature of int_0^T e^{-lam t} f(t) dt along axis 0,
    plus the tail bound sup|f| e^{-lam T} / lam."""
    t_grid = np.asarray(t_grid, dtype=float)
    if lam <= 0:
        raise ValueError("lambda must be positive")
    w = np.exp(-lam * t_grid)
    shaped = w.reshape((-1,) + (1,) * (series.ndim - 1))
    val = np.trapezoid(series * shaped, t_grid, axis=0)
    tail = float(np.max(np.abs(series))) * np.exp(-lam * t_grid[-1]) / lam
    return val, tail


def laplace_accumulate(fields, lambdas, min_horizon_factor: float = 8.0
                       ) -> LaplaceWignerField:
    """Laplace-transform a time series of WignerFields on their t-grid.

    Requires the grid to start at 0 and reach at least
    min_horizon_factor / min(lambda), so the reported tail bound is small.
    """
    fields = list(fields)
    if len(fields) < 2:
        raise ValueError("need a time series of at least 2 fields")
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    if np.any(lambdas <= 0):
        raise ValueError("lambda values must be positive")
    ts = np.array([f.t for f in fields])
    if ts[0] != 0 or np.any(np.diff(ts) <= 0):
        raise ValueError("fields must form an increasing t-grid starting at 0")
    horizon = ts[-1]
    if horizon < min_horizon_factor / lambdas.min():
        raise ValueError(
            f"horizon {horizon:g} too short for lambda_min={lambdas.min():g}: "
            f"need at least {min_horizon_factor / lambdas.min():g}")
    n, M = fields[0].n, fields[0].eta_max
    series = np.stack([f.values for f in fields])
    out = np.empty((lambdas.size, 4, 2 * M + 1, n), dtype=complex)
    tails = np.empty(lambdas.size)
    for l, lam in enumerate(lambdas):
        out[l], tails[l] = laplace_series(ts, series, lam)
    return LaplaceWignerField(n=n, eta_max=M, lambdas=lambdas, values=out,
                              t_grid=ts, tail_bound=tails,
                              ensemble_count=fields[0].ensemble_count)


def laplace_macro(r0: MacroProfile, lam: float, eta: int, xi: int,
                  gamma: float) -> complex:
    """Laplace transform of W(r_t; eta, xi) along the elongation flow:

        W(r0; eta, xi) / ( (2 pi^2 / gamma) [xi^2 + (eta + xi)^2] + lambda ).
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    return macro_wigner(r0, eta, xi) / (
        2 * np.pi ** 2 / gamma * (xi ** 2 + (eta + xi) ** 2) + lam)


def laplace_grad_sq(r0: MacroProfile, lam: float, eta: int, gamma: float) -> complex:
    """L( F((d_u r_t)^2)(eta) )(lambda) = 8 pi^2 sum_xi (eta+xi) xi w(r; eta, xi)."""
    tot = 0.0 + 0.0j
    M = r0.mode_cap
    for xi in range(-M - abs(eta), M + abs(eta) + 1):
        tot += (eta + xi) * xi * laplace_macro(r0, lam, eta, xi, gamma)
    return 8 * np.pi ** 2 * tot


def mech_thermal_laplace_targets(r0: MacroProfile, ethm0: MacroProfile,
                                 lam: float, eta: int, gamma: float):
    """Limiting mechanical and thermal Laplace-Wigner values at (lambda, eta).

    mech: sum_xi W(r0; eta, xi) / ((2 pi^2/gamma)[xi^2 + (xi+eta)^2] + lambda)
    thm:  (lambda + eta^2 pi^2 / gamma)^{-1} { F(ethm0)(eta)
           + (1/2 gamma) L(F((d_u r)^2)(eta))(lambda) }
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    M = r0.mode_cap
    mech = sum(laplace_macro(r0, lam, eta, xi, gamma)
               for xi in range(-M - abs(eta), M + abs(eta) + 1))
    thm = (ethm0.coeff(eta) + laplace_grad_sq(r0, lam, eta, gamma) / (2 * gamma)) \
        / (lam + eta ** 2 * np.pi ** 2 / gamma)
    return complex(mech), complex(thm)


# ---------------------------------------------------------------------------
# exports


def export_wigner_csv(fld: WignerField, path) -> None:
    with open(path, "w") as fh:
        fh.write("species,eta,k_index,re,im,stderr_re,stderr_im\n")
        for s, name in enumerate(SPECIES):
            for m, eta in enumerate(range(-fld.eta_max, fld.eta_max + 1)):
                for k in range(fld.n):
                    v = fld.values[s, m, k]
                    se_r = fld.stderr_re[s, m, k] if fld.stderr_re is not None else 0.0
                    se_i = fld.stderr_im[s, m, k] if fld.stderr_im is not None else 0.0
                    fh.write(f"{name},{eta},{k},{v.real:.17g},{v.imag:.17g},"
                             f"{se_r:.17g},{se_i:.17g}\n")


def export_laplace_csv(lf: LaplaceWignerField, path) -> None:
    with open(path, "w") as fh:
        fh.write("lambda,species,eta,k_index,re,im,tail_bound\n")
        for l, lam in enumerate(lf.lambdas):
            for s, name in enumerate(SPECIES):
                for m, eta in enumerate(range(-lf.eta_max, lf.eta_max + 1)):
                    for k in range(lf.n):
                        v = lf.values[l, s, m, k]
                        fh.write(f"{lam:.17g},{name},{eta},{k},{v.real:.17g},"
                                 f"{v.imag:.17g},{lf.tail_bound[l]:.17g}\n")
