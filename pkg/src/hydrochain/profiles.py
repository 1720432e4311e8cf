"""Macroscopic profiles on the unit torus, represented by finite Fourier series.

A profile is the real-valued trigonometric polynomial

    f(u) = sum_{|eta| <= M} c_eta exp(2 pi i eta u),   c_{-eta} = conj(c_eta),

which is the natural class here: every field the solvers and estimators touch
is paired against trigonometric polynomials, and band-limited data keeps the
spectral machinery exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MacroProfile", "profile_from_spec"]

_POSITIVITY_GRID = 4096


@dataclass(frozen=True)
class MacroProfile:
    """Real trigonometric polynomial on [0, 1), stored as coefficients c_eta.

    ``coeffs[m]`` is the coefficient of exp(2 pi i eta u) with eta = m - M,
    so the array has length 2M + 1 and is Hermitian: c_{-eta} = conj(c_eta).
    """

    coeffs: np.ndarray  # complex, length 2*mode_cap + 1

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 != 1:
            raise ValueError("coefficient array must be 1-d with odd length")
        rev = c[::-1].conj()
        if not np.allclose(c, rev, rtol=0, atol=1e-12 * max(1.0, np.abs(c).max())):
            raise ValueError("coefficients must satisfy c(-eta) = conj(c(eta))")
        object.__setattr__(self, "coeffs", c)

    @property
    def mode_cap(self) -> int:
        return (self.coeffs.size - 1) // 2

    def coeff(self, eta: int) -> complex:
        """Fourier coefficient c_eta (zero beyond the stored band)."""
        m = eta + self.mode_cap
        if m < 0 or m >= self.coeffs.size:
            return 0.0 + 0.0j
        return complex(self.coeffs[m])

    def eval(self, u) -> np.ndarray:
        """Evaluate the profile at points u of the unit torus."""
        u = np.asarray(u, dtype=float)
        etas = np.arange(-self.mode_cap, self.mode_cap + 1)
        vals = np.tensordot(np.exp(2j * np.pi * np.multiply.outer(u, etas)),
                            self.coeffs, axes=([-1], [0]))
        return vals.real

    def grid_values(self, n: int) -> np.ndarray:
        """Values on the embedded lattice {x/n}, exact for band-limited data."""
        return self.eval(np.arange(n) / n)

    def min_on_grid(self, m: int = _POSITIVITY_GRID) -> float:
        return float(self.eval(np.arange(m) / m).min())

    def require_positive(self, what: str = "profile") -> None:
        lo = self.min_on_grid()
        if lo <= 0.0:
            raise ValueError(f"{what} must be strictly positive (min on grid = {lo:g})")

    # ---- algebra used by the thermodynamic conversions -------------------

    def __add__(self, other: "MacroProfile | float") -> "MacroProfile":
        if isinstance(other, MacroProfile):
            M = max(self.mode_cap, other.mode_cap)
            c = _pad(self.coeffs, M) + _pad(other.coeffs, M)
            return MacroProfile(c)
        c = self.coeffs.copy()
        c[self.mode_cap] += other
        return MacroProfile(c)

    def __mul__(self, other: "MacroProfile | float") -> "MacroProfile":
        if isinstance(other, MacroProfile):
            # product of band-limited functions: full linear convolution
            c = np.convolve(self.coeffs, other.coeffs)
            return MacroProfile(c)
        return MacroProfile(self.coeffs * other)

    __rmul__ = __mul__

    def square(self) -> "MacroProfile":
        return self * self

    def mean(self) -> float:
        """Torus average (= c_0)."""
        return float(self.coeffs[self.mode_cap].real)

    # ---- constructors -----------------------------------------------------

    @staticmethod
    def constant(value: float) -> "MacroProfile":
        return MacroProfile(np.array([value], dtype=complex))

    @staticmethod
    def cosine(mean: float, amplitude: float, mode: int = 1) -> "MacroProfile":
        """mean + amplitude * cos(2 pi * mode * u)."""
        if mode < 1:
            raise ValueError("mode must be >= 1")
        c = np.zeros(2 * mode + 1, dtype=complex)
        c[mode] = mean
        c[0] = c[2 * mode] = amplitude / 2.0
        return MacroProfile(c)

    @staticmethod
    def fourier(coeffs: dict[int, complex]) -> "MacroProfile":
        """Build from a {eta: c_eta} mapping; missing conjugates are filled in."""
        if not coeffs:
            return MacroProfile.constant(0.0)
        M = max(abs(int(e)) for e in coeffs)
        c = np.zeros(2 * M + 1, dtype=complex)
        for e, v in coeffs.items():
            e = int(e)
            c[e + M] += v
            if e != 0 and (-e) not in coeffs and not any(int(k) == -e for k in coeffs):
                c[-e + M] += np.conj(v)
        return MacroProfile(c)

    @staticmethod
    def smoothed_step(low: float, high: float, width: float = 0.08,
                      mode_cap: int = 12) -> "MacroProfile":
        """Band-limited smoothed square step: low on one half period, high on
        the other, tanh transitions of the given width, truncated to mode_cap
        modes (so it really is a trig polynomial)."""
        m = 8192
        u = np.arange(m) / m
        s = 0.5 * (np.tanh(np.sin(2 * np.pi * u) / (np.pi * width)) + 1.0)
        vals = low + (high - low) * s
        ft = np.fft.fft(vals) / m
        c = np.zeros(2 * mode_cap + 1, dtype=complex)
        c[mode_cap] = ft[0]
        for e in range(1, mode_cap + 1):
            c[mode_cap + e] = ft[e]
            c[mode_cap - e] = ft[-e]
        return MacroProfile(c)


def _pad(c: np.ndarray, M: int) -> np.ndarray:
    cur = (c.size - 1) // 2
    if cur == M:
        return c.astype(complex)
    out = np.zeros(2 * M + 1, dtype=complex)
    out[M - cur:M + cur + 1] = c
    return out


def profile_from_spec(spec) -> MacroProfile:
    """Parse the profile grammar used in experiment configuration files.

    Accepted forms:
        1.25                                           (bare constant)
        {"type": "constant", "value": 1.0}
        {"type": "cosine", "mean": 1.0, "amplitude": 0.5, "mode": 1}
        {"type": "smoothed_step", "low": 0.5, "high": 1.5, "width": 0.08}
        {"type": "fourier", "coeffs": [[eta, re, im], ...]}
    """
    if isinstance(spec, (int, float)):
        return MacroProfile.constant(float(spec))
    if not isinstance(spec, dict):
        raise ValueError(f"cannot parse profile spec {spec!r}")
    kind = spec.get("type")
    known = {
        "constant": {"type", "value"},
        "cosine": {"type", "mean", "amplitude", "mode"},
        "smoothed_step": {"type", "low", "high", "width", "mode_cap"},
        "fourier": {"type", "coeffs"},
    }
    if kind not in known:
        raise ValueError(f"unknown profile type {kind!r}")
    extra = set(spec) - known[kind]
    if extra:
        raise ValueError(f"unknown keys {sorted(extra)} in {kind!r} profile spec")
    if kind == "constant":
        return MacroProfile.constant(float(spec["value"]))
    if kind == "cosine":
        return MacroProfile.cosine(float(spec["mean"]), float(spec["amplitude"]),
                                   int(spec.get("mode", 1)))
    if kind == "smoothed_step":
        return MacroProfile.smoothed_step(float(spec["low"]), float(spec["high"]),
                                          float(spec.get("width", 0.08)),
                                          int(spec.get("mode_cap", 12)))
    coeffs = {}
    for item in spec["coeffs"]:
        eta, re, im = item
        coeffs[int(eta)] = complex(float(re), float(im))
    return MacroProfile.fourier(coeffs)
