"""Experiment configuration: one JSON document per run, strictly validated.

Unknown keys are errors so that typos fail loudly instead of silently
running a default.  The profile grammar is documented in profiles.py.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from .profiles import MacroProfile, profile_from_spec

__all__ = ["ExperimentConfig", "ConfigError", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1

KINDS = ("hydro", "equilibrium", "matrix_verify", "wigner_le")

_KEYS = {
    "schema", "kind", "n_list", "gamma", "ensemble_size", "t_end",
    "t_snapshots", "tau0", "beta0", "eta_max", "lambdas", "rho", "n_modes",
    "seed", "output_dir",
}


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configurations."""


@dataclass
class ExperimentConfig:
    kind: str
    n_list: list
    gamma: float = 1.0
    ensemble_size: int = 100
    t_end: float = 0.05
    t_snapshots: list = field(default_factory=list)
    tau0: MacroProfile = field(default_factory=lambda: MacroProfile.constant(1.0))
    beta0: MacroProfile = field(default_factory=lambda: MacroProfile.constant(1.0))
    eta_max: int = 4
    lambdas: list = field(default_factory=list)
    rho: float = 0.25
    n_modes: int = 64
    seed: int = 0
    output_dir: str = "hydrochain_out"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ConfigError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not self.n_list or any(int(n) < 1 for n in self.n_list):
            raise ConfigError("n_list must be a nonempty list of positive ints")
        self.n_list = [int(n) for n in self.n_list]
        if self.gamma <= 0:
            raise ConfigError("gamma must be positive")
        if self.ensemble_size < 1:
            raise ConfigError("ensemble_size must be >= 1")
        if self.t_end < 0:
            raise ConfigError("t_end must be nonnegative")
        if not self.t_snapshots:
            self.t_snapshots = [self.t_end]
        self.t_snapshots = sorted(float(t) for t in self.t_snapshots)
        if self.t_snapshots[0] < 0 or self.t_snapshots[-1] > self.t_end:
            raise ConfigError("t_snapshots must lie inside [0, t_end]")
        if self.eta_max < 0 or 2 * self.eta_max >= min(self.n_list):
            raise ConfigError("need 0 <= 2 * eta_max < min(n_list)")
        if any(l <= 0 for l in self.lambdas):
            raise ConfigError("lambdas must be positive")
        if not 0 < self.rho < 0.5:
            raise ConfigError("rho must lie in (0, 1/2)")
        if self.n_modes < 2 * self.tau0.mode_cap + 2:
            raise ConfigError("n_modes must be at least 2 * (tau0 band) + 2")
        try:
            self.beta0.require_positive("beta0")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if not (0 <= int(self.seed) < 2 ** 64):
            raise ConfigError("seed must fit in 64 bits")
        self.seed = int(self.seed)

    @staticmethod
    def from_dict(doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = set(doc) - _KEYS
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if doc.get("schema") != SCHEMA_VERSION:
            raise ConfigError(f"schema must be {SCHEMA_VERSION}, got {doc.get('schema')!r}")
        if "kind" not in doc or "n_list" not in doc:
            raise ConfigError("configuration requires 'kind' and 'n_list'")
        kwargs = {k: v for k, v in doc.items() if k not in ("schema",)}
        for key in ("tau0", "beta0"):
            if key in kwargs:
                try:
                    kwargs[key] = profile_from_spec(kwargs[key])
                except ValueError as exc:
                    raise ConfigError(f"bad {key} profile: {exc}") from exc
        try:
            return ExperimentConfig(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @staticmethod
    def from_file(path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON in {path}: {exc}") from exc
        return ExperimentConfig.from_dict(doc)

    def resolve_output_dir(self) -> str:
        return os.environ.get("HYDROCHAIN_OUT", self.output_dir)

    def estimated_events(self) -> float:
        """gamma * sum(n^3) * t_end * ensemble_size, the flip-count budget."""
        return float(self.gamma * sum(n ** 3 for n in self.n_list)
                     * self.t_end * self.ensemble_size)
