"""hydrochain: harmonic chain with random velocity flips.

Event-driven exact simulation of the microscopic dynamics, local Gibbs
initial ensembles, Wigner-function energy estimators, the macroscopic
elongation/thermal-energy solver, and numerical certification of the
resolvent matrix identities that connect them.
"""

from .chain import (ChainState, ModeRotation, energy_per_site, total_energy,
                    total_elongation, dft, idft, wave_function,
                    wave_function_hat, evolve_deterministic, flip, simulate,
                    simulate_path, evolve_mean_wave)
from .config import ConfigError, ExperimentConfig
from .initial import (thermo_r, thermo_e, local_gibbs_sample,
                      thermal_spectrum, check_assumptions)
from .pde import MacroState, solve_elongation, solve_thermal, \
    grad_r_squared_fourier, total_energy_profile, entropy_functional
from .profiles import MacroProfile, profile_from_spec
from .wigner import (WignerField, LaplaceWignerField, PairingPoly,
                     wigner_estimate, pair_with_test_function,
                     mean_fluct_decompose, macro_wigner, discrete_macro_wigner,
                     laplace_accumulate, laplace_macro,
                     mech_thermal_laplace_targets)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
