"""Curie-Weiss model of a quantum measurement.

A spin-1/2 system is measured by a magnetic dot: N Ising spins with an
infinite-range quartic coupling, weakly coupled to a phonon bath.  The
package computes the static phase structure of the magnet, the collapse and
recurrence dynamics of the off-diagonal density-matrix blocks, the
registration dynamics of the pointer magnetization, and the resulting Born
probabilities, final state, and entropy balance, with independent oracles
for every closed form.
"""

from .errors import CurieWeissError
from .model import (
    ModelParams,
    RegimeReport,
    SystemState2x2,
    load_config,
    validate_regime,
    validate_state,
)
from .statics import (
    Landscape,
    StationaryPoint,
    critical_coupling,
    curie_temperature,
    ferromagnetic_gap,
    free_energy,
    mixing_entropy,
    stationary_magnetizations,
)
from .offdiag import (
    CouplingVector,
    OffDiagTrajectory,
    bath_exponent,
    decay_time_bath,
    dispersion_decay_time,
    envelope_dispersed,
    envelope_uniform,
    integrate_zeta_short_time,
    memory_kernel,
    offdiag_trajectory,
    reduction_time,
    sample_couplings,
    spin_echo,
)
from .registration import (
    MagnetizationTrajectory,
    TerminalKind,
    asymptotic_rate,
    crossing_time,
    integrate_registration,
    registration_rhs,
    registration_time_asymptotic,
    registration_time_quadrature,
)
from .scenario import (
    EntropyBudget,
    FinalState,
    RunConfig,
    ScenarioReport,
    assemble_final_state,
    born_probabilities,
    entropy_budget,
    pointer_correlation,
    run_scenario,
)

__version__ = "0.1.0"

__all__ = [
    "CurieWeissError",
    "ModelParams",
    "RegimeReport",
    "SystemState2x2",
    "load_config",
    "validate_regime",
    "validate_state",
    "Landscape",
    "StationaryPoint",
    "critical_coupling",
    "curie_temperature",
    "ferromagnetic_gap",
    "free_energy",
    "mixing_entropy",
    "stationary_magnetizations",
    "CouplingVector",
    "OffDiagTrajectory",
    "bath_exponent",
    "decay_time_bath",
    "dispersion_decay_time",
    "envelope_dispersed",
    "envelope_uniform",
    "integrate_zeta_short_time",
    "memory_kernel",
    "offdiag_trajectory",
    "reduction_time",
    "sample_couplings",
    "spin_echo",
    "MagnetizationTrajectory",
    "TerminalKind",
    "asymptotic_rate",
    "crossing_time",
    "integrate_registration",
    "registration_rhs",
    "registration_time_asymptotic",
    "registration_time_quadrature",
    "EntropyBudget",
    "FinalState",
    "RunConfig",
    "ScenarioReport",
    "assemble_final_state",
    "born_probabilities",
    "entropy_budget",
    "pointer_correlation",
    "run_scenario",
    "__version__",
]
