"""Density-matrix simulator of a single trapped-ion conditional gate.

A three-level internal system (ground state and two terahertz-split
metastable levels) is coupled to a truncated axial motional mode.
Resonant carrier and first-order sideband pulses drive the dynamics
under a master equation with per-pair dephasing and optional metastable
decay, reproducing conditional-phase fringes, entangled-state fidelity,
and a per-channel error budget.
"""

from .config import ConfigError, ExperimentConfig, default_config, load_config, save_config
from .couplings import (
    TransitionId,
    TrapLaserParams,
    carrier_element_exact,
    carrier_element_truncated,
    lamb_dicke_from_trap,
    pulse_hamiltonian,
    sideband_element,
)
from .experiments import (
    CalibrationError,
    ErrorBudget,
    FringeFit,
    ScanResult,
    bell_fidelity,
    calibrate_defaults,
    cnot_truth_table,
    cz_fringe,
    error_budget,
    fit_fringe,
    rabi_scan,
    sample_shots,
)
from .hilbert import (
    DensityMatrix,
    HilbertSpace,
    Level,
    PureState,
    basis_state,
    bell_state,
    fidelity,
    make_space,
    populations,
    pure_density,
    thermal_density,
)
from .liouville import (
    DecoherenceModel,
    SolverConfig,
    SolverMethod,
    evolve_pulse,
    evolve_sequence,
    reference_evolve,
)
from .oracles import (
    OracleReport,
    run_all_oracles,
    thermal_sideband_oracle,
    two_level_rabi_oracle,
    unitary_propagator,
)
from .sequence import (
    CNOT_CALIBRATION_PHASE,
    PulseSpec,
    Sequence,
    bell_sequence,
    cnot_core_sequence,
    prep_sequence,
    pulse_duration,
    sequence_duration,
)

__version__ = "0.1.0"
