"""Independent closed-form and brute-force references for the simulator.

These deliberately avoid the fixed-step integrator: closed two-level
formulas, direct series evaluation, spectral decompositions, and the
superoperator exponential are separate routes to the same physics, used
by the test suite and the `oracle-check` command.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ExperimentConfig
from .couplings import (
    TransitionId,
    carrier_element_exact,
    carrier_element_truncated,
    pulse_hamiltonian,
)
from .hilbert import DensityMatrix, Level, PureState, basis_state, make_space, pure_density
from .liouville import DecoherenceModel, SolverConfig, evolve_pulse, reference_evolve, unitary
from .sequence import PulseSpec

CLOSED_FORM_TOL = 1e-6
INTEGRATOR_TOL = 1e-6
COHERENCE_DECAY_TOL = 1e-8


@dataclass(frozen=True)
class OracleReport:
    name: str
    max_abs_error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.max_abs_error <= self.tolerance

    def __str__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"{self.name}: max_abs_error={self.max_abs_error:.3e} tol={self.tolerance:.1e} {status}"


def two_level_rabi_oracle(omega: float, t_grid) -> np.ndarray:
    """Resonant two-level excitation probability sin^2(omega t / 2)."""
    if omega < 0:
        raise ValueError(f"omega must be >= 0, got {omega}")
    t = np.asarray(t_grid, dtype=float)
    return np.sin(0.5 * omega * t) ** 2


def thermal_sideband_oracle(
    eta: float, omega: float, nbar: float, n_max: int, t_grid
) -> np.ndarray:
    """Thermal-weighted sum of closed sideband pairs.

    P_up(t) = sum_n P(n) sin^2(eta sqrt(n+1) omega t / 2) with truncated,
    renormalized thermal weights.
    """
    t = np.asarray(t_grid, dtype=float)
    n = np.arange(n_max + 1, dtype=float)
    r = nbar / (1.0 + nbar)
    weights = (1.0 / (1.0 + nbar)) * r**n
    weights = weights / weights.sum()
    pair_rabi = eta * np.sqrt(n + 1.0) * omega
    return np.einsum("n,nt->t", weights, np.sin(0.5 * np.outer(pair_rabi, t)) ** 2)


def unitary_propagator(h: np.ndarray, duration: float) -> np.ndarray:
    """exp(-i H t) through the spectral decomposition of H."""
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * duration)) @ vecs.conj().T


def _single_pulse_p_up(
    rho0: DensityMatrix,
    h: np.ndarray,
    dec: DecoherenceModel,
    t_grid: np.ndarray,
    solver: SolverConfig,
) -> np.ndarray:
    space = rho0.space
    up = space.level_indices(Level.UP)
    out = np.empty(t_grid.size)
    for k, t in enumerate(t_grid):
        rho = evolve_pulse(rho0, h, dec, float(t), solver)
        out[k] = float(np.real(np.diag(rho.entries)[up].sum()))
    return out


def _check_two_level_carrier(cfg: ExperimentConfig) -> OracleReport:
    params = cfg.laser_params()
    space = make_space(cfg.motional.n_max)
    # eta = 0 makes the carrier an exact two-level drive on every pair.
    flat = type(params)(params.omega_z, 0.0, 0.0, params.rabi_quad, params.rabi_raman)
    pulse = PulseSpec(TransitionId.QUADRUPOLE_G_UP, 0, 0.0, 0.0, duration_override=1.0)
    h = pulse_hamiltonian(space, pulse, flat)
    t_grid = np.linspace(0.0, 4.0 * np.pi / params.rabi_quad, 25)
    rho0 = pure_density(basis_state(space, Level.G, 0))
    sim = _single_pulse_p_up(rho0, h, unitary(), t_grid, cfg.solver_config())
    ref = two_level_rabi_oracle(params.rabi_quad, t_grid)
    return OracleReport("two_level_carrier_rabi", float(np.max(np.abs(sim - ref))), CLOSED_FORM_TOL)


def _check_thermal_sideband(cfg: ExperimentConfig) -> OracleReport:
    params = cfg.laser_params()
    space = make_space(cfg.motional.n_max)
    pulse = PulseSpec(TransitionId.QUADRUPOLE_G_UP, +1, 0.0, 0.0, duration_override=1.0)
    h = pulse_hamiltonian(space, pulse, params)
    pair_rabi = params.eta_quad * params.rabi_quad
    t_grid = np.linspace(0.0, 6.0 * np.pi / pair_rabi, 50)
    from .hilbert import thermal_density

    rho0 = thermal_density(space, cfg.motional.nbar, Level.G)
    sim = _single_pulse_p_up(rho0, h, unitary(), t_grid, cfg.solver_config())
    ref = thermal_sideband_oracle(
        params.eta_quad, params.rabi_quad, cfg.motional.nbar, cfg.motional.n_max, t_grid
    )
    return OracleReport("thermal_sideband_rabi", float(np.max(np.abs(sim - ref))), CLOSED_FORM_TOL)


def _check_carrier_expansion() -> OracleReport:
    # |truncated - exact| <= eta^4 (n+1)^2 over eta <= 0.2, n <= 4.
    worst = 0.0
    for eta in np.linspace(0.0, 0.2, 21):
        for n in range(5):
            diff = abs(carrier_element_truncated(eta, n) - carrier_element_exact(eta, n))
            excess = diff - eta**4 * (n + 1) ** 2
            worst = max(worst, excess)
    return OracleReport("carrier_expansion_bound", worst, 0.0)


def _check_rk4_vs_superoperator(cfg: ExperimentConfig, instances: int = 20) -> OracleReport:
    rng = np.random.default_rng(20260809)
    space = make_space(2)
    solver = cfg.solver_config()
    worst = 0.0
    for _ in range(instances):
        raw = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
        h = 0.5e5 * (raw + raw.conj().T)
        dec = DecoherenceModel(*(rng.uniform(0.0, 5e3, size=3)), rng.uniform(0.0, 5.0), 0.0)
        amps = rng.normal(size=space.dim) + 1j * rng.normal(size=space.dim)
        amps /= np.linalg.norm(amps)
        rho0 = pure_density(PureState(space, amps))
        duration = rng.uniform(2e-5, 2e-4)
        fast = evolve_pulse(rho0, h, dec, duration, solver)
        slow = reference_evolve(rho0, h, dec, duration)
        worst = max(worst, float(np.max(np.abs(fast.entries - slow.entries))))
    return OracleReport("rk4_vs_superoperator", worst, INTEGRATOR_TOL)


def _check_coherence_decay(cfg: ExperimentConfig) -> OracleReport:
    space = make_space(cfg.motional.n_max)
    gamma = cfg.decoherence_model().gamma_g_up
    dec = DecoherenceModel(gamma, 0.0, 0.0, 0.0, 0.0)
    ent = np.zeros((space.dim, space.dim), dtype=complex)
    i, j = space.index(Level.G, 0), space.index(Level.UP, 0)
    ent[i, i] = ent[j, j] = 0.5
    ent[i, j] = ent[j, i] = 0.5
    rho0 = DensityMatrix(space, ent)
    t = 1e-3
    rho = evolve_pulse(rho0, np.zeros_like(ent), dec, t, cfg.solver_config())
    expected = 0.5 * np.exp(-0.5 * gamma * t)
    err = abs(rho.entries[i, j] - expected)
    return OracleReport("coherence_decay_closed_form", float(err), COHERENCE_DECAY_TOL)


def run_all_oracles(cfg: ExperimentConfig) -> list[OracleReport]:
    """Execute every oracle comparison; failures are reported, not raised."""
    return [
        _check_two_level_carrier(cfg),
        _check_thermal_sideband(cfg),
        _check_carrier_expansion(),
        _check_rk4_vs_superoperator(cfg),
        _check_coherence_decay(cfg),
    ]
