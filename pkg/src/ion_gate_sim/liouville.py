"""Density-matrix time evolution under pulses, dephasing, and decay.

The generator is

    d rho / dt = -i [H, rho] + D(rho)        (hbar = 1)

where D damps every off-diagonal element whose internal labels differ at
half the pair's dephasing rate (off-diagonals scale as exp(-gamma t / 2)
under free evolution), and optionally moves population from the
metastable levels to |g> at the D-state decay rate, preserving the Fock
index, with coherences damped at half that rate.

The primary integrator is deterministic fixed-step RK4.  An independent
reference path builds the full dim^2 x dim^2 superoperator and applies
its matrix exponential; the two share no stepping code.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .hilbert import DensityMatrix, HilbertSpace, Level

# Fixed-step default: min(duration/200, 100 ns).
DEFAULT_DT_CAP = 1e-7
MIN_STEPS_PER_PULSE = 200

_TWO_PI = 2.0 * np.pi


class SolverMethod(enum.Enum):
    FIXED_STEP_RK4 = "rk4"
    REFERENCE_SUPEROPERATOR_EXPONENTIAL = "superoperator"


@dataclass(frozen=True)
class SolverConfig:
    """Integration settings; dt_max=None selects the default step rule."""

    dt_max: float | None = None
    method: SolverMethod = SolverMethod.FIXED_STEP_RK4

    def __post_init__(self) -> None:
        if self.dt_max is not None and self.dt_max <= 0:
            raise ValueError(f"dt_max must be > 0, got {self.dt_max}")


@dataclass(frozen=True)
class DecoherenceModel:
    """Per-coherence dephasing rates (rad/s), D-state decay, heating field.

    heating_rate is retained for configuration completeness but is not
    simulated (gate sequences are far shorter than one heating quantum).
    """

    gamma_g_up: float = _TWO_PI * 400.0
    gamma_up_down: float = _TWO_PI * 300.0
    gamma_g_down: float = _TWO_PI * 500.0
    d_state_decay_rate: float = 1.0 / 1.1
    heating_rate: float = 0.0

    def __post_init__(self) -> None:
        for name in (
            "gamma_g_up",
            "gamma_up_down",
            "gamma_g_down",
            "d_state_decay_rate",
            "heating_rate",
        ):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")

    def pair_rate(self, a: Level, b: Level) -> float:
        pair = frozenset((a, b))
        if pair == frozenset((Level.G, Level.UP)):
            return self.gamma_g_up
        if pair == frozenset((Level.UP, Level.DOWN)):
            return self.gamma_up_down
        if pair == frozenset((Level.G, Level.DOWN)):
            return self.gamma_g_down
        return 0.0


def unitary() -> DecoherenceModel:
    """All rates zero: purely coherent evolution."""
    return DecoherenceModel(0.0, 0.0, 0.0, 0.0, 0.0)


def _damping_matrix(space: HilbertSpace, dec: DecoherenceModel) -> np.ndarray:
    """Entrywise damping rates: gamma_pair/2 plus decay-induced damping."""
    levels = np.array([space.level_of(i) for i in range(space.dim)])
    lam = np.zeros((space.dim, space.dim))
    for i in range(space.dim):
        for j in range(space.dim):
            if levels[i] is not levels[j]:
                lam[i, j] += 0.5 * dec.pair_rate(levels[i], levels[j])
    decay = np.array(
        [dec.d_state_decay_rate if lv is not Level.G else 0.0 for lv in levels]
    )
    lam += 0.5 * (decay[:, None] + decay[None, :])
    return lam


def _generator(
    space: HilbertSpace, h: np.ndarray, dec: DecoherenceModel
) -> Callable[[np.ndarray], np.ndarray]:
    a = -1j * h
    lam = _damping_matrix(space, dec)
    gamma_d = dec.d_state_decay_rate
    g_idx = space.level_indices(Level.G)
    up_idx = space.level_indices(Level.UP)
    down_idx = space.level_indices(Level.DOWN)

    def liouvillian(rho: np.ndarray) -> np.ndarray:
        # Stages stay Hermitian, so -i[H, rho] = B + B^dagger with B = -iH rho.
        b = a @ rho
        out = b + b.conj().T
        out -= lam * rho
        if gamma_d:
            out[g_idx, g_idx] += gamma_d * (rho[up_idx, up_idx] + rho[down_idx, down_idx])
        return out

    return liouvillian


def _check_hermitian(h: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(h))) if h.size else 1.0)
    if np.max(np.abs(h - h.conj().T)) > 1e-9 * scale:
        raise ValueError("pulse Hamiltonian is not Hermitian")


def _step_count(duration: float, cfg: SolverConfig) -> int:
    if cfg.dt_max is not None:
        return max(1, math.ceil(duration / cfg.dt_max))
    dt = min(duration / MIN_STEPS_PER_PULSE, DEFAULT_DT_CAP)
    return max(1, math.ceil(duration / dt))


def _rk4(rho: np.ndarray, liouvillian: Callable, duration: float, steps: int) -> np.ndarray:
    dt = duration / steps
    for _ in range(steps):
        k1 = liouvillian(rho)
        k2 = liouvillian(rho + 0.5 * dt * k1)
        k3 = liouvillian(rho + 0.5 * dt * k2)
        k4 = liouvillian(rho + dt * k3)
        rho = rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def evolve_pulse(
    rho: DensityMatrix,
    h: np.ndarray,
    dec: DecoherenceModel,
    duration: float,
    cfg: SolverConfig = SolverConfig(),
) -> DensityMatrix:
    """Propagate rho under a constant Hamiltonian plus decoherence."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    _check_hermitian(h)
    if duration == 0.0:
        return rho
    if cfg.method is SolverMethod.REFERENCE_SUPEROPERATOR_EXPONENTIAL:
        return reference_evolve(rho, h, dec, duration)
    liouvillian = _generator(rho.space, h, dec)
    out = _rk4(np.array(rho.entries), liouvillian, duration, _step_count(duration, cfg))
    return DensityMatrix(rho.space, out)


def evolve_sequence(
    rho0: DensityMatrix,
    seq,
    dec: DecoherenceModel,
    params,
    cfg: SolverConfig = SolverConfig(),
) -> DensityMatrix:
    """Fold evolve_pulse over a pulse sequence, including gap segments."""
    from .couplings import pulse_hamiltonian
    from .sequence import pulse_duration

    rho = rho0
    zero_h = np.zeros((rho0.space.dim, rho0.space.dim), dtype=complex)
    for k, pulse in enumerate(seq.pulses):
        h = pulse_hamiltonian(rho0.space, pulse, params)
        rho = evolve_pulse(rho, h, dec, pulse_duration(pulse, params), cfg)
        if k < len(seq.gaps) and seq.gaps[k] > 0.0:
            rho = evolve_pulse(rho, zero_h, dec, seq.gaps[k], cfg)
    return rho


def _superoperator(space: HilbertSpace, h: np.ndarray, dec: DecoherenceModel) -> np.ndarray:
    """Full generator as a dim^2 x dim^2 matrix acting on row-major vec(rho)."""
    dim = space.dim
    eye = np.eye(dim)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    sup -= np.diag(_damping_matrix(space, dec).reshape(-1))
    gamma_d = dec.d_state_decay_rate
    if gamma_d:
        for n in range(space.n_fock):
            g = space.index(Level.G, n)
            for lv in (Level.UP, Level.DOWN):
                e = space.index(lv, n)
                sup[g * dim + g, e * dim + e] += gamma_d
    return sup


def reference_evolve(
    rho: DensityMatrix, h: np.ndarray, dec: DecoherenceModel, duration: float
) -> DensityMatrix:
    """Superoperator-exponential reference for cross-validating the integrator."""
    if duration < 0:
        raise ValueError(f"duration must be >= 0, got {duration}")
    _check_hermitian(h)
    if duration == 0.0:
        return rho
    sup = _superoperator(rho.space, h, dec)
    vec = expm(sup * duration) @ rho.entries.reshape(-1)
    return DensityMatrix(rho.space, vec.reshape(rho.space.dim, rho.space.dim))
