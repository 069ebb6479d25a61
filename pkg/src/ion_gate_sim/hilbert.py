"""Joint internal/motional state space of a single trapped ion.

Three internal levels are kept: the ground state ``g``, and the two
metastable levels ``up`` and ``down`` that form the optical qubit.  The
axial motional mode is truncated to Fock states ``0..n_max``.  Flat
indices are level-major, Fock-minor::

    index(level, n) = level_index * (n_max + 1) + n

with level order (g, up, down), so serialized matrices are directly
comparable across tools that adopt the same ordering.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class Level(enum.Enum):
    """Internal electronic level labels."""

    G = "g"
    UP = "up"
    DOWN = "down"


LEVELS: tuple[Level, ...] = (Level.G, Level.UP, Level.DOWN)
_LEVEL_INDEX = {lv: k for k, lv in enumerate(LEVELS)}

# Tolerances for density-matrix invariants.  Positivity is checked with a
# small negative slack: finite-step integration introduces bounded
# negativity that is not a model error.
HERMITICITY_ATOL = 1e-12
TRACE_ATOL = 1e-9
POSITIVITY_ATOL = 1e-9


@dataclass(frozen=True)
class HilbertSpace:
    """Product space of the three internal levels and Fock states 0..n_max."""

    n_max: int

    def __post_init__(self) -> None:
        if not isinstance(self.n_max, (int, np.integer)) or self.n_max < 1:
            raise ValueError(f"n_max must be an integer >= 1, got {self.n_max!r}")

    @property
    def n_fock(self) -> int:
        return self.n_max + 1

    @property
    def dim(self) -> int:
        return 3 * (self.n_max + 1)

    def index(self, level: Level, n: int) -> int:
        if not 0 <= n <= self.n_max:
            raise ValueError(f"Fock number {n} outside 0..{self.n_max}")
        return _LEVEL_INDEX[level] * self.n_fock + n

    def level_of(self, i: int) -> Level:
        return LEVELS[i // self.n_fock]

    def fock_of(self, i: int) -> int:
        return i % self.n_fock

    def level_indices(self, level: Level) -> np.ndarray:
        """Flat indices of all Fock states within one internal level."""
        base = _LEVEL_INDEX[level] * self.n_fock
        return np.arange(base, base + self.n_fock)


def make_space(n_max: int = 4) -> HilbertSpace:
    """Build the joint space; dim = 3*(n_max+1)."""
    return HilbertSpace(n_max)


@dataclass(frozen=True, eq=False)
class PureState:
    """Unit-norm state vector over a :class:`HilbertSpace`."""

    space: HilbertSpace
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (self.space.dim,):
            raise ValueError(
                f"amplitude vector has length {amp.size}, expected {self.space.dim}"
            )
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"state norm {norm!r} is not 1 within 1e-12")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)


def basis_state(space: HilbertSpace, level: Level, n: int) -> PureState:
    """|level, n> as a PureState."""
    amp = np.zeros(space.dim, dtype=complex)
    amp[space.index(level, n)] = 1.0
    return PureState(space, amp)


def bell_state(space: HilbertSpace) -> PureState:
    """Motional/internal entangled target (|0,up> + |1,down>)/sqrt(2)."""
    amp = np.zeros(space.dim, dtype=complex)
    amp[space.index(Level.UP, 0)] = 1.0 / np.sqrt(2.0)
    amp[space.index(Level.DOWN, 1)] = 1.0 / np.sqrt(2.0)
    return PureState(space, amp)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace operator over a :class:`HilbertSpace`.

    Construction only checks shape; :meth:`validate` asserts the
    Hermiticity/trace/positivity invariants at their tolerances so that
    deliberately degraded states (e.g. coarse-integration cross-checks)
    can still be represented and inspected.
    """

    space: HilbertSpace
    entries: np.ndarray

    def __post_init__(self) -> None:
        ent = np.array(self.entries, dtype=complex)
        if ent.shape != (self.space.dim, self.space.dim):
            raise ValueError(
                f"entries shape {ent.shape}, expected "
                f"({self.space.dim}, {self.space.dim})"
            )
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    def validate(self) -> None:
        """Raise ValueError unless Hermitian, unit trace, and PSD within tolerance."""
        herm = np.max(np.abs(self.entries - self.entries.conj().T))
        if herm > HERMITICITY_ATOL:
            raise ValueError(f"not Hermitian: max asymmetry {herm:.3e}")
        tr = self.entries.trace()
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace {tr!r} differs from 1 beyond 1e-9")
        min_eig = float(np.linalg.eigvalsh(self.entries).min())
        if min_eig < -POSITIVITY_ATOL:
            raise ValueError(f"minimum eigenvalue {min_eig:.3e} below -1e-9")


def pure_density(psi: PureState) -> DensityMatrix:
    """|psi><psi| as a DensityMatrix."""
    return DensityMatrix(psi.space, np.outer(psi.amplitudes, psi.amplitudes.conj()))


def thermal_weights(nbar: float, n_max: int) -> np.ndarray:
    """Thermal Fock weights nbar^n/(1+nbar)^(n+1), renormalized over 0..n_max."""
    if nbar < 0:
        raise ValueError(f"nbar must be >= 0, got {nbar}")
    n = np.arange(n_max + 1, dtype=float)
    r = nbar / (1.0 + nbar)
    w = (1.0 / (1.0 + nbar)) * r**n
    return w / w.sum()


def thermal_density(space: HilbertSpace, nbar: float, level: Level) -> DensityMatrix:
    """Diagonal state: internal part pure in `level`, motional part thermal.

    The truncated tail is renormalized so the trace is exactly 1.
    """
    weights = thermal_weights(nbar, space.n_max)
    ent = np.zeros((space.dim, space.dim), dtype=complex)
    for n, w in enumerate(weights):
        i = space.index(level, n)
        ent[i, i] = w
    return DensityMatrix(space, ent)


def populations(rho: DensityMatrix) -> dict[Level, float]:
    """Internal-level populations, summed over Fock states."""
    diag = np.real(np.diag(rho.entries))
    return {
        lv: float(diag[rho.space.level_indices(lv)].sum()) for lv in LEVELS
    }


def fidelity(rho: DensityMatrix, psi: PureState) -> float:
    """<psi| rho |psi>, real up to a 1e-12 imaginary residue."""
    if rho.space != psi.space:
        raise ValueError("density matrix and state live on different spaces")
    v = psi.amplitudes
    f = complex(v.conj() @ rho.entries @ v)
    if abs(f.imag) > 1e-12:
        raise ValueError(f"fidelity has imaginary residue {f.imag:.3e}")
    return float(f.real)
