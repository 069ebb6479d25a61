"""Lamb-Dicke matrix elements and interaction-picture pulse Hamiltonians.

Two laser drives exist: the quadrupole transition |g>-|up> (carrier and
first-order sidebands on the axial mode) and the stimulated-Raman
carrier |up>-|down>.  All pulses are resonant and rectangular; a pulse
of area theta and phase phi on a closed two-level pair implements
exp(-i(theta/2)(cos(phi) sigma_x + sin(phi) sigma_y)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy import constants

from .hilbert import HilbertSpace, Level

if TYPE_CHECKING:  # pragma: no cover
    from .sequence import PulseSpec


class TransitionId(enum.Enum):
    """The two driven transitions."""

    QUADRUPOLE_G_UP = "quadrupole_g_up"
    RAMAN_UP_DOWN = "raman_up_down"


# (lower, upper) legs per transition; e^{i phase} multiplies |upper><lower|.
TRANSITION_LEVELS: dict[TransitionId, tuple[Level, Level]] = {
    TransitionId.QUADRUPOLE_G_UP: (Level.G, Level.UP),
    TransitionId.RAMAN_UP_DOWN: (Level.UP, Level.DOWN),
}

# The Raman drive axis is referenced a quarter turn from the quadrupole
# axis.  The two drives' absolute phase origins are independent; this
# choice makes the calibrated gate map the motional superposition onto
# the real-amplitude entangled target (fringe contrasts and reversals
# are unaffected).
RAMAN_FRAME_OFFSET = 0.5 * np.pi

QUAD_WAVELENGTH_M = 729e-9
ION_MASS_KG = 40.0 * constants.atomic_mass


@dataclass(frozen=True)
class TrapLaserParams:
    """Trap frequency, Lamb-Dicke factors, and carrier Rabi frequencies (rad/s)."""

    omega_z: float
    eta_quad: float
    eta_raman: float
    rabi_quad: float
    rabi_raman: float

    def __post_init__(self) -> None:
        for name in ("omega_z", "eta_quad", "eta_raman", "rabi_quad", "rabi_raman"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.eta_quad >= 1.0:
            raise ValueError(f"eta_quad must be < 1, got {self.eta_quad}")

    def eta(self, transition: TransitionId) -> float:
        if transition is TransitionId.QUADRUPOLE_G_UP:
            return self.eta_quad
        return self.eta_raman

    def rabi(self, transition: TransitionId) -> float:
        if transition is TransitionId.QUADRUPOLE_G_UP:
            return self.rabi_quad
        return self.rabi_raman


def lamb_dicke_from_trap(
    wavelength: float, ion_mass: float, omega_z: float, projection: float = 1.0
) -> float:
    """eta = k * projection * sqrt(hbar / (2 m omega_z)).

    `projection` is the cosine of the beam-to-axis angle, in [0, 1].
    """
    if wavelength <= 0 or ion_mass <= 0 or omega_z <= 0:
        raise ValueError("wavelength, ion_mass and omega_z must all be positive")
    if projection < 0:
        raise ValueError("projection must be >= 0")
    k = 2.0 * np.pi / wavelength
    return k * projection * math.sqrt(constants.hbar / (2.0 * ion_mass * omega_z))


def default_eta_quad(omega_z: float) -> float:
    """Quadrupole-beam Lamb-Dicke factor for full axial projection (~0.114)."""
    return lamb_dicke_from_trap(QUAD_WAVELENGTH_M, ION_MASS_KG, omega_z, 1.0)


def _laguerre(n: int, x: float) -> float:
    # Three-term recurrence; exact for the small n used here.
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def carrier_element_exact(eta: float, n: int) -> float:
    """Exact carrier coupling reduction e^(-eta^2/2) L_n(eta^2)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    x = eta * eta
    return math.exp(-0.5 * x) * _laguerre(n, x)


def carrier_element_truncated(eta: float, n: int) -> float:
    """Carrier coupling to second order in eta: 1 - eta^2 (n + 1/2)."""
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    return 1.0 - eta * eta * (n + 0.5)


def sideband_element(eta: float, n: int, order: int) -> float:
    """First-order sideband coupling from |g, n>.

    Blue (+1) couples |g,n> to |up,n+1> with eta*sqrt(n+1); red (-1)
    couples |g,n> to |up,n-1> with eta*sqrt(n).
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    if order == 1:
        return eta * math.sqrt(n + 1)
    if order == -1:
        return eta * math.sqrt(n)
    raise ValueError(f"sideband order must be +1 or -1, got {order}")


def pulse_hamiltonian(
    space: HilbertSpace, pulse: "PulseSpec", params: TrapLaserParams
) -> np.ndarray:
    """Hermitian dim x dim Hamiltonian of one resonant rectangular pulse.

    Carrier pulses conserve the Fock number; sideband pulses change it by
    exactly +-1 and exist only on the quadrupole transition.  Couplings
    that would leave the truncated space are dropped.
    """
    h = np.zeros((space.dim, space.dim), dtype=complex)
    phase = pulse.phase
    if pulse.transition is TransitionId.RAMAN_UP_DOWN:
        phase += RAMAN_FRAME_OFFSET
    factor = np.exp(1j * phase)

    if pulse.sideband == 0:
        lower, upper = TRANSITION_LEVELS[pulse.transition]
        eta = params.eta(pulse.transition)
        omega = params.rabi(pulse.transition)
        for n in range(space.n_fock):
            amp = 0.5 * omega * carrier_element_truncated(eta, n)
            i, j = space.index(upper, n), space.index(lower, n)
            h[i, j] = amp * factor
            h[j, i] = np.conj(h[i, j])
    else:
        if pulse.transition is not TransitionId.QUADRUPOLE_G_UP:
            raise ValueError("sideband pulses are only supported on the quadrupole transition")
        for n in range(space.n_fock):
            m = n + pulse.sideband
            if not 0 <= m <= space.n_max:
                continue
            amp = 0.5 * params.rabi_quad * sideband_element(params.eta_quad, n, pulse.sideband)
            i, j = space.index(Level.UP, m), space.index(Level.G, n)
            h[i, j] = amp * factor
            h[j, i] = np.conj(h[i, j])
    return h
