"""Pulse and sequence descriptions plus builders for the gate experiments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .couplings import (
    TransitionId,
    TrapLaserParams,
    carrier_element_truncated,
    sideband_element,
)

# Second Ramsey-pulse phase for which the three-pulse core composes with
# the conditional 2pi sideband rotation into the entangling gate: the
# ideal-limit output of the state-generation sequence then coincides with
# the real-amplitude target.  Frozen from a 64-point phase search
# (re-verified in the test suite).
CNOT_CALIBRATION_PHASE = float(np.pi)


@dataclass(frozen=True)
class PulseSpec:
    """One rectangular laser pulse.

    `angle` is the rotation area on the reference pair (n=0 carrier pair,
    or the lowest sideband pair); `duration_override`, when set, wins over
    the area-derived duration.
    """

    transition: TransitionId
    sideband: int = 0
    angle: float = 0.0
    phase: float = 0.0
    duration_override: float | None = None

    def __post_init__(self) -> None:
        if self.sideband not in (-1, 0, 1):
            raise ValueError(f"sideband must be -1, 0 or +1, got {self.sideband}")
        if self.sideband != 0 and self.transition is not TransitionId.QUADRUPOLE_G_UP:
            raise ValueError("sideband pulses exist only on the quadrupole transition")
        if self.angle < 0:
            raise ValueError(f"angle must be >= 0, got {self.angle}")
        if self.duration_override is not None and self.duration_override < 0:
            raise ValueError("duration_override must be >= 0")


@dataclass(frozen=True)
class Sequence:
    """Ordered pulses with optional inter-pulse gaps (default: no gaps)."""

    pulses: tuple[PulseSpec, ...]
    gaps: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        pulses = tuple(self.pulses)
        gaps = tuple(self.gaps)
        if not gaps and len(pulses) > 1:
            gaps = (0.0,) * (len(pulses) - 1)
        if pulses and len(gaps) != max(len(pulses) - 1, 0):
            raise ValueError(
                f"{len(pulses)} pulses need {max(len(pulses) - 1, 0)} gaps, got {len(gaps)}"
            )
        if any(g < 0 for g in gaps):
            raise ValueError("gaps must be >= 0")
        object.__setattr__(self, "pulses", pulses)
        object.__setattr__(self, "gaps", gaps)


def pulse_duration(pulse: PulseSpec, params: TrapLaserParams) -> float:
    """Convert pulse area to time via the reference-pair coupling.

    Carrier: Omega * carrier_element(eta, 0); sideband: Omega * eta
    (the |g,0>-|up,1> pair).  An explicit duration_override wins.
    """
    if pulse.duration_override is not None:
        return pulse.duration_override
    if pulse.angle == 0.0:
        return 0.0
    if pulse.sideband == 0:
        eta = params.eta(pulse.transition)
        omega_ref = params.rabi(pulse.transition) * carrier_element_truncated(eta, 0)
    else:
        omega_ref = params.rabi_quad * sideband_element(params.eta_quad, 0, +1)
    if omega_ref <= 0.0:
        raise ValueError("zero reference coupling: cannot convert pulse area to time")
    return pulse.angle / omega_ref


def sequence_duration(seq: Sequence, params: TrapLaserParams) -> float:
    """Total wall time of a sequence including gaps."""
    return sum(pulse_duration(p, params) for p in seq.pulses) + sum(seq.gaps)


def prep_sequence(target_n: int) -> Sequence:
    """Motional-state preparation: carrier pi (n=0) or blue-sideband pi (n=1).

    Both end in |up> from |g, 0>.
    """
    if target_n == 0:
        return Sequence((PulseSpec(TransitionId.QUADRUPOLE_G_UP, 0, np.pi, 0.0),))
    if target_n == 1:
        return Sequence((PulseSpec(TransitionId.QUADRUPOLE_G_UP, +1, np.pi, 0.0),))
    raise ValueError(f"target_n must be 0 or 1, got {target_n}")


def cnot_core_sequence(second_phase: float) -> Sequence:
    """Ramsey pi/2 -- blue-sideband 2pi -- Ramsey pi/2(second_phase).

    The 2pi sideband rotation exists only for motional state 1, which
    flips the sign of |up,1> while |up,0> has no partner state; the
    bracketing pi/2 pulses convert that conditional phase flip into a
    conditional bit flip of the metastable qubit.
    """
    return Sequence(
        (
            PulseSpec(TransitionId.RAMAN_UP_DOWN, 0, 0.5 * np.pi, 0.0),
            PulseSpec(TransitionId.QUADRUPOLE_G_UP, +1, 2.0 * np.pi, 0.0),
            PulseSpec(TransitionId.RAMAN_UP_DOWN, 0, 0.5 * np.pi, second_phase),
        )
    )


def bell_sequence() -> Sequence:
    """Entangled-state generation from |g>: carrier pi/2, sideband pi, then the gate core."""
    prep = (
        PulseSpec(TransitionId.QUADRUPOLE_G_UP, 0, 0.5 * np.pi, 0.0),
        PulseSpec(TransitionId.QUADRUPOLE_G_UP, +1, np.pi, 0.0),
    )
    return Sequence(prep + cnot_core_sequence(CNOT_CALIBRATION_PHASE).pulses)
