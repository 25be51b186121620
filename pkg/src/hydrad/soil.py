"""Deterministic pot-of-soil model.

Moisture decays exponentially (evaporation/drainage) and rises when pumped
water is absorbed. ``step`` is pure; whoever owns the clock owns the state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import DomainError


@dataclass(frozen=True)
class PotState:
    """Volumetric water fraction of one pot at a point in time."""

    theta: float
    capacity_liters: float
    last_update: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= 1.0:
            raise DomainError(f"theta must be in [0, 1], got {self.theta}")
        if self.capacity_liters <= 0:
            raise DomainError("capacity_liters must be > 0")


@dataclass(frozen=True)
class SoilDynamics:
    """Evaporation/drainage rate and how much pumped water the soil keeps."""

    decay_rate: float = 2e-6   # fraction of current content per second
    absorb_efficiency: float = 1.0

    def __post_init__(self):
        if self.decay_rate < 0:
            raise DomainError("decay_rate must be >= 0")
        if not 0.0 < self.absorb_efficiency <= 1.0:
            raise DomainError("absorb_efficiency must be in (0, 1]")


def step(state: PotState, dynamics: SoilDynamics, dt: float,
         water_in: float = 0.0) -> PotState:
    """Advance the pot by ``dt`` seconds with ``water_in`` liters pumped in.

    Decay applies over the whole interval, then the absorbed water lands at
    the end of it; keep dt small (<= 60 s) while the pump runs so the
    ordering error stays negligible.
    """
    if dt < 0:
        raise DomainError(f"dt must be >= 0, got {dt}")
    if water_in < 0:
        raise DomainError(f"water_in must be >= 0, got {water_in}")
    decayed = state.theta * math.exp(-dynamics.decay_rate * dt)
    absorbed = dynamics.absorb_efficiency * water_in / state.capacity_liters
    theta = min(1.0, max(0.0, decayed + absorbed))
    return replace(state, theta=theta, last_update=state.last_update + dt)
