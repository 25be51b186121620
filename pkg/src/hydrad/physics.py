"""Capacitive probe model: water content -> permittivity -> capacitance -> volts.

All functions are pure. The dielectric mixing law is linear between the dry
and saturated endpoints; it is isolated here so a power-law variant could
replace it without touching callers.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError

VACUUM_PERMITTIVITY = 8.854e-12  # F/m


@dataclass(frozen=True)
class ProbeGeometry:
    """Parallel-plate geometry of the probe."""

    plate_area_m2: float
    plate_gap_m: float

    def __post_init__(self):
        if self.plate_area_m2 <= 0:
            raise DomainError("plate_area_m2 must be > 0")
        if self.plate_gap_m <= 0:
            raise DomainError("plate_gap_m must be > 0")


@dataclass(frozen=True)
class SoilDielectricModel:
    """Relative permittivity endpoints for dry soil and water."""

    eps_dry: float = 3.0
    eps_water: float = 80.0
    eps0: float = VACUUM_PERMITTIVITY

    def __post_init__(self):
        if self.eps_dry < 1:
            raise DomainError("eps_dry must be >= 1")
        if self.eps_water <= self.eps_dry:
            raise DomainError("eps_water must be > eps_dry")
        if self.eps0 <= 0:
            raise DomainError("eps0 must be > 0")


@dataclass(frozen=True)
class SensorTransfer:
    """Probe output voltage at the dry (0%) and saturated (100%) endpoints.

    Output falls as moisture rises: higher capacitance demodulates to a
    lower voltage in commodity capacitive probes, which is also what makes
    the raw_dry > raw_wet calibration convention consistent.
    """

    v_dry: float = 2.8
    v_wet: float = 1.2

    def __post_init__(self):
        if self.v_wet < 0:
            raise DomainError("v_wet must be >= 0")
        if self.v_dry <= self.v_wet:
            raise DomainError("v_dry must be > v_wet")


def effective_permittivity(theta: float, model: SoilDielectricModel) -> float:
    """Relative permittivity of soil at volumetric water fraction ``theta``.

    Linear mix of the dry and water endpoints; strictly increasing in theta.
    """
    if not 0.0 <= theta <= 1.0:
        raise DomainError(f"theta must be in [0, 1], got {theta}")
    return model.eps_dry + (model.eps_water - model.eps_dry) * theta


def capacitance(eps_r: float, geometry: ProbeGeometry) -> float:
    """Parallel-plate capacitance in farads: eps_r * eps0 * A / d."""
    if eps_r < 1:
        raise DomainError(f"eps_r must be >= 1, got {eps_r}")
    return eps_r * VACUUM_PERMITTIVITY * geometry.plate_area_m2 / geometry.plate_gap_m


def moisture_fraction(theta: float, model: SoilDielectricModel) -> float:
    """Normalized position of theta between the dry and wet endpoints.

    0 at theta=0, 1 at theta=1; with the linear mixing law this equals theta.
    """
    eps = effective_permittivity(theta, model)
    return (eps - model.eps_dry) / (model.eps_water - model.eps_dry)


def sensor_voltage(theta: float, model: SoilDielectricModel,
                   transfer: SensorTransfer) -> float:
    """Probe output voltage at water fraction ``theta``.

    Decreases strictly from v_dry at theta=0 to v_wet at theta=1.
    """
    n = moisture_fraction(theta, model)
    return transfer.v_dry - (transfer.v_dry - transfer.v_wet) * n
