"""Hardware abstraction: 16-bit ADC and relay-driven pump, simulation backend.

The driver interfaces are what a real-hardware backend would implement; the
shipped backend runs against ``SimulationRig``, which owns the pot model and
integrates it lazily whenever a device touches it. One logical owner per
rig: the controller serializes all reads and relay commands.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from typing import Protocol

from . import soil
from .clock import Clock
from .errors import BusError, DeviceError, DomainError
from .physics import SensorTransfer, SoilDielectricModel, sensor_voltage

ADC_CODE_MIN = -32768
ADC_CODE_MAX = 32767
PGA_FULL_SCALES = (6.144, 4.096, 2.048, 1.024, 0.512, 0.256)
DATA_RATES = (8, 16, 32, 64, 128, 250, 475, 860)

# Integration step while the pump runs, so absorbed water lands smoothly.
PUMP_SUBSTEP_S = 1.0


@dataclass(frozen=True)
class AdcConfig:
    """Converter settings: programmable gain, input channel, mode, rate."""

    pga_full_scale: float = 4.096
    mux_channel: int = 0
    mode: str = "single_shot"
    data_rate: int = 860

    def __post_init__(self):
        if self.pga_full_scale not in PGA_FULL_SCALES:
            raise DomainError(
                f"pga_full_scale must be one of {PGA_FULL_SCALES}, got {self.pga_full_scale}")
        if not 0 <= self.mux_channel <= 3:
            raise DomainError(f"mux_channel must be 0..3, got {self.mux_channel}")
        if self.mode not in ("single_shot", "continuous"):
            raise DomainError(f"mode must be single_shot or continuous, got {self.mode!r}")
        if self.data_rate not in DATA_RATES:
            raise DomainError(f"data_rate must be one of {DATA_RATES}, got {self.data_rate}")

    @property
    def lsb_volts(self) -> float:
        return self.pga_full_scale / 32768.0


@dataclass(frozen=True)
class AdcSample:
    """One conversion result. ``voltage`` is the dequantized code."""

    code: int
    voltage: float
    channel: int
    at: float


@dataclass(frozen=True)
class RelayState:
    energized: bool
    since: float


@dataclass(frozen=True)
class PumpModel:
    """Delivery rate while the relay keeps the pump energized."""

    flow_rate_lps: float = 0.005

    def __post_init__(self):
        if self.flow_rate_lps <= 0:
            raise DomainError("flow_rate_lps must be > 0")


def quantize(voltage: float, config: AdcConfig) -> int:
    """Voltage to signed 16-bit code, saturating at the rails."""
    code = round(voltage * 32768.0 / config.pga_full_scale)
    return max(ADC_CODE_MIN, min(ADC_CODE_MAX, code))


def dequantize(code: int, config: AdcConfig) -> float:
    """Signed 16-bit code back to volts at the configured full scale."""
    return code * config.pga_full_scale / 32768.0


class AdcDriver(Protocol):
    def read_single_shot(self, channel: int | None = None) -> AdcSample:
        ...


class RelayDriver(Protocol):
    def set(self, on: bool) -> RelayState:
        ...

    @property
    def state(self) -> RelayState:
        ...


@dataclass
class SimulationRig:
    """Pot, pump, relay and probe electronics wired to one virtual clock.

    Device calls sync the pot to the clock first, so time spent sleeping
    (pumping, settling, waiting for the next check) is integrated exactly
    once no matter who looks.
    """

    clock: Clock
    pot: soil.PotState
    dynamics: soil.SoilDynamics
    pump: PumpModel
    dielectric: SoilDielectricModel = field(default_factory=SoilDielectricModel)
    transfer: SensorTransfer = field(default_factory=SensorTransfer)

    def __post_init__(self):
        self.pot = replace(self.pot, last_update=self.clock.now())
        self._energized = False
        self._since = self.clock.now()
        self.relay_transitions: list[RelayState] = []
        self._delivered = 0.0

    # -- soil integration ---------------------------------------------------

    def sync(self) -> None:
        """Advance the pot to the current clock time."""
        now = self.clock.now()
        dt = now - self.pot.last_update
        if dt <= 0:
            return
        if not self._energized:
            self.pot = soil.step(self.pot, self.dynamics, dt)
            return
        flow = self.pump.flow_rate_lps
        steps = max(1, math.ceil(dt / PUMP_SUBSTEP_S))
        sub = dt / steps
        for _ in range(steps):
            self.pot = soil.step(self.pot, self.dynamics, sub, flow * sub)
            self._delivered += flow * sub

    @property
    def theta(self) -> float:
        self.sync()
        return self.pot.theta

    @property
    def delivered_liters(self) -> float:
        """Total water pumped since construction."""
        self.sync()
        return self._delivered

    def force_theta(self, theta: float) -> None:
        """Pin the pot to a given water fraction (calibration references, tests)."""
        self.sync()
        self.pot = replace(self.pot, theta=theta)

    # -- probe & relay ------------------------------------------------------

    def analog_voltage(self) -> float:
        """Probe output for the current pot state, before noise and quantization."""
        self.sync()
        return sensor_voltage(self.pot.theta, self.dielectric, self.transfer)

    def set_relay(self, on: bool) -> RelayState:
        self.sync()
        if on != self._energized:
            self._energized = on
            self._since = self.clock.now()
            self.relay_transitions.append(RelayState(on, self._since))
        return self.relay_state

    @property
    def relay_state(self) -> RelayState:
        return RelayState(self._energized, self._since)

    def energize_count(self) -> int:
        return sum(1 for t in self.relay_transitions if t.energized)


class SimulatedAdc:
    """Single-shot ADC sampling the rig's probe voltage.

    Optional zero-mean Gaussian noise is injected at the voltage level with
    a seedable RNG; conversion latency is modeled as 1/data_rate seconds.
    """

    def __init__(self, rig: SimulationRig, config: AdcConfig | None = None,
                 noise_sigma_v: float = 0.0, seed: int | None = None):
        self.rig = rig
        self.config = config or AdcConfig()
        if self.config.mode != "single_shot":
            raise DeviceError(f"unsupported mode {self.config.mode!r}: "
                              "simulated backend models single_shot only")
        if noise_sigma_v < 0:
            raise DomainError("noise_sigma_v must be >= 0")
        self.noise_sigma_v = noise_sigma_v
        self._rng = random.Random(seed)
        self._fault_queue: list[Exception] = []

    def inject_fault(self, exc: Exception | None = None) -> None:
        """Make the next read fail (bus fault by default). Test hook."""
        self._fault_queue.append(exc or BusError("simulated bus unavailable"))

    def read_single_shot(self, channel: int | None = None) -> AdcSample:
        if self._fault_queue:
            raise self._fault_queue.pop(0)
        ch = self.config.mux_channel if channel is None else channel
        if not 0 <= ch <= 3:
            raise DeviceError(f"invalid channel {ch}: ADC has channels 0..3")
        at = self.rig.clock.now()
        # Only the probe channel is wired; the rest float at 0 V.
        volts = self.rig.analog_voltage() if ch == self.config.mux_channel else 0.0
        if self.noise_sigma_v > 0:
            volts += self._rng.gauss(0.0, self.noise_sigma_v)
        code = quantize(volts, self.config)
        self.rig.clock.sleep(1.0 / self.config.data_rate)
        return AdcSample(code=code, voltage=dequantize(code, self.config),
                         channel=ch, at=at)


class SimulatedRelay:
    """Relay switching the rig's pump circuit. Idempotent set()."""

    def __init__(self, rig: SimulationRig):
        self.rig = rig

    def set(self, on: bool) -> RelayState:
        return self.rig.set_relay(on)

    @property
    def state(self) -> RelayState:
        return self.rig.relay_state
