"""Threshold-triggered watering control with feedback verification.

The controller is a single logical actor: periodic checks, manual commands
and calibration all run one at a time under the command lock (which doubles
as the device-access queue). Status is published as immutable snapshots the
API layer reads without touching that lock.
"""

from __future__ import annotations

import contextlib
import logging
import threading
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable, ContextManager, Iterator

from . import calibration as calib
from . import serialize
from .calibration import CalibrationProfile
from .clock import Clock
from .devices import AdcDriver, PumpModel, RelayDriver
from .errors import (BusError, ConfigError, ConflictError, DeviceError, DomainError,
                     HydradError, InvalidProfileError, NotCalibratedError, StorageError)
from .history import HistoryStore

log = logging.getLogger(__name__)


class ControllerState(str, Enum):
    IDLE = "idle"
    READING = "reading"
    WATERING = "watering"
    SETTLING = "settling"
    ALARM = "alarm"


@dataclass(frozen=True)
class ControllerConfig:
    """User-tunable thresholds, dosing coefficients and safety limits."""

    threshold_pct: float = 40.0
    check_interval_s: float = 1800.0
    base_duration_s: float = 2.0
    gain_s_per_pct: float = 2.0
    settle_delay_s: float = 30.0
    max_cycles: int = 5
    max_pump_on_s: float = 60.0
    target_margin_pct: float = 0.0

    def __post_init__(self):
        if not 0 < self.threshold_pct < 100:
            raise ConfigError("threshold_pct", f"must be in (0, 100), got {self.threshold_pct}")
        if self.check_interval_s <= 0:
            raise ConfigError("check_interval_s", "must be > 0")
        if self.base_duration_s < 0:
            raise ConfigError("base_duration_s", "must be >= 0")
        if self.gain_s_per_pct < 0:
            raise ConfigError("gain_s_per_pct", "must be >= 0")
        if self.base_duration_s + self.gain_s_per_pct <= 0:
            raise ConfigError("base_duration_s", "base_duration_s + gain_s_per_pct must be > 0")
        if not isinstance(self.max_cycles, int) or not 1 <= self.max_cycles <= 20:
            raise ConfigError("max_cycles", f"must be an integer in 1..20, got {self.max_cycles}")
        if self.max_pump_on_s <= 0:
            raise ConfigError("max_pump_on_s", "must be > 0")
        if self.target_margin_pct < 0:
            raise ConfigError("target_margin_pct", "must be >= 0")
        if self.threshold_pct + self.target_margin_pct > 100:
            raise ConfigError("target_margin_pct",
                              "threshold_pct + target_margin_pct must be <= 100")


@dataclass(frozen=True)
class MoistureReading:
    """One sensed sample; percent is None until a profile is loaded."""

    code: int
    voltage: float
    percent: float | None
    at: float


@dataclass(frozen=True)
class WateringEvent:
    duration_s: float
    volume_l: float
    moisture_before: float | None
    moisture_after: float | None
    at: float


@dataclass(frozen=True)
class WateringSession:
    trigger: str  # "automatic" | "manual"
    started_at: float
    cycles: tuple[WateringEvent, ...] = ()


@dataclass(frozen=True)
class StatusSnapshot:
    """The controller's internal table, published per state transition."""

    state: ControllerState
    calibrated: bool
    last_reading: MoistureReading | None
    next_check_at: float | None
    active_session: WateringSession | None
    alarm_reason: str | None
    last_error: str | None
    at: float


def compute_dose(moisture_pct: float, config: ControllerConfig) -> float:
    """Pump-on seconds for a reading: affine in the deficit, capped.

    Zero at or above the threshold; equality counts as adequate.
    """
    if not 0.0 <= moisture_pct <= 100.0:
        raise DomainError(f"moisture_pct must be in [0, 100], got {moisture_pct}")
    if moisture_pct >= config.threshold_pct:
        return 0.0
    deficit = config.threshold_pct - moisture_pct
    dose = config.base_duration_s + config.gain_s_per_pct * deficit
    return min(dose, config.max_pump_on_s)


class Controller:
    """Sense -> decide -> actuate loop plus manual and calibration commands."""

    def __init__(self, config: ControllerConfig, adc: AdcDriver, relay: RelayDriver,
                 pump: PumpModel, clock: Clock, history: HistoryStore,
                 profile: CalibrationProfile | None = None,
                 profile_path: str | None = None,
                 pending_refs: dict[str, int] | None = None,
                 reference_conditioner: Callable[[str], ContextManager] | None = None,
                 config_sink: Callable[[ControllerConfig], None] | None = None,
                 stop_event: threading.Event | None = None):
        self.adc = adc
        self.relay = relay
        self.pump = pump
        self.clock = clock
        self.history = history
        self._config = config
        self._config_lock = threading.Lock()
        self._config_sink = config_sink
        self._profile = profile
        self._profile_path = profile_path
        self._pending_refs = dict(pending_refs or {})
        self._reference_conditioner = reference_conditioner
        self._stop = stop_event or threading.Event()
        self._lock = threading.Lock()  # the actor/device-access queue
        self._status_lock = threading.Lock()
        now = clock.now()
        self._status = StatusSnapshot(
            state=ControllerState.IDLE,
            calibrated=profile is not None,
            last_reading=None,
            next_check_at=now + config.check_interval_s,
            active_session=None,
            alarm_reason=None,
            last_error=None,
            at=now,
        )

    # -- status & config ------------------------------------------------------

    @property
    def status(self) -> StatusSnapshot:
        with self._status_lock:
            return self._status

    @property
    def config(self) -> ControllerConfig:
        with self._config_lock:
            return self._config

    @property
    def profile(self) -> CalibrationProfile | None:
        return self._profile

    def update_config(self, new: ControllerConfig) -> ControllerConfig:
        """Swap the whole config atomically; takes effect at the next
        scheduling decision (an in-flight session finishes under the old one)."""
        with self._config_lock:
            self._config = new
        if self._config_sink is not None:
            self._config_sink(new)
        return new

    def _publish(self, state: ControllerState | None = None, **changes) -> StatusSnapshot:
        with self._status_lock:
            old = self._status
            if state is not None and state != old.state:
                self._log_history("transition",
                                  {"from": old.state.value, "to": state.value})
                changes["state"] = state
            snap = replace(old, at=self.clock.now(), **changes)
            self._status = snap
            return snap

    def _log_history(self, kind: str, payload: dict, ts: float | None = None) -> None:
        """Storage failures degrade status instead of killing the loop."""
        try:
            self.history.append(kind, self.clock.now() if ts is None else ts, payload)
        except StorageError as exc:
            log.error("history append failed: %s", exc)
            with self._status_lock:
                self._status = replace(self._status, last_error=f"history degraded: {exc}",
                                       at=self.clock.now())

    # -- sensing ----------------------------------------------------------------

    def _read(self) -> MoistureReading:
        sample = self.adc.read_single_shot()
        pct = calib.to_percent(sample.code, self._profile) if self._profile else None
        return MoistureReading(code=sample.code, voltage=sample.voltage,
                               percent=pct, at=sample.at)

    def _read_and_log(self) -> MoistureReading:
        reading = self._read()
        # Logged at the sample instant so cadence queries see exact times.
        self._log_history("reading", serialize.reading_doc(reading), ts=reading.at)
        return reading

    def take_reading(self) -> MoistureReading:
        """One-shot measurement with no threshold decision (CLI `read`)."""
        if not self._lock.acquire(blocking=False):
            raise ConflictError("controller is busy")
        try:
            return self._read()
        finally:
            self._lock.release()

    # -- the periodic check -------------------------------------------------------

    def run_check(self) -> StatusSnapshot:
        """Immediate moisture check, cascading into watering when needed."""
        if not self._lock.acquire(blocking=False):
            raise ConflictError("controller is busy")
        try:
            if self.status.state == ControllerState.ALARM:
                raise ConflictError("controller is in alarm state; clear it first")
            if self._profile is None:
                raise NotCalibratedError("no calibration profile loaded")
            return self._run_check_locked()
        finally:
            self._lock.release()

    def tick(self) -> None:
        """Scheduler entry point: run a check if one is due. Waits its turn
        behind any in-flight command instead of conflicting."""
        with self._lock:
            st = self.status
            if st.state == ControllerState.ALARM:
                return
            if st.next_check_at is not None and self.clock.now() + 1e-9 < st.next_check_at:
                return
            if self._profile is None:
                now = self.clock.now()
                self._log_history("error", {"message": "check skipped: not calibrated"})
                self._publish(next_check_at=now + self.config.check_interval_s,
                              last_error="check skipped: not calibrated")
                return
            self._run_check_locked()

    def _run_check_locked(self) -> StatusSnapshot:
        cfg = self.config
        start = self.clock.now()
        self._publish(ControllerState.READING)
        try:
            reading = self._read_and_log()
        except (DeviceError, BusError) as exc:
            log.warning("moisture check failed: %s", exc)
            self._log_history("error", {"message": f"moisture check failed: {exc}"})
            self._publish(ControllerState.IDLE,
                          next_check_at=start + self.config.check_interval_s,
                          last_error=str(exc))
            return self.status
        if reading.percent >= cfg.threshold_pct:
            self._publish(ControllerState.IDLE, last_reading=reading,
                          next_check_at=self._next_check_after(start), last_error=None)
            return self.status
        self._water_until_restored(reading, cfg, started_at=start)
        return self.status

    def _next_check_after(self, start: float) -> float:
        """Schedule from when the check began so the cadence stays drift-free;
        fall back to now if a long session overran the interval."""
        interval = self.config.check_interval_s
        now = self.clock.now()
        target = start + interval
        return target if target > now else now + interval

    # -- watering -------------------------------------------------------------

    def _pump_pulse(self, duration_s: float) -> tuple[float, float]:
        """Energize the relay for ``duration_s``; returns (t_on, actual seconds).

        The relay is de-energized even if the sleep is cut short by shutdown.
        """
        t_on = self.clock.now()
        self.relay.set(True)
        try:
            self.clock.sleep(duration_s)
        finally:
            self.relay.set(False)
        return t_on, self.clock.now() - t_on

    def _water_until_restored(self, first: MoistureReading, cfg: ControllerConfig,
                              started_at: float) -> None:
        """The feedback loop: dose, pump, settle, re-read, repeat until the
        target is reached or the cycle bound trips into alarm."""
        session = WateringSession(trigger="automatic", started_at=self.clock.now())
        reading = first
        target = cfg.threshold_pct + cfg.target_margin_pct
        while True:
            dose = compute_dose(reading.percent, cfg)
            if dose <= 0:
                break  # at or above threshold; pumping further would be unsafe
            self._publish(ControllerState.WATERING, active_session=session)
            t_on, actual = self._pump_pulse(dose)
            volume = self.pump.flow_rate_lps * actual
            if self._stop.is_set():
                event = WateringEvent(actual, volume, reading.percent, None, t_on)
                session = replace(session, cycles=session.cycles + (event,))
                self._log_event(event, session)
                break
            self._publish(ControllerState.SETTLING, active_session=None)
            self.clock.sleep(cfg.settle_delay_s)
            try:
                after = self._read_and_log()
            except (DeviceError, BusError) as exc:
                event = WateringEvent(actual, volume, reading.percent, None, t_on)
                session = replace(session, cycles=session.cycles + (event,))
                self._log_event(event, session)
                self._log_history("error", {"message": f"feedback reading failed: {exc}"})
                self._publish(ControllerState.IDLE, active_session=None,
                              next_check_at=self._next_check_after(started_at),
                              last_error=str(exc))
                return
            event = WateringEvent(actual, volume, reading.percent, after.percent, t_on)
            session = replace(session, cycles=session.cycles + (event,))
            self._log_event(event, session)
            reading = after
            if self._stop.is_set() or reading.percent >= target:
                break
            if len(session.cycles) >= cfg.max_cycles:
                if reading.percent < cfg.threshold_pct:
                    self._publish(ControllerState.ALARM, active_session=None,
                                  last_reading=reading, next_check_at=None,
                                  alarm_reason="moisture not restored after "
                                               f"{cfg.max_cycles} watering cycles")
                    log.error("alarm: moisture not restored after %d cycles", cfg.max_cycles)
                    return
                break  # over threshold but short of the margin: adequate
        self._publish(ControllerState.IDLE, active_session=None, last_reading=reading,
                      next_check_at=self._next_check_after(started_at), last_error=None)

    def _log_event(self, event: WateringEvent, session: WateringSession) -> None:
        self._log_history("watering",
                          serialize.event_doc(event, session.trigger, len(session.cycles)))

    def manual_water(self, duration_s: float) -> WateringSession:
        """Single fixed-duration watering with no feedback loop."""
        cfg = self.config
        if not 0 < duration_s <= cfg.max_pump_on_s:
            raise DomainError(
                f"duration must be in (0, {cfg.max_pump_on_s}] seconds, got {duration_s}")
        if not self._lock.acquire(blocking=False):
            raise ConflictError("watering or calibration already in progress")
        try:
            if self.status.state != ControllerState.IDLE:
                raise ConflictError(f"controller is {self.status.state.value}, not idle")
            before = self._read_and_log()
            session = WateringSession(trigger="manual", started_at=self.clock.now())
            self._publish(ControllerState.WATERING, active_session=session)
            t_on, actual = self._pump_pulse(duration_s)
            volume = self.pump.flow_rate_lps * actual
            after = None
            read_error = None
            if not self._stop.is_set():
                self._publish(ControllerState.SETTLING, active_session=None)
                self.clock.sleep(cfg.settle_delay_s)
                if not self._stop.is_set():
                    try:
                        after = self._read_and_log()
                    except (DeviceError, BusError) as exc:
                        read_error = str(exc)
                        self._log_history("error",
                                          {"message": f"feedback reading failed: {exc}"})
            event = WateringEvent(actual, volume, before.percent,
                                  None if after is None else after.percent, t_on)
            session = replace(session, cycles=(event,))
            self._log_event(event, session)
            # Manual watering leaves the periodic schedule untouched.
            self._publish(ControllerState.IDLE, active_session=None,
                          last_reading=after or before, last_error=read_error)
            return session
        finally:
            self._lock.release()

    # -- alarm ------------------------------------------------------------------

    def clear_alarm(self) -> StatusSnapshot:
        if not self._lock.acquire(blocking=False):
            raise ConflictError("controller is busy")
        try:
            if self.status.state != ControllerState.ALARM:
                raise ConflictError("controller is not in alarm state")
            now = self.clock.now()
            self._log_history("error", {"message": "alarm cleared by operator"})
            self._publish(ControllerState.IDLE, alarm_reason=None,
                          next_check_at=now + self.config.check_interval_s)
            return self.status
        finally:
            self._lock.release()

    # -- calibration --------------------------------------------------------------

    def calibrate(self, phase: str, n_samples: int = calib.DEFAULT_SAMPLES) -> dict:
        """Capture one reference; completes the profile once both are in."""
        if phase not in ("dry", "wet"):
            raise DomainError(f"phase must be 'dry' or 'wet', got {phase!r}")
        if n_samples < 1:
            raise DomainError(f"n_samples must be >= 1, got {n_samples}")
        if not self._lock.acquire(blocking=False):
            raise ConflictError("controller is busy")
        try:
            if self.status.state != ControllerState.IDLE:
                raise ConflictError(f"controller is {self.status.state.value}, not idle")
            conditioner = self._reference_conditioner or _no_conditioning
            with conditioner(phase):
                code = calib.capture_reference(self.adc, n_samples)
            refs = dict(self._pending_refs)
            refs[phase] = code
            if "dry" in refs and "wet" in refs:
                try:
                    profile = calib.complete_profile(refs, created_at=self.clock.now(),
                                                     label="two-point reference")
                except InvalidProfileError:
                    # Keep the previously captured phase so the wizard can retry
                    # just the one that failed.
                    self._persist_refs(self._pending_refs)
                    raise
                if self._profile_path:
                    calib.save_profile(profile, self._profile_path)
                    calib.clear_partial(self._profile_path)
                self._pending_refs = {}
                self._profile = profile
                self._publish(calibrated=True)
                log.info("calibrated: raw_dry=%d raw_wet=%d", profile.raw_dry, profile.raw_wet)
                return {"phase": phase, "raw_code": code, "complete": True,
                        "profile": profile}
            self._pending_refs = refs
            self._persist_refs(refs)
            return {"phase": phase, "raw_code": code, "complete": False, "profile": None}
        finally:
            self._lock.release()

    def _persist_refs(self, refs: dict[str, int]) -> None:
        if self._profile_path:
            calib.save_partial(self._profile_path, refs)


@contextlib.contextmanager
def _no_conditioning(phase: str) -> Iterator[None]:
    yield


class MonitorLoop:
    """Background scheduler: sleep until the next check is due, run it, repeat.

    Survives transient device errors (the controller reschedules after them)
    and idles politely while the controller sits in alarm.
    """

    def __init__(self, controller: Controller, clock: Clock,
                 stop_event: threading.Event | None = None):
        self.controller = controller
        self.clock = clock
        self.stop = stop_event or threading.Event()

    def _next_target(self) -> float:
        st = self.controller.status
        if st.state == ControllerState.ALARM or st.next_check_at is None:
            return self.clock.now() + self.controller.config.check_interval_s
        return st.next_check_at

    def run(self, until: float | None = None) -> None:
        """Run until stopped; with ``until``, process every check due at or
        before that virtual instant and return (deterministic tests)."""
        while not self.stop.is_set():
            target = self._next_target()
            if until is not None and target > until:
                return
            self.clock.sleep_until(target)
            if self.stop.is_set():
                return
            try:
                self.controller.tick()
            except HydradError as exc:
                log.error("scheduled check failed: %s", exc)
