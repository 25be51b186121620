"""Wires config, clock, simulated devices, controller and monitor together."""

from __future__ import annotations

import contextlib
import logging
import threading
from typing import Iterator

from . import calibration as calib
from .clock import Clock, ScaledClock
from .config import AppConfig, save_controller_section
from .controller import Controller, MonitorLoop
from .devices import SimulatedAdc, SimulatedRelay, SimulationRig
from .errors import DeviceError, HydradError
from .history import HistoryStore
from .soil import PotState, SoilDynamics

log = logging.getLogger(__name__)


class Daemon:
    """One assembled instance of the irrigation system on a single clock."""

    def __init__(self, config: AppConfig, clock: Clock | None = None,
                 config_path: str | None = None, time_scale: float = 1.0):
        self.config = config
        self.stop_event = threading.Event()
        if clock is None:
            clock = ScaledClock(scale=time_scale, stop_event=self.stop_event)
        self.clock = clock
        if config.device.backend != "simulated":
            raise DeviceError(
                f"device backend {config.device.backend!r} is not available; "
                "this build ships the simulated backend only")

        pot = PotState(theta=config.soil.initial_theta,
                       capacity_liters=config.soil.capacity_liters)
        dynamics = SoilDynamics(decay_rate=config.soil.decay_rate_per_s,
                                absorb_efficiency=config.soil.absorb_efficiency)
        self.rig = SimulationRig(clock=self.clock, pot=pot, dynamics=dynamics,
                                 pump=config.device.pump,
                                 dielectric=config.sensor.dielectric,
                                 transfer=config.sensor.transfer)
        self.adc = SimulatedAdc(self.rig, config.device.adc,
                                noise_sigma_v=config.device.noise_sigma_mv / 1000.0,
                                seed=config.device.noise_seed)
        self.relay = SimulatedRelay(self.rig)
        self.history = HistoryStore(config.storage.history_path,
                                    max_bytes=config.storage.max_bytes,
                                    keep_files=config.storage.keep_files)

        profile = None
        profile_path = config.storage.profile_path
        try:
            profile = calib.load_profile(profile_path)
            log.info("loaded calibration profile from %s", profile_path)
        except FileNotFoundError:
            log.info("no calibration profile at %s; starting uncalibrated", profile_path)
        except HydradError as exc:
            log.error("ignoring unusable calibration profile %s: %s", profile_path, exc)

        config_sink = None
        if config_path is not None:
            config_sink = lambda cfg: save_controller_section(config_path, cfg)

        self.controller = Controller(
            config=config.controller,
            adc=self.adc,
            relay=self.relay,
            pump=config.device.pump,
            clock=self.clock,
            history=self.history,
            profile=profile,
            profile_path=profile_path,
            pending_refs=calib.load_partial(profile_path),
            reference_conditioner=self._condition_reference,
            config_sink=config_sink,
            stop_event=self.stop_event,
        )
        self.monitor = MonitorLoop(self.controller, self.clock, self.stop_event)
        self._monitor_thread: threading.Thread | None = None

    @contextlib.contextmanager
    def _condition_reference(self, phase: str) -> Iterator[None]:
        """Simulated stand-in for moving the probe into dry/saturated soil."""
        saved = self.rig.theta
        self.rig.force_theta(0.0 if phase == "dry" else 1.0)
        try:
            yield
        finally:
            self.rig.force_theta(saved)

    def start_monitor(self) -> None:
        if self._monitor_thread is not None:
            return
        self._monitor_thread = threading.Thread(
            target=self.monitor.run, name="hydrad-monitor", daemon=True)
        self._monitor_thread.start()

    def shutdown(self) -> None:
        """Stop the loop and fail safe: the relay is de-energized no matter
        what state the shutdown caught the controller in."""
        self.stop_event.set()
        if self._monitor_thread is not None:
            self._monitor_thread.join(timeout=10.0)
            self._monitor_thread = None
        self.relay.set(False)
        self.history.close()
        log.info("daemon stopped; relay de-energized")
