"""Shared fixtures: daemons on a virtual clock with noise off by default."""

from __future__ import annotations

from dataclasses import replace

import pytest

from hydrad.clock import VirtualClock
from hydrad.config import (AppConfig, DeviceConfig, SoilConfig, StorageConfig,
                           parse_controller_doc)
from hydrad.daemon import Daemon


def pytest_runtest_logreport(report):
    # One visible pass/fail line per acceptance criterion.
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        print(f"\n[ACCEPTANCE] {'PASS' if report.passed else 'FAIL'} {name}")


def make_config(tmp_path, *, initial_theta=0.35, noise_mv=0.0, noise_seed=None,
                absorb=0.9, decay=2e-6, capacity=1.0, controller=None) -> AppConfig:
    base = AppConfig()
    device = replace(base.device, noise_sigma_mv=noise_mv, noise_seed=noise_seed)
    soil = SoilConfig(capacity_liters=capacity, decay_rate_per_s=decay,
                      absorb_efficiency=absorb, initial_theta=initial_theta)
    storage = StorageConfig(history_path=str(tmp_path / "history.jsonl"),
                            profile_path=str(tmp_path / "calibration.json"))
    ctrl = parse_controller_doc(controller or {})
    return replace(base, device=device, soil=soil, storage=storage, controller=ctrl)


def make_daemon(tmp_path, *, start_time=0.0, **kwargs) -> Daemon:
    return Daemon(make_config(tmp_path, **kwargs), clock=VirtualClock(start_time))


def calibrate(daemon: Daemon, n_samples: int = 1) -> None:
    daemon.controller.calibrate("dry", n_samples)
    daemon.controller.calibrate("wet", n_samples)


@pytest.fixture
def sim(tmp_path):
    """Factory for virtual-clock daemons; shuts them down afterwards."""
    daemons = []

    def build(**kwargs) -> Daemon:
        daemon = make_daemon(tmp_path / f"d{len(daemons)}", **kwargs)
        daemons.append(daemon)
        return daemon

    yield build
    for daemon in daemons:
        daemon.shutdown()


@pytest.fixture
def calibrated_sim(sim):
    """A calibrated daemon factory (dry/wet references already captured)."""

    def build(**kwargs) -> Daemon:
        daemon = sim(**kwargs)
        calibrate(daemon)
        return daemon

    return build
