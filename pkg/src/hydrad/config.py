"""Daemon configuration: one human-editable JSON file, strict validation.

Every error names the offending field with its section path, so a typo in
`hydrad.json` fails fast instead of silently running on defaults.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .controller import ControllerConfig
from .devices import AdcConfig, PumpModel
from .errors import ConfigError, DomainError
from .physics import ProbeGeometry, SensorTransfer, SoilDielectricModel

CONFIG_VERSION = 1
DEFAULT_CONFIG_PATH = "hydrad.json"


@dataclass(frozen=True)
class DeviceConfig:
    backend: str = "simulated"
    adc: AdcConfig = field(default_factory=AdcConfig)
    pump: PumpModel = field(default_factory=PumpModel)
    noise_sigma_mv: float = 2.0
    noise_seed: int | None = None


@dataclass(frozen=True)
class SensorConfig:
    transfer: SensorTransfer = field(default_factory=SensorTransfer)
    dielectric: SoilDielectricModel = field(default_factory=SoilDielectricModel)
    geometry: ProbeGeometry = field(default_factory=lambda: ProbeGeometry(1e-4, 1e-3))


@dataclass(frozen=True)
class SoilConfig:
    capacity_liters: float = 1.0
    decay_rate_per_s: float = 2e-6
    absorb_efficiency: float = 0.9
    initial_theta: float = 0.35


@dataclass(frozen=True)
class CalibrationDefaults:
    default_samples: int = 9


@dataclass(frozen=True)
class StorageConfig:
    history_path: str = "history.jsonl"
    profile_path: str = "calibration.json"
    max_bytes: int = 10 * 1024 * 1024
    keep_files: int = 5


@dataclass(frozen=True)
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    static_dir: str | None = None


@dataclass(frozen=True)
class AppConfig:
    device: DeviceConfig = field(default_factory=DeviceConfig)
    sensor: SensorConfig = field(default_factory=SensorConfig)
    soil: SoilConfig = field(default_factory=SoilConfig)
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    calibration: CalibrationDefaults = field(default_factory=CalibrationDefaults)
    storage: StorageConfig = field(default_factory=StorageConfig)
    server: ServerConfig = field(default_factory=ServerConfig)


class _Section:
    """Reads one config section, tracking its path for error messages."""

    def __init__(self, doc: dict, path: str, known: set[str]):
        if not isinstance(doc, dict):
            raise ConfigError(path, "expected a JSON object")
        self.doc = doc
        self.path = path
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"{path}.{sorted(unknown)[0]}", "unknown field")

    def _fetch(self, key, default):
        return self.doc.get(key, default)

    def number(self, key: str, default: float) -> float:
        value = self._fetch(key, default)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{self.path}.{key}", f"expected a number, got {value!r}")
        return float(value)

    def integer(self, key: str, default: int) -> int:
        value = self._fetch(key, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.path}.{key}", f"expected an integer, got {value!r}")
        return value

    def text(self, key: str, default: str | None) -> str | None:
        value = self._fetch(key, default)
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{self.path}.{key}", f"expected a string, got {value!r}")
        return value

    def optional_int(self, key: str, default: int | None) -> int | None:
        value = self._fetch(key, default)
        if value is None:
            return None
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.path}.{key}", f"expected an integer or null, got {value!r}")
        return value

    def child(self, key: str, known: set[str]) -> "_Section":
        return _Section(self._fetch(key, {}), f"{self.path}.{key}", known)


def _build(path: str, factory, **kwargs):
    """Construct a validated dataclass, renaming its domain errors to the
    config-file field path."""
    try:
        return factory(**kwargs)
    except ConfigError as exc:
        raise ConfigError(f"{path}.{exc.field}", str(exc).split(": ", 1)[-1]) from exc
    except DomainError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_config(doc: dict, base_dir: Path | None = None) -> AppConfig:
    """Validate a config document; relative paths resolve against base_dir."""
    if not isinstance(doc, dict):
        raise ConfigError("document", "expected a JSON object")
    top = _Section(doc, "config", {"version", "device", "sensor", "soil", "controller",
                                   "calibration", "storage", "server"})
    version = top.integer("version", CONFIG_VERSION)
    if version != CONFIG_VERSION:
        raise ConfigError("config.version", f"unsupported version {version}")

    dev = top.child("device", {"backend", "adc", "pump", "noise_sigma_mv", "noise_seed"})
    backend = dev.text("backend", "simulated")
    if backend not in ("simulated", "hardware"):
        raise ConfigError("config.device.backend",
                          f"must be 'simulated' or 'hardware', got {backend!r}")
    adc_sec = dev.child("adc", {"pga_full_scale", "mux_channel", "mode", "data_rate"})
    adc = _build(adc_sec.path, AdcConfig,
                 pga_full_scale=adc_sec.number("pga_full_scale", 4.096),
                 mux_channel=adc_sec.integer("mux_channel", 0),
                 mode=adc_sec.text("mode", "single_shot"),
                 data_rate=adc_sec.integer("data_rate", 860))
    pump_sec = dev.child("pump", {"flow_rate_lps"})
    pump = _build(pump_sec.path, PumpModel,
                  flow_rate_lps=pump_sec.number("flow_rate_lps", 0.005))
    noise_sigma_mv = dev.number("noise_sigma_mv", 2.0)
    if noise_sigma_mv < 0:
        raise ConfigError("config.device.noise_sigma_mv", "must be >= 0")
    device = DeviceConfig(backend=backend, adc=adc, pump=pump,
                          noise_sigma_mv=noise_sigma_mv,
                          noise_seed=dev.optional_int("noise_seed", None))

    sen = top.child("sensor", {"transfer", "dielectric", "geometry"})
    tr_sec = sen.child("transfer", {"v_dry", "v_wet"})
    transfer = _build(tr_sec.path, SensorTransfer,
                      v_dry=tr_sec.number("v_dry", 2.8), v_wet=tr_sec.number("v_wet", 1.2))
    di_sec = sen.child("dielectric", {"eps_dry", "eps_water"})
    dielectric = _build(di_sec.path, SoilDielectricModel,
                        eps_dry=di_sec.number("eps_dry", 3.0),
                        eps_water=di_sec.number("eps_water", 80.0))
    ge_sec = sen.child("geometry", {"plate_area_m2", "plate_gap_m"})
    geometry = _build(ge_sec.path, ProbeGeometry,
                      plate_area_m2=ge_sec.number("plate_area_m2", 1e-4),
                      plate_gap_m=ge_sec.number("plate_gap_m", 1e-3))
    sensor = SensorConfig(transfer=transfer, dielectric=dielectric, geometry=geometry)

    so = top.child("soil", {"capacity_liters", "decay_rate_per_s", "absorb_efficiency",
                            "initial_theta"})
    soil_cfg = SoilConfig(capacity_liters=so.number("capacity_liters", 1.0),
                          decay_rate_per_s=so.number("decay_rate_per_s", 2e-6),
                          absorb_efficiency=so.number("absorb_efficiency", 0.9),
                          initial_theta=so.number("initial_theta", 0.35))
    if soil_cfg.capacity_liters <= 0:
        raise ConfigError("config.soil.capacity_liters", "must be > 0")
    if soil_cfg.decay_rate_per_s < 0:
        raise ConfigError("config.soil.decay_rate_per_s", "must be >= 0")
    if not 0 < soil_cfg.absorb_efficiency <= 1:
        raise ConfigError("config.soil.absorb_efficiency", "must be in (0, 1]")
    if not 0 <= soil_cfg.initial_theta <= 1:
        raise ConfigError("config.soil.initial_theta", "must be in [0, 1]")

    controller = parse_controller_doc(top._fetch("controller", {}), path="config.controller")

    cal = top.child("calibration", {"default_samples"})
    default_samples = cal.integer("default_samples", 9)
    if default_samples < 1:
        raise ConfigError("config.calibration.default_samples", "must be >= 1")

    st = top.child("storage", {"history_path", "profile_path", "max_bytes", "keep_files"})
    history_path = st.text("history_path", "history.jsonl")
    profile_path = st.text("profile_path", "calibration.json")
    if not history_path:
        raise ConfigError("config.storage.history_path", "must be a non-empty path")
    if not profile_path:
        raise ConfigError("config.storage.profile_path", "must be a non-empty path")
    storage = StorageConfig(history_path=history_path,
                            profile_path=profile_path,
                            max_bytes=st.integer("max_bytes", 10 * 1024 * 1024),
                            keep_files=st.integer("keep_files", 5))
    if storage.max_bytes <= 0:
        raise ConfigError("config.storage.max_bytes", "must be > 0")
    if storage.keep_files < 1:
        raise ConfigError("config.storage.keep_files", "must be >= 1")
    if base_dir is not None:
        storage = StorageConfig(
            history_path=str(base_dir / storage.history_path),
            profile_path=str(base_dir / storage.profile_path),
            max_bytes=storage.max_bytes, keep_files=storage.keep_files)

    sv = top.child("server", {"host", "port", "static_dir"})
    port = sv.integer("port", 8080)
    if not 0 <= port <= 65535:
        raise ConfigError("config.server.port", f"must be 0..65535, got {port}")
    static_dir = sv.text("static_dir", None)
    if static_dir is not None and base_dir is not None and not os.path.isabs(static_dir):
        static_dir = str(base_dir / static_dir)
    host = sv.text("host", "127.0.0.1")
    if not host:
        raise ConfigError("config.server.host", "must be a non-empty string")
    server = ServerConfig(host=host, port=port, static_dir=static_dir)

    return AppConfig(device=device, sensor=sensor, soil=soil_cfg, controller=controller,
                     calibration=CalibrationDefaults(default_samples=default_samples),
                     storage=storage, server=server)


def parse_controller_doc(doc: dict, path: str = "controller",
                         defaults: ControllerConfig | None = None) -> ControllerConfig:
    """Strict parse of the controller section (also the PUT /api/config body).

    Omitted fields fall back to ``defaults``, so a PUT may update a subset;
    the merged result must satisfy every invariant or nothing is applied.
    """
    sec = _Section(doc, path, {"threshold_pct", "check_interval_s", "base_duration_s",
                               "gain_s_per_pct", "settle_delay_s", "max_cycles",
                               "max_pump_on_s", "target_margin_pct"})
    defaults = defaults or ControllerConfig()
    return _build(path, ControllerConfig,
                  threshold_pct=sec.number("threshold_pct", defaults.threshold_pct),
                  check_interval_s=sec.number("check_interval_s", defaults.check_interval_s),
                  base_duration_s=sec.number("base_duration_s", defaults.base_duration_s),
                  gain_s_per_pct=sec.number("gain_s_per_pct", defaults.gain_s_per_pct),
                  settle_delay_s=sec.number("settle_delay_s", defaults.settle_delay_s),
                  max_cycles=sec.integer("max_cycles", defaults.max_cycles),
                  max_pump_on_s=sec.number("max_pump_on_s", defaults.max_pump_on_s),
                  target_margin_pct=sec.number("target_margin_pct", defaults.target_margin_pct))


def controller_doc(cfg: ControllerConfig) -> dict:
    return {
        "threshold_pct": cfg.threshold_pct,
        "check_interval_s": cfg.check_interval_s,
        "base_duration_s": cfg.base_duration_s,
        "gain_s_per_pct": cfg.gain_s_per_pct,
        "settle_delay_s": cfg.settle_delay_s,
        "max_cycles": cfg.max_cycles,
        "max_pump_on_s": cfg.max_pump_on_s,
        "target_margin_pct": cfg.target_margin_pct,
    }


def default_doc() -> dict:
    """The shipped sample config: every default spelled out."""
    return {
        "version": CONFIG_VERSION,
        "device": {
            "backend": "simulated",
            "adc": {"pga_full_scale": 4.096, "mux_channel": 0,
                    "mode": "single_shot", "data_rate": 860},
            "pump": {"flow_rate_lps": 0.005},
            "noise_sigma_mv": 2.0,
            "noise_seed": None,
        },
        "sensor": {
            "transfer": {"v_dry": 2.8, "v_wet": 1.2},
            "dielectric": {"eps_dry": 3.0, "eps_water": 80.0},
            "geometry": {"plate_area_m2": 1e-4, "plate_gap_m": 1e-3},
        },
        "soil": {
            "capacity_liters": 1.0,
            "decay_rate_per_s": 2e-6,
            "absorb_efficiency": 0.9,
            "initial_theta": 0.35,
        },
        "controller": controller_doc(ControllerConfig()),
        "calibration": {"default_samples": 9},
        "storage": {
            "history_path": "history.jsonl",
            "profile_path": "calibration.json",
            "max_bytes": 10 * 1024 * 1024,
            "keep_files": 5,
        },
        # static_dir points at the dashboard build; harmless if not built yet
        "server": {"host": "127.0.0.1", "port": 8080, "static_dir": "frontend/dist"},
    }


def load_config(path: str | Path) -> AppConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise ConfigError("config", f"file not found: {path}")
    except OSError as exc:
        raise ConfigError("config", f"cannot read {path}: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("config", f"{path} is not valid JSON: {exc}")
    return parse_config(doc, base_dir=path.resolve().parent)


def save_controller_section(config_path: str | Path, cfg: ControllerConfig) -> None:
    """Rewrite just the controller section of the config file, atomically."""
    path = Path(config_path)
    doc = json.loads(path.read_text(encoding="utf-8")) if path.exists() else default_doc()
    doc["controller"] = controller_doc(cfg)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)
