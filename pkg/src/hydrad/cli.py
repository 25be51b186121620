"""Operator entry point: serve the daemon, one-shot reads, calibration.

Exit codes are a stable scripting contract: 0 success, 1 runtime/device
error, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import logging
import signal
import sys
import threading

import uvicorn

from .api import create_app
from .config import DEFAULT_CONFIG_PATH, load_config
from .daemon import Daemon
from .errors import ConfigError, HydradError, NotCalibratedError

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hydrad", description="Simulation-backed irrigation controller daemon")
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the daemon (monitor loop + HTTP API)")
    serve.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="config file path")
    serve.add_argument("--time-scale", type=float, default=1.0,
                       help="accelerate the simulation clock (simulated backend only)")
    serve.set_defaults(func=cmd_serve)

    read = sub.add_parser("read", help="one-shot moisture reading to stdout")
    read.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="config file path")
    read.add_argument("--raw", action="store_true", help="print the raw ADC code only")
    read.set_defaults(func=cmd_read)

    cal = sub.add_parser("calibrate", help="capture a dry or wet reference")
    cal.add_argument("--config", default=DEFAULT_CONFIG_PATH, help="config file path")
    cal.add_argument("--phase", required=True, choices=("dry", "wet"),
                     help="which reference to capture")
    cal.add_argument("--samples", type=int, default=None,
                     help="reads to take the median of (default from config)")
    cal.set_defaults(func=cmd_calibrate)
    return parser


def cmd_serve(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.time_scale <= 0:
        print("error: --time-scale must be > 0", file=sys.stderr)
        return EXIT_USAGE
    if args.time_scale != 1.0 and cfg.device.backend != "simulated":
        print("error: --time-scale only applies to the simulated backend", file=sys.stderr)
        return EXIT_USAGE
    daemon = Daemon(cfg, config_path=str(args.config), time_scale=args.time_scale)
    app = create_app(daemon)
    daemon.start_monitor()
    log.info("serving on http://%s:%d (time scale %gx)",
             cfg.server.host, cfg.server.port, args.time_scale)
    # uvicorn replays a caught SIGTERM after its graceful shutdown; turn that
    # into a clean exit so the relay fail-safe below always runs.
    if threading.current_thread() is threading.main_thread():
        signal.signal(signal.SIGTERM, lambda signum, frame: sys.exit(EXIT_OK))
    try:
        uvicorn.run(app, host=cfg.server.host, port=cfg.server.port, log_level="warning")
    except KeyboardInterrupt:
        pass
    finally:
        daemon.shutdown()
    return EXIT_OK


def cmd_read(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    daemon = Daemon(cfg)
    try:
        reading = daemon.controller.take_reading()
        if args.raw:
            print(f"raw={reading.code}")
        elif reading.percent is None:
            raise NotCalibratedError("no calibration profile; use --raw for the bare code")
        else:
            print(f"moisture={reading.percent:.1f}% raw={reading.code}")
    finally:
        daemon.shutdown()
    return EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    if args.samples is not None and args.samples < 1:
        print("error: --samples must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    daemon = Daemon(cfg)
    try:
        n = args.samples if args.samples is not None else cfg.calibration.default_samples
        result = daemon.controller.calibrate(args.phase, n)
        print(f"{result['phase']} reference captured: raw={result['raw_code']}")
        if result["complete"]:
            profile = result["profile"]
            print(f"calibration complete: raw_dry={profile.raw_dry} "
                  f"raw_wet={profile.raw_wet} -> {cfg.storage.profile_path}")
        else:
            other = "wet" if result["phase"] == "dry" else "dry"
            print(f"awaiting {other} reference to complete the profile")
    finally:
        daemon.shutdown()
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HydradError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
