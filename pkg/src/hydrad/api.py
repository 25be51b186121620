"""HTTP JSON control plane: the dashboard pulls status/history, pushes commands.

Mutations funnel into the controller actor; busy commands get a 409 instead
of queueing. Every non-2xx response body is one error object, {code, message}.
"""

from __future__ import annotations

import logging
from pathlib import Path

from fastapi import Body, FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import serialize
from .config import controller_doc, parse_controller_doc
from .daemon import Daemon
from .errors import (BusError, ConfigError, ConflictError, DeviceError, DomainError,
                     HydradError, InvalidProfileError, NotCalibratedError,
                     OrderingError, ProfileParseError)

log = logging.getLogger(__name__)

_ERROR_MAP = [
    (ConflictError, 409, "conflict"),
    (NotCalibratedError, 409, "not_calibrated"),
    ((DomainError, ConfigError, InvalidProfileError, ProfileParseError, OrderingError),
     400, "bad_request"),
    ((DeviceError, BusError), 503, "device_error"),
]


def _error_response(exc: Exception) -> JSONResponse:
    for types, status, code in _ERROR_MAP:
        if isinstance(exc, types):
            return JSONResponse({"code": code, "message": str(exc)}, status_code=status)
    log.exception("internal error", exc_info=exc)
    return JSONResponse({"code": "internal", "message": str(exc)}, status_code=500)


def _require_number(doc: dict, key: str) -> float:
    value = doc.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise DomainError(f"{key} must be a number, got {value!r}")
    return float(value)


def create_app(daemon: Daemon) -> FastAPI:
    app = FastAPI(title="hydrad", docs_url=None, redoc_url=None, openapi_url=None)
    controller = daemon.controller

    @app.exception_handler(HydradError)
    async def _hydrad_error(request: Request, exc: HydradError):
        return _error_response(exc)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse({"code": "bad_request", "message": str(exc.errors()[:1])},
                            status_code=400)

    @app.exception_handler(Exception)
    async def _unhandled(request: Request, exc: Exception):
        return _error_response(exc)

    @app.get("/api/status")
    def get_status() -> JSONResponse:
        return JSONResponse(serialize.status_doc(controller.status))

    @app.post("/api/check")
    def post_check() -> JSONResponse:
        before = controller.status.last_reading
        status = controller.run_check()
        if status.last_reading is before:
            # The check ran but the read failed; the schedule already moved on.
            raise DeviceError(status.last_error or "moisture reading failed")
        return JSONResponse(serialize.reading_doc(status.last_reading))

    @app.post("/api/water")
    def post_water(payload: dict = Body(...)) -> JSONResponse:
        duration = _require_number(payload, "duration_s")
        session = controller.manual_water(duration)
        return JSONResponse(serialize.session_doc(session))

    @app.get("/api/config")
    def get_config() -> JSONResponse:
        return JSONResponse(controller_doc(controller.config))

    @app.put("/api/config")
    def put_config(payload: dict = Body(...)) -> JSONResponse:
        merged = parse_controller_doc(payload, defaults=controller.config)
        controller.update_config(merged)
        return JSONResponse(controller_doc(controller.config))

    @app.get("/api/history")
    def get_history(
        from_: str | None = Query(None, alias="from"),
        to: str | None = Query(None),
        kinds: str | None = Query(None),
    ) -> JSONResponse:
        from_ts = 0.0 if from_ is None else serialize.parse_iso(from_)
        to_ts = daemon.clock.now() if to is None else serialize.parse_iso(to)
        kind_set = None
        if kinds is not None:
            kind_set = {k.strip() for k in kinds.split(",") if k.strip()}
        records = daemon.history.query(from_ts, to_ts, kind_set)
        return JSONResponse([
            {"kind": r.kind, "ts": serialize.iso(r.ts), "payload": r.payload}
            for r in records
        ])

    @app.post("/api/calibrate")
    def post_calibrate(payload: dict = Body(...)) -> JSONResponse:
        phase = payload.get("phase")
        if not isinstance(phase, str):
            raise DomainError(f"phase must be 'dry' or 'wet', got {phase!r}")
        n_samples = payload.get("n_samples", daemon.config.calibration.default_samples)
        if isinstance(n_samples, bool) or not isinstance(n_samples, int):
            raise DomainError(f"n_samples must be an integer, got {n_samples!r}")
        result = controller.calibrate(phase, n_samples)
        profile = result["profile"]
        return JSONResponse({
            "phase": result["phase"],
            "raw_code": result["raw_code"],
            "complete": result["complete"],
            "profile": None if profile is None else serialize.profile_doc(profile),
        })

    @app.post("/api/alarm/clear")
    def post_alarm_clear() -> JSONResponse:
        status = controller.clear_alarm()
        return JSONResponse(serialize.status_doc(status))

    static_dir = daemon.config.server.static_dir
    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="dashboard")
    else:
        @app.get("/")
        def root() -> JSONResponse:
            return JSONResponse({"service": "hydrad",
                                 "dashboard": "not built; API at /api/*"})

    return app
