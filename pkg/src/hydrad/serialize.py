"""Wire formats: ISO-8601 UTC timestamps, JSON documents for API and history.

Percent values are reported at 0.1% resolution; internal decisions always
use the unrounded values.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import TYPE_CHECKING

from .errors import DomainError

if TYPE_CHECKING:
    from .calibration import CalibrationProfile
    from .controller import MoistureReading, StatusSnapshot, WateringEvent, WateringSession


def iso(ts: float) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def parse_iso(text: str) -> float:
    """ISO-8601 string to epoch seconds; naive times are taken as UTC."""
    try:
        dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    except (ValueError, AttributeError, TypeError) as exc:
        raise DomainError(f"not an ISO-8601 timestamp: {text!r}") from exc
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()


def percent_out(pct: float | None) -> float | None:
    return None if pct is None else round(pct, 1)


def reading_doc(reading: "MoistureReading") -> dict:
    return {
        "code": reading.code,
        "voltage": round(reading.voltage, 6),
        "percent": percent_out(reading.percent),
        "at": iso(reading.at),
    }


def event_doc(event: "WateringEvent", trigger: str, cycle: int) -> dict:
    return {
        "trigger": trigger,
        "cycle": cycle,
        "duration_s": event.duration_s,
        "volume_l": event.volume_l,
        "moisture_before": percent_out(event.moisture_before),
        "moisture_after": percent_out(event.moisture_after),
        "at": iso(event.at),
    }


def session_doc(session: "WateringSession") -> dict:
    return {
        "trigger": session.trigger,
        "started_at": iso(session.started_at),
        "cycles": [event_doc(e, session.trigger, i + 1)
                   for i, e in enumerate(session.cycles)],
    }


def profile_doc(profile: "CalibrationProfile") -> dict:
    return {
        "raw_dry": profile.raw_dry,
        "raw_wet": profile.raw_wet,
        "created_at": iso(profile.created_at),
        "label": profile.label,
    }


def status_doc(status: "StatusSnapshot") -> dict:
    return {
        "state": status.state.value,
        "calibrated": status.calibrated,
        "last_reading": None if status.last_reading is None else reading_doc(status.last_reading),
        "next_check_at": None if status.next_check_at is None else iso(status.next_check_at),
        "active_session": None if status.active_session is None else session_doc(status.active_session),
        "alarm_reason": status.alarm_reason,
        "last_error": status.last_error,
        "server_time": iso(status.at),
    }
