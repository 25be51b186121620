"""Two-point moisture calibration: dry and saturated reference codes.

The dry reading maps to 0%, the saturated reading to 100%, linear in
between and clamped outside (field readings can exceed the references).
Profiles persist as small JSON documents, written atomically.
"""

from __future__ import annotations

import json
import os
import statistics
import time
from dataclasses import dataclass
from pathlib import Path

from .devices import ADC_CODE_MAX, ADC_CODE_MIN, AdcDriver
from .errors import DomainError, InvalidProfileError, ProfileParseError

PROFILE_SCHEMA_VERSION = 1
DEFAULT_SAMPLES = 9


@dataclass(frozen=True)
class CalibrationProfile:
    """Raw ADC codes recorded at the 0% (dry) and 100% (saturated) references."""

    raw_dry: int
    raw_wet: int
    created_at: float = 0.0
    label: str = ""

    def __post_init__(self):
        for name, value in (("raw_dry", self.raw_dry), ("raw_wet", self.raw_wet)):
            if not ADC_CODE_MIN <= value <= ADC_CODE_MAX:
                raise InvalidProfileError(f"{name}={value} outside signed 16-bit range")
        if self.raw_dry <= self.raw_wet:
            raise InvalidProfileError(
                f"raw_dry ({self.raw_dry}) must be strictly above raw_wet ({self.raw_wet})")


def to_percent(raw: int, profile: CalibrationProfile) -> float:
    """Map a raw ADC code to moisture percent, clamped to [0, 100]."""
    span = profile.raw_dry - profile.raw_wet
    pct = 100.0 * (profile.raw_dry - raw) / span
    return min(100.0, max(0.0, pct))


def median_code(samples: list[int]) -> int:
    """Median of raw codes; resists outlier noise during reference capture."""
    if not samples:
        raise DomainError("need at least one sample")
    return round(statistics.median(samples))


def capture_reference(adc: AdcDriver, n_samples: int = DEFAULT_SAMPLES) -> int:
    """Take ``n_samples`` single-shot reads and return their median code.

    The caller is responsible for the probe being in the reference condition
    (dry or saturated soil) and for holding the device-access queue.
    """
    if n_samples < 1:
        raise DomainError(f"n_samples must be >= 1, got {n_samples}")
    codes = [adc.read_single_shot().code for _ in range(n_samples)]
    return median_code(codes)


def save_profile(profile: CalibrationProfile, path: str | Path) -> None:
    """Write the profile as JSON via a temp file + rename (atomic replace)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    doc = {
        "version": PROFILE_SCHEMA_VERSION,
        "raw_dry": profile.raw_dry,
        "raw_wet": profile.raw_wet,
        "created_at": profile.created_at,
        "label": profile.label,
    }
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_profile(path: str | Path) -> CalibrationProfile:
    """Read a profile back; parse errors name the offending field."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProfileParseError("document", f"not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ProfileParseError("document", "expected a JSON object")
    if doc.get("version") != PROFILE_SCHEMA_VERSION:
        raise ProfileParseError("version", f"unsupported version {doc.get('version')!r}")
    fields = {}
    for name, kind in (("raw_dry", int), ("raw_wet", int),
                       ("created_at", (int, float)), ("label", str)):
        if name not in doc:
            raise ProfileParseError(name, "missing")
        if not isinstance(doc[name], kind) or isinstance(doc[name], bool):
            raise ProfileParseError(name, f"expected {kind}, got {type(doc[name]).__name__}")
        fields[name] = doc[name]
    fields["created_at"] = float(fields["created_at"])
    return CalibrationProfile(**fields)


# -- partial capture state ----------------------------------------------------
# The dry and wet phases may arrive in separate CLI invocations or API calls;
# single captured references wait in a sidecar until the pair completes.

def _partial_path(profile_path: str | Path) -> Path:
    p = Path(profile_path)
    return p.with_suffix(p.suffix + ".partial")


def load_partial(profile_path: str | Path) -> dict[str, int]:
    p = _partial_path(profile_path)
    if not p.exists():
        return {}
    try:
        doc = json.loads(p.read_text(encoding="utf-8"))
        return {k: int(v) for k, v in doc.items() if k in ("dry", "wet")}
    except (json.JSONDecodeError, TypeError, ValueError, AttributeError):
        return {}  # a corrupt sidecar just restarts the wizard


def save_partial(profile_path: str | Path, refs: dict[str, int]) -> None:
    p = _partial_path(profile_path)
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_suffix(p.suffix + ".tmp")
    tmp.write_text(json.dumps(refs) + "\n", encoding="utf-8")
    os.replace(tmp, p)


def clear_partial(profile_path: str | Path) -> None:
    try:
        _partial_path(profile_path).unlink()
    except FileNotFoundError:
        pass


def complete_profile(refs: dict[str, int], created_at: float,
                     label: str = "") -> CalibrationProfile:
    """Build a profile once both references exist; invalid pairs raise."""
    return CalibrationProfile(raw_dry=refs["dry"], raw_wet=refs["wet"],
                              created_at=created_at, label=label)
