"""Append-only JSON-lines log of readings, waterings, transitions and errors.

One JSON object per line, so the log is human-inspectable and a crash can
only cost the torn final line. Size-based rotation; range queries scan the
files (fine at desk scale).
"""

from __future__ import annotations

import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path

from .errors import DomainError, OrderingError, StorageError

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
RECORD_KINDS = ("reading", "watering", "transition", "error")
DEFAULT_MAX_BYTES = 10 * 1024 * 1024
DEFAULT_KEEP_FILES = 5


@dataclass(frozen=True)
class HistoryRecord:
    kind: str
    ts: float
    payload: dict


class HistoryStore:
    """Single writer, any number of readers.

    Records are flushed line-at-a-time; readers only ever parse complete
    lines, so they never observe a partially written record.
    """

    def __init__(self, path: str | Path, max_bytes: int = DEFAULT_MAX_BYTES,
                 keep_files: int = DEFAULT_KEEP_FILES):
        if max_bytes <= 0:
            raise DomainError("max_bytes must be > 0")
        if keep_files < 1:
            raise DomainError("keep_files must be >= 1")
        self._path = Path(path)
        self._max_bytes = max_bytes
        self._keep_files = keep_files
        self._lock = threading.Lock()
        self._path.parent.mkdir(parents=True, exist_ok=True)
        self._recover_torn_tail()
        self._last_ts = self._find_last_ts()
        try:
            self._fh = open(self._path, "a", encoding="utf-8")
        except OSError as exc:
            raise StorageError(f"cannot open history log {self._path}: {exc}") from exc
        if self._fh.tell() == 0:
            self._write_header()

    # -- setup / recovery ---------------------------------------------------

    def _recover_torn_tail(self) -> None:
        """Move an unterminated final line to a quarantine file."""
        if not self._path.exists():
            return
        data = self._path.read_bytes()
        if not data or data.endswith(b"\n"):
            return
        cut = data.rfind(b"\n") + 1  # 0 when the whole file is one torn line
        tail = data[cut:]
        quarantine = self._path.with_suffix(self._path.suffix + ".quarantine")
        with open(quarantine, "ab") as q:
            q.write(tail + b"\n")
        with open(self._path, "r+b") as f:
            f.truncate(cut)
        log.warning("quarantined %d bytes of torn history tail to %s", len(tail), quarantine)

    def _find_last_ts(self) -> float | None:
        for path in reversed(self._all_files()):
            last = None
            try:
                with open(path, encoding="utf-8") as f:
                    for line in f:
                        rec = self._parse_line(line)
                        if rec is not None:
                            last = rec.ts
            except OSError:
                continue
            if last is not None:
                return last
        return None

    def _write_header(self) -> None:
        self._fh.write(json.dumps({"kind": "header", "version": SCHEMA_VERSION}) + "\n")
        self._fh.flush()

    # -- file management ----------------------------------------------------

    def _rotated_path(self, index: int) -> Path:
        return self._path.with_name(f"{self._path.name}.{index}")

    def _all_files(self) -> list[Path]:
        """Existing log files, oldest first."""
        paths = [self._rotated_path(i) for i in range(self._keep_files - 1, 0, -1)]
        paths.append(self._path)
        return [p for p in paths if p.exists()]

    def _rotate(self) -> None:
        self._fh.close()
        oldest = self._rotated_path(self._keep_files - 1)
        if oldest.exists():
            oldest.unlink()
        for i in range(self._keep_files - 2, 0, -1):
            src = self._rotated_path(i)
            if src.exists():
                src.rename(self._rotated_path(i + 1))
        if self._keep_files > 1:
            self._path.rename(self._rotated_path(1))
        else:
            self._path.unlink()
        self._fh = open(self._path, "a", encoding="utf-8")
        self._write_header()

    # -- record I/O ---------------------------------------------------------

    def append(self, kind: str, ts: float, payload: dict) -> None:
        """Durably append one record; visible to queries on return."""
        if kind not in RECORD_KINDS:
            raise DomainError(f"unknown record kind {kind!r}")
        line = json.dumps({"kind": kind, "ts": ts, "payload": payload},
                          separators=(",", ":"))
        with self._lock:
            if self._last_ts is not None and ts < self._last_ts:
                raise OrderingError(
                    f"record ts {ts} is older than last stored ts {self._last_ts}")
            try:
                if self._fh.tell() + len(line) + 1 > self._max_bytes:
                    self._rotate()
                self._fh.write(line + "\n")
                self._fh.flush()
            except OSError as exc:
                raise StorageError(f"history append failed: {exc}") from exc
            self._last_ts = ts

    @staticmethod
    def _parse_line(line: str) -> HistoryRecord | None:
        line = line.strip()
        if not line:
            return None
        try:
            doc = json.loads(line)
            if doc.get("kind") in RECORD_KINDS:
                return HistoryRecord(doc["kind"], float(doc["ts"]), doc["payload"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError):
            log.warning("skipping unparsable history line")
        return None  # header lines and corruption are both skipped

    def query(self, from_ts: float, to_ts: float,
              kinds: set[str] | None = None) -> list[HistoryRecord]:
        """Records with from_ts <= ts <= to_ts and kind in ``kinds``, in order."""
        if from_ts > to_ts:
            raise DomainError(f"query window inverted: from {from_ts} > to {to_ts}")
        if kinds is not None:
            bad = set(kinds) - set(RECORD_KINDS)
            if bad:
                raise DomainError(f"unknown record kinds: {sorted(bad)}")
        out: list[HistoryRecord] = []
        with self._lock:
            files = self._all_files()
        for path in files:
            try:
                with open(path, encoding="utf-8") as f:
                    for line in f:
                        rec = self._parse_line(line)
                        if rec is None:
                            continue
                        if rec.ts < from_ts or rec.ts > to_ts:
                            continue
                        if kinds is not None and rec.kind not in kinds:
                            continue
                        out.append(rec)
            except OSError as exc:
                raise StorageError(f"history read failed: {exc}") from exc
        return out

    @property
    def last_ts(self) -> float | None:
        return self._last_ts

    def close(self) -> None:
        with self._lock:
            if not self._fh.closed:
                self._fh.close()
