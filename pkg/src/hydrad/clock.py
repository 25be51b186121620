"""Clock abstraction so the control loop runs on virtual or wall time.

The controller never calls ``time`` directly: tests drive a ``VirtualClock``
step by step, the daemon runs a ``ScaledClock`` (scale 1.0 = wall clock,
larger scales accelerate demos).
"""

from __future__ import annotations

import threading
import time
from typing import Protocol


class Clock(Protocol):
    def now(self) -> float:
        """Current time in seconds (epoch-style)."""
        ...

    def sleep(self, seconds: float) -> None:
        ...

    def sleep_until(self, target: float) -> None:
        ...


class VirtualClock:
    """Deterministic clock: time advances only when told to."""

    def __init__(self, start: float = 0.0):
        self._t = float(start)

    def now(self) -> float:
        return self._t

    def sleep(self, seconds: float) -> None:
        if seconds > 0:
            self._t += seconds

    def sleep_until(self, target: float) -> None:
        if target > self._t:
            self._t = target

    def advance(self, seconds: float) -> float:
        self.sleep(seconds)
        return self._t


class ScaledClock:
    """Wall-clock time, optionally accelerated by a constant factor.

    ``stop_event`` makes sleeps interruptible so the daemon can shut down
    mid-watering without waiting a full pump cycle out.
    """

    def __init__(self, scale: float = 1.0, origin: float | None = None,
                 stop_event: threading.Event | None = None):
        if scale <= 0:
            raise ValueError("scale must be > 0")
        self.scale = float(scale)
        self._origin = time.time() if origin is None else float(origin)
        self._wall0 = time.monotonic()
        self._stop = stop_event

    def now(self) -> float:
        return self._origin + (time.monotonic() - self._wall0) * self.scale

    def sleep(self, seconds: float) -> None:
        if seconds <= 0:
            return
        wall = seconds / self.scale
        if self._stop is not None:
            self._stop.wait(wall)
        else:
            time.sleep(wall)

    def sleep_until(self, target: float) -> None:
        self.sleep(target - self.now())
