"""Time sources: a stepped counter for simulations and a wall clock for
real deployments. Time is integer units everywhere (seconds in real-time
mode) so both modes share comparison logic.
"""

from __future__ import annotations

import time


class ClockModeError(RuntimeError):
    """Raised when a mode-specific clock operation is called on the wrong kind."""


class SimulatedClock:
    """Integer counter advanced only by step(), one unit at a time.

    sleep_until() is non-blocking: it records the wake deadline and returns,
    because a blocking sleep inside a single-task step driver would deadlock.
    Callers poll now() each step instead.
    """

    def __init__(self, start: int = 0):
        self._counter = start
        self.wake_at = 0

    def now(self) -> int:
        return self._counter

    def step(self) -> None:
        self._counter += 1

    def sleep_until(self, t: int) -> None:
        if t > self.wake_at:
            self.wake_at = t


class SystemClock:
    """Wall clock reporting whole seconds since this process created it."""

    def __init__(self):
        self._t0 = time.monotonic()

    def now(self) -> int:
        return int(time.monotonic() - self._t0)

    def step(self) -> None:
        raise ClockModeError("step() is only valid on a SimulatedClock")

    def sleep_until(self, t: int) -> None:
        remaining = (self._t0 + t) - time.monotonic()
        if remaining > 0:
            time.sleep(remaining)
