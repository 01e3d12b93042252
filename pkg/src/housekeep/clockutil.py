"""Clock abstraction so sessions can run on wall time or a deterministic step clock."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from typing import Protocol

ISO_Z = "%Y-%m-%dT%H:%M:%SZ"

# Start instant shared by every scripted session; the fixture scripts are
# generated against this exact clock, so do not change it casually.
SCRIPTED_CLOCK_START = datetime(2025, 3, 1, 9, 0, 0, tzinfo=timezone.utc)


def to_iso_z(ts: datetime) -> str:
    """Render a UTC timestamp at second resolution, e.g. 2025-01-01T10:00:00Z."""
    return ts.astimezone(timezone.utc).replace(microsecond=0).strftime(ISO_Z)


def from_iso_z(text: str) -> datetime:
    return datetime.strptime(text, ISO_Z).replace(tzinfo=timezone.utc)


class Clock(Protocol):
    def now(self) -> datetime: ...


class RealClock:
    """Wall clock truncated to whole seconds (UTC)."""

    def now(self) -> datetime:
        return datetime.now(timezone.utc).replace(microsecond=0)


class FixedStepClock:
    """Deterministic clock: every reading advances by a fixed step.

    Used by scripted sessions and the fixture-script generator; identical call
    sequences therefore produce identical timestamps.
    """

    def __init__(self, start: datetime = SCRIPTED_CLOCK_START, step_seconds: int = 1):
        self._next = start.astimezone(timezone.utc).replace(microsecond=0)
        self._step = timedelta(seconds=step_seconds)

    def now(self) -> datetime:
        current = self._next
        self._next = current + self._step
        return current
