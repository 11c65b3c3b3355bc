"""Fixed-time signal timeline with a deterministic phase-extension disturbance.

The realized timeline always carries the extension; observations reflect it
only from ``announce_at`` onward, which is what turns the extension into an
environmental disturbance for the replanning loop.
"""

from __future__ import annotations

import dataclasses
import enum
from dataclasses import dataclass

from .domain import ConfigError, TIME_EPS


class Phase(enum.Enum):
    RED = "red"
    YELLOW = "yellow"
    GREEN = "green"


@dataclass(frozen=True)
class SignalTimeline:
    """Cyclic red -> yellow -> green timing with one optionally extended cycle.

    A red extension of ``extension_s`` seconds is inserted at the end of the
    red phase of cycle ``extension_applies_from_cycle``, shifting everything
    after it; a green extension appends to that cycle's green instead. The
    extension becomes visible to observers at ``announce_at``.
    """

    red_s: float = 34.8
    yellow_s: float = 3.2
    green_s: float = 55.1
    extension_phase: str = "red"
    extension_s: float = 0.0
    announce_at: float = 20.0
    extension_applies_from_cycle: int = 0

    def check(self) -> None:
        for name in ("red_s", "yellow_s", "green_s"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"signal.{name} must be positive")
        if self.extension_s < 0:
            raise ConfigError("signal.extension_s must be >= 0")
        if self.extension_phase not in ("red", "green", "none"):
            raise ConfigError("signal.extension_phase must be one of red, green, none")
        if self.extension_applies_from_cycle < 0:
            raise ConfigError("signal.extension_applies_from_cycle must be >= 0")

    @property
    def cycle_s(self) -> float:
        return self.red_s + self.yellow_s + self.green_s

    def without_extension(self) -> "SignalTimeline":
        return dataclasses.replace(self, extension_s=0.0)

    def _effective_extension(self) -> float:
        if self.extension_phase == "none":
            return 0.0
        return self.extension_s

    def cycle_windows(self, cycle: int):
        """(red_start, yellow_start, green_start, cycle_end) of one cycle."""
        base = self.cycle_s
        ext = self._effective_extension()
        c0 = self.extension_applies_from_cycle
        if ext == 0.0 or cycle < c0:
            start = cycle * base
            return (start, start + self.red_s, start + self.red_s + self.yellow_s, start + base)
        if cycle == c0:
            start = c0 * base
            if self.extension_phase == "red":
                red_end = start + self.red_s + ext
                return (start, red_end, red_end + self.yellow_s, start + base + ext)
            red_end = start + self.red_s
            return (start, red_end, red_end + self.yellow_s, start + base + ext)
        start = cycle * base + ext
        return (start, start + self.red_s, start + self.red_s + self.yellow_s, start + base + ext)


@dataclass(frozen=True)
class SignalObservation:
    """What a planner can know about the signal at time t."""

    t: float
    current_phase: Phase
    next_green_start: float
    next_green_end: float


def _cycle_index(timeline: SignalTimeline, t: float) -> int:
    base = timeline.cycle_s
    ext = timeline._effective_extension()
    c0 = timeline.extension_applies_from_cycle
    if ext == 0.0 or t < c0 * base - TIME_EPS:
        c = int(t // base)
    elif t < c0 * base + base + ext - TIME_EPS:
        c = c0
    else:
        c = c0 + 1 + int((t - (c0 * base + base + ext)) // base)
    # push boundary samples into the next cycle
    while t >= timeline.cycle_windows(c)[3] - TIME_EPS:
        c += 1
    return max(c, 0)


def phase_at(timeline: SignalTimeline, t: float) -> Phase:
    """Phase of the realized (possibly extended) timeline at time t >= 0."""
    if t < 0:
        raise ValueError("t must be >= 0")
    c = _cycle_index(timeline, t)
    start, yellow_start, green_start, _end = timeline.cycle_windows(c)
    if t < yellow_start - TIME_EPS:
        return Phase.RED
    if t < green_start - TIME_EPS:
        return Phase.YELLOW
    return Phase.GREEN


def next_green_window(timeline: SignalTimeline, t: float):
    """Earliest green interval [start, end) with end > t.

    A query inside a green phase returns the enclosing window.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    c = _cycle_index(timeline, t)
    while True:
        _start, _yellow, green_start, cycle_end = timeline.cycle_windows(c)
        if cycle_end > t + TIME_EPS:
            return (green_start, cycle_end)
        c += 1


def observe(timeline: SignalTimeline, t: float) -> SignalObservation:
    """Observation at time t: actual phase plus the known green schedule.

    The current phase comes from the realized timeline (the light itself is
    visible); the schedule reflects the extension only once announced.
    """
    known = timeline if t >= timeline.announce_at - TIME_EPS else timeline.without_extension()
    start, end = next_green_window(known, t)
    return SignalObservation(
        t=t,
        current_phase=phase_at(timeline, t),
        next_green_start=start,
        next_green_end=end,
    )
