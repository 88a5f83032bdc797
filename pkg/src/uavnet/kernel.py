"""Discrete-event kernel with integer-nanosecond time.

Events are kept in a binary heap keyed by ``(fire_at, seq)``; ``seq`` is a
global insertion counter so events sharing a timestamp run in the order they
were scheduled.
"""

from __future__ import annotations

import heapq
from typing import Any, Callable

NS_PER_US = 1_000
NS_PER_MS = 1_000_000
NS_PER_S = 1_000_000_000


def seconds(t: float) -> int:
    """Convert seconds to integer nanoseconds (round half to even)."""
    return int(round(t * NS_PER_S))


def micros(t: float) -> int:
    return int(round(t * NS_PER_US))


def to_seconds(ticks: int) -> float:
    return ticks / NS_PER_S


class CausalityError(ValueError):
    """Raised when an event is scheduled before the current clock."""


class SimulationFault(RuntimeError):
    """A callback raised while the kernel was running.

    The offending event is available as ``event`` and the original exception
    as ``__cause__``.
    """

    def __init__(self, event: "EventHandle", exc: BaseException):
        name = getattr(event.action, "__qualname__", repr(event.action))
        super().__init__(f"event {name} at t={event.fire_at} ns (seq {event.seq}) failed: {exc!r}")
        self.event = event


class EventHandle:
    __slots__ = ("fire_at", "seq", "action", "args", "cancelled", "fired")

    def __init__(self, fire_at: int, seq: int, action: Callable, args: tuple):
        self.fire_at = fire_at
        self.seq = seq
        self.action = action
        self.args = args
        self.cancelled = False
        self.fired = False

    @property
    def pending(self) -> bool:
        return not (self.cancelled or self.fired)

    def __repr__(self) -> str:
        state = "cancelled" if self.cancelled else "fired" if self.fired else "pending"
        return f"<EventHandle t={self.fire_at} seq={self.seq} {state}>"


class Kernel:
    """Future-event list plus simulation clock.

    ``record=True`` keeps ``(fire_at, seq, action name)`` for every executed
    event in ``self.log``.
    """

    def __init__(self, record: bool = False):
        self._heap: list[tuple[int, int, EventHandle]] = []
        self._now = 0
        self._seq = 0
        self.scheduled = 0
        self.executed = 0
        self.cancelled = 0
        self.log: list[tuple[int, int, str]] | None = [] if record else None

    def now(self) -> int:
        return self._now

    def schedule(self, action: Callable, at: int, *args: Any) -> EventHandle:
        if at < self._now:
            raise CausalityError(f"cannot schedule at {at} ns, clock is {self._now} ns")
        h = EventHandle(at, self._seq, action, args)
        self._seq += 1
        self.scheduled += 1
        heapq.heappush(self._heap, (at, h.seq, h))
        return h

    def schedule_in(self, action: Callable, delay: int, *args: Any) -> EventHandle:
        return self.schedule(action, self._now + delay, *args)

    def cancel(self, h: EventHandle | None) -> bool:
        if h is None or h.cancelled or h.fired:
            return False
        h.cancelled = True
        self.cancelled += 1
        return True

    @property
    def pending(self) -> int:
        return sum(1 for _, _, h in self._heap if not h.cancelled)

    def peek(self) -> int | None:
        """Timestamp of the next live event, or None."""
        heap = self._heap
        while heap and heap[0][2].cancelled:
            heapq.heappop(heap)
        return heap[0][0] if heap else None

    def run_until(self, t_end: int) -> int:
        if t_end < self._now:
            raise CausalityError(f"run_until({t_end}) is before the clock ({self._now})")
        heap = self._heap
        log = self.log
        pop = heapq.heappop
        while heap and heap[0][0] <= t_end:
            t, _, h = pop(heap)
            if h.cancelled:
                continue
            self._now = t
            h.fired = True
            self.executed += 1
            if log is not None:
                log.append((t, h.seq, getattr(h.action, "__qualname__", repr(h.action))))
            try:
                h.action(*h.args)
            except SimulationFault:
                raise
            except Exception as exc:
                raise SimulationFault(h, exc) from exc
        self._now = t_end
        return t_end
