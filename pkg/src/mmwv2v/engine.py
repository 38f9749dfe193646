"""Deterministic discrete-event engine with an integer-nanosecond clock.

All simulation time is kept in integer nanoseconds so that repeated runs
produce bit-identical schedules on any platform.  Events firing at the same
instant are dispatched in the order they were scheduled (FIFO tie-break via a
monotonically increasing sequence number).
"""

from __future__ import annotations

import heapq
from typing import Callable

# Time unit constants, all integer nanoseconds.
US = 1_000
MS = 1_000_000
SEC = 1_000_000_000
# 802.11 time unit: 1024 microseconds.
TU = 1024 * US


class SchedulingError(Exception):
    """Raised when an event is scheduled before the current simulation time."""


class Engine:
    """Minimal event loop: schedule callables at absolute times, run to a horizon."""

    def __init__(self) -> None:
        self.now: int = 0
        self._heap: list[tuple[int, int, int]] = []
        self._seq: int = 0
        self._handlers: dict[int, Callable[[], None]] = {}

    def schedule(self, fire_at: int, handler: Callable[[], None]) -> int:
        """Schedule ``handler`` to run at absolute time ``fire_at`` (ns).

        Returns an event id usable with :meth:`cancel`.  Scheduling in the past
        is a programming error and raises :class:`SchedulingError`.
        """
        if fire_at < self.now:
            raise SchedulingError(
                f"cannot schedule event at t={fire_at} ns before now={self.now} ns"
            )
        eid = self._seq
        self._seq += 1
        self._handlers[eid] = handler
        heapq.heappush(self._heap, (fire_at, eid, eid))
        return eid

    def cancel(self, event_id: int) -> bool:
        """Cancel a pending event.  Returns False if it already ran or was cancelled."""
        return self._handlers.pop(event_id, None) is not None

    def run_until(self, t_end: int) -> int:
        """Dispatch all events with fire time <= ``t_end``; returns events run.

        The clock is left at ``t_end`` (or at the last event time if that is
        later, which cannot happen by construction).
        """
        n_run = 0
        heap = self._heap
        handlers = self._handlers
        while heap and heap[0][0] <= t_end:
            fire_at, _, eid = heapq.heappop(heap)
            handler = handlers.pop(eid, None)
            if handler is None:
                continue  # cancelled
            self.now = fire_at
            handler()
            n_run += 1
        if t_end > self.now:
            self.now = t_end
        return n_run

    def pending(self) -> int:
        """Number of events still scheduled (cancelled tombstones excluded)."""
        return len(self._handlers)
