"""Closed intervals on the line and exact max-stabbing.

The solver reduces each cube of rotation axes to a family of closed theta
intervals, one small set per correspondence, and asks: which single theta
lies in the most intervals? That is classic interval stabbing, solved
exactly by an endpoint sweep. Intervals sharing only an endpoint both count
at that endpoint, so opens are processed before closes at equal coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


@dataclass(frozen=True, order=True)
class Interval:
    """Closed interval [lo, hi]; degenerate points (lo == hi) allowed."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (self.lo <= self.hi):
            raise ValueError(f"interval bounds out of order: [{self.lo}, {self.hi}]")

    def contains(self, x: float) -> bool:
        return self.lo <= x <= self.hi

    @property
    def length(self) -> float:
        return self.hi - self.lo


def normalize(intervals: Iterable[Interval]) -> tuple[Interval, ...]:
    """Sort and merge overlapping or touching closed intervals."""
    items = sorted(intervals)
    out: list[Interval] = []
    for iv in items:
        if out and iv.lo <= out[-1].hi:
            if iv.hi > out[-1].hi:
                out[-1] = Interval(out[-1].lo, iv.hi)
        else:
            out.append(iv)
    return tuple(out)


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint, sorted union of closed intervals."""

    intervals: tuple[Interval, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "intervals", normalize(self.intervals))

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[float, float]]) -> "IntervalSet":
        return cls(tuple(Interval(lo, hi) for lo, hi in pairs))

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self) -> int:
        return len(self.intervals)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def total_length(self) -> float:
        return sum(iv.length for iv in self.intervals)

    def contains(self, x: float) -> bool:
        # Sets stay tiny here (a handful of pieces); linear scan is fine.
        return any(iv.contains(x) for iv in self.intervals)

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out: list[Interval] = []
        i = j = 0
        a, b = self.intervals, other.intervals
        while i < len(a) and j < len(b):
            lo = max(a[i].lo, b[j].lo)
            hi = min(a[i].hi, b[j].hi)
            if lo <= hi:
                out.append(Interval(lo, hi))
            if a[i].hi < b[j].hi:
                i += 1
            else:
                j += 1
        return IntervalSet(tuple(out))


@dataclass(frozen=True)
class StabResult:
    """Best stab count, a witness point achieving it, and the first maximal region."""

    count: int
    witness: Optional[float]
    support: Optional[Interval]


def stab_max(intervals: Sequence[Interval]) -> StabResult:
    """Point hit by the most closed intervals, by endpoint sweep.

    Events are (coordinate, +1 open / -1 close) sorted with opens first at
    equal coordinates, so a shared endpoint counts both sides. Returns the
    leftmost maximal region; the witness is its midpoint.
    """
    if not intervals:
        return StabResult(0, None, None)
    # (coord, kind): kind 0 opens before kind 1 closes at the same coord.
    events = sorted(
        [(iv.lo, 0) for iv in intervals] + [(iv.hi, 1) for iv in intervals]
    )
    best = 0
    running = 0
    for _, kind in events:
        if kind == 0:
            running += 1
            if running > best:
                best = running
        else:
            running -= 1
    # Second pass: locate the first region where the count reaches best.
    running = 0
    start = None
    idx = 0
    for i, (x, kind) in enumerate(events):
        if kind == 0:
            running += 1
            if running == best:
                start = x
                idx = i
                break
        else:
            running -= 1
    assert start is not None
    # The next event is necessarily a close (another open would push the
    # count past the verified maximum), and closed intervals keep the count
    # at best through its coordinate: the first maximal region.
    end = events[idx + 1][0]
    support = Interval(start, end)
    return StabResult(best, 0.5 * (start + end), support)
