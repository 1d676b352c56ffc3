"""Exact interval and region arithmetic over an ordered group.

A region is a sorted tuple of disjoint, non-adjacent intervals.  Endpoints
are group elements with open/closed flags; ``None`` bounds stand for the
infinities.  These operations are the decision core behind monoid closure,
atom extraction, and terminality tests, so every endpoint comparison is
exact.
"""

from __future__ import annotations

from dataclasses import dataclass

from .groups import Group, GroupElement, lattice_point_between


class IntervalError(ValueError):
    pass


@dataclass(frozen=True)
class Interval:
    """Interval with optional infinite bounds.  ``lo=None`` means -inf."""

    lo: GroupElement | None
    hi: GroupElement | None
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self) -> None:
        if self.lo is None and self.lo_closed:
            raise IntervalError("-inf endpoint cannot be closed")
        if self.hi is None and self.hi_closed:
            raise IntervalError("+inf endpoint cannot be closed")
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi:
                raise IntervalError(f"empty interval [{self.lo}, {self.hi}]")
            if self.lo == self.hi and not (self.lo_closed and self.hi_closed):
                raise IntervalError("degenerate interval must be closed on both sides")

    def contains(self, x: GroupElement) -> bool:
        if self.lo is not None:
            if x < self.lo or (x == self.lo and not self.lo_closed):
                return False
        if self.hi is not None:
            if x > self.hi or (x == self.hi and not self.hi_closed):
                return False
        return True

    def is_degenerate(self) -> bool:
        return self.lo is not None and self.hi is not None and self.lo == self.hi

    def add(self, other: "Interval") -> "Interval":
        """Minkowski sum; the sum of [a,b] and [c,d] is [a+c, b+d]."""
        lo = None if self.lo is None or other.lo is None else self.lo + other.lo
        hi = None if self.hi is None or other.hi is None else self.hi + other.hi
        return Interval(
            lo,
            hi,
            lo_closed=self.lo_closed and other.lo_closed and lo is not None,
            hi_closed=self.hi_closed and other.hi_closed and hi is not None,
        )

    def negate(self) -> "Interval":
        lo = None if self.hi is None else -self.hi
        hi = None if self.lo is None else -self.lo
        return Interval(lo, hi, lo_closed=self.hi_closed, hi_closed=self.lo_closed)

    def shift(self, delta: GroupElement) -> "Interval":
        lo = None if self.lo is None else self.lo + delta
        hi = None if self.hi is None else self.hi + delta
        return Interval(lo, hi, self.lo_closed, self.hi_closed)

    def intersect(self, other: "Interval") -> "Interval | None":
        lo, lo_closed = self.lo, self.lo_closed
        if other.lo is not None and (lo is None or other.lo > lo):
            lo, lo_closed = other.lo, other.lo_closed
        elif other.lo is not None and lo is not None and other.lo == lo:
            lo_closed = lo_closed and other.lo_closed
        hi, hi_closed = self.hi, self.hi_closed
        if other.hi is not None and (hi is None or other.hi < hi):
            hi, hi_closed = other.hi, other.hi_closed
        elif other.hi is not None and hi is not None and other.hi == hi:
            hi_closed = hi_closed and other.hi_closed
        if lo is not None and hi is not None:
            if lo > hi or (lo == hi and not (lo_closed and hi_closed)):
                return None
        return Interval(lo, hi, lo_closed, hi_closed)

    def lattice_point(self, group: Group) -> GroupElement | None:
        return lattice_point_between(
            group, self.lo, self.hi,
            lo_strict=not self.lo_closed, hi_strict=not self.hi_closed,
        )

    def __str__(self) -> str:
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        lo = str(self.lo) if self.lo is not None else "-inf"
        hi = str(self.hi) if self.hi is not None else "inf"
        return f"{left}{lo},{hi}{right}"


Region = tuple[Interval, ...]


def _lo_sort_key(iv: Interval):
    # -inf sorts first; at equal lo a closed endpoint extends further left
    return (iv.lo is not None, iv.lo, not iv.lo_closed)


def _mergeable(a: Interval, b: Interval) -> bool:
    """True when a and b overlap or touch (sorted so a.lo <= b.lo)."""
    if a.hi is None or b.lo is None:
        return True
    if b.lo < a.hi:
        return True
    if b.lo == a.hi:
        return a.hi_closed or b.lo_closed
    return False


def region(*intervals: Interval) -> Region:
    """Normalize intervals into a sorted, disjoint, merged region."""
    items = [iv for iv in intervals if iv is not None]
    if not items:
        return ()
    try:
        items.sort(key=_lo_sort_key)
    except TypeError:  # GroupElement sort against None is precluded by key
        raise
    out = [items[0]]
    for iv in items[1:]:
        last = out[-1]
        if _mergeable(last, iv):
            hi, hi_closed = last.hi, last.hi_closed
            if last.hi is not None and (iv.hi is None or iv.hi > last.hi):
                hi, hi_closed = iv.hi, iv.hi_closed
            elif last.hi is not None and iv.hi is not None and iv.hi == last.hi:
                hi_closed = hi_closed or iv.hi_closed
            out[-1] = Interval(last.lo, hi, last.lo_closed, hi_closed)
        else:
            out.append(iv)
    return tuple(out)


def region_union(r1: Region, r2: Region) -> Region:
    return region(*(list(r1) + list(r2)))


def region_intersect(r1: Region, r2: Region) -> Region:
    pieces = []
    for a in r1:
        for b in r2:
            c = a.intersect(b)
            if c is not None:
                pieces.append(c)
    return region(*pieces)


def region_complement(r: Region) -> Region:
    """Complement within the whole line."""
    if not r:
        return (Interval(None, None, False, False),)
    pieces = []
    first = r[0]
    if first.lo is not None:
        pieces.append(Interval(None, first.lo, False, not first.lo_closed))
    for a, b in zip(r, r[1:]):
        # the sorted merged region guarantees a genuine gap between a and b
        pieces.append(Interval(a.hi, b.lo, not a.hi_closed, not b.lo_closed))
    last = r[-1]
    if last.hi is not None:
        pieces.append(Interval(last.hi, None, not last.hi_closed, False))
    return region(*pieces)


def region_subtract(r1: Region, r2: Region) -> Region:
    return region_intersect(r1, region_complement(r2))


def region_sum(r1: Region, r2: Region) -> Region:
    """Minkowski sum of two regions (union of pairwise interval sums)."""
    pieces = [a.add(b) for a in r1 for b in r2]
    return region(*pieces)


def region_contains(r: Region, x: GroupElement) -> bool:
    return any(iv.contains(x) for iv in r)


def region_is_empty(r: Region) -> bool:
    return len(r) == 0


def region_lattice_point(group: Group, r: Region) -> GroupElement | None:
    """Some lattice point of the region, scanning pieces in order."""
    for iv in r:
        p = iv.lattice_point(group)
        if p is not None:
            return p
    return None


def region_scale(r: Region, q) -> Region:
    """Image of a region under multiplication by a positive rational."""
    pieces = []
    for iv in r:
        lo = None if iv.lo is None else iv.lo.scale(q)
        hi = None if iv.hi is None else iv.hi.scale(q)
        pieces.append(Interval(lo, hi, iv.lo_closed, iv.hi_closed))
    return region(*pieces)
