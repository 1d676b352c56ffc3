"""Gap monoids: {0} union a finite set of intervals inside an ordered group.

The module decides the structural hypotheses used downstream (closure
under addition, being bounded away from zero, integral terminality,
density of the ambient group) and computes monoid-level factorization
data: the atom region, length sets in closed form for the one-gap
monoid, and a brute-force length-set oracle on rational grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
import re

from .groups import Group, GroupElement
from .intervals import (
    Interval,
    Region,
    region,
    region_contains,
    region_intersect,
    region_is_empty,
    region_lattice_point,
    region_subtract,
    region_sum,
)


class MonoidError(ValueError):
    pass


class NotClosedError(MonoidError):
    """The interval union is not closed under addition."""


class GridMismatchError(MonoidError):
    """A value does not lie on the requested enumeration grid."""


class EnumerationTruncated(RuntimeError):
    """The brute-force oracle hit its work cap before finishing."""


@dataclass(frozen=True)
class MonoidSpec:
    """{0} union intervals, intersected with the group lattice.

    Intervals must be positive, disjoint, sorted, and the last one
    unbounded above.  Closure under addition is checked by the ``make``
    factory; use ``check_closure`` for a non-raising report.
    """

    group: Group
    intervals: tuple[Interval, ...]

    def __post_init__(self) -> None:
        if not self.intervals:
            raise MonoidError("a gap monoid needs at least one interval")
        for iv in self.intervals:
            if iv.lo is None or iv.lo <= self.group.zero():
                raise MonoidError(f"interval {iv} must have a positive left endpoint")
        if self.intervals[-1].hi is not None:
            raise MonoidError("the last interval must be unbounded above")
        for iv in self.intervals[:-1]:
            if iv.hi is None:
                raise MonoidError("only the last interval may be unbounded")
        r = region(*self.intervals)
        if r != self.intervals:
            raise MonoidError("intervals must be sorted, disjoint, and merged")

    @staticmethod
    def make(group: Group, intervals, check: bool = True) -> "MonoidSpec":
        spec = MonoidSpec(group, region(*intervals))
        if check:
            report = check_closure(spec)
            if not report.closed:
                raise NotClosedError(
                    f"not closed under addition: witness {report.witness_text()}"
                )
        return spec

    # -- membership -----------------------------------------------------

    @property
    def positive_region(self) -> Region:
        return self.intervals

    def contains(self, x: GroupElement) -> bool:
        """Membership in the monoid: zero, or in an interval and in the lattice."""
        if x.group != self.group:
            raise MonoidError(f"element group {x.group} does not match {self.group}")
        if x.is_zero():
            return True
        return x.in_lattice() and region_contains(self.intervals, x)

    def covers_value(self, x: GroupElement) -> bool:
        """Interval-level membership, ignoring the lattice (zero counts)."""
        return x.is_zero() or region_contains(self.intervals, x)

    def __str__(self) -> str:
        parts = " u ".join(str(iv) for iv in self.intervals)
        return f"{self.group}: 0 u {parts}"


# -- parsing ---------------------------------------------------------------

_INTERVAL_RE = re.compile(r"([\[(])([^,]+),([^\])]+)([\])])")


def parse_monoid(text: str, check: bool = True) -> MonoidSpec:
    """Parse the spec mini-language, e.g. ``"Q: 0 u [2,3] u [4,inf)"``."""
    try:
        group_part, rest = text.split(":", 1)
    except ValueError:
        raise MonoidError(f"missing group prefix in {text!r}") from None
    group = Group.parse(group_part)
    chunks = [c.strip() for c in rest.split(" u ")]
    if not chunks or chunks[0].strip() != "0":
        raise MonoidError("monoid description must start with the lone element 0")
    intervals = []
    for chunk in chunks[1:]:
        m = _INTERVAL_RE.fullmatch(chunk.strip())
        if not m:
            raise MonoidError(f"cannot parse interval {chunk!r}")
        lbr, lo_s, hi_s, rbr = m.groups()
        lo = group.parse_element(lo_s)
        hi_s = hi_s.strip()
        hi = None if hi_s in ("inf", "+inf") else group.parse_element(hi_s)
        intervals.append(
            Interval(lo, hi, lo_closed=(lbr == "["), hi_closed=(rbr == "]"))
        )
    return MonoidSpec.make(group, intervals, check=check)


# -- closure ----------------------------------------------------------------


@dataclass(frozen=True)
class ClosureReport:
    closed: bool
    witness: tuple[GroupElement, GroupElement] | None = None
    uncovered: Region = ()

    def witness_text(self) -> str:
        if self.witness is None:
            return "(no lattice witness found)"
        x, y = self.witness
        return f"{x} + {y} = {x + y}"


def check_closure(spec: MonoidSpec) -> ClosureReport:
    """Decide (M' + M') subset M' for M' the interval union, by exact sums.

    On failure a concrete lattice witness pair (x, y) with x + y outside
    the union is searched for; for dense groups one exists unless the
    uncovered set is a single non-lattice point.
    """
    pos = spec.positive_region
    sums = region_sum(pos, pos)
    uncovered = region_subtract(sums, pos)
    if region_is_empty(uncovered):
        return ClosureReport(True)
    witness = _closure_witness(spec, uncovered)
    return ClosureReport(False, witness, uncovered)


def _closure_witness(spec, uncovered):
    group = spec.group
    for gap in uncovered:
        for a in spec.intervals:
            for b in spec.intervals:
                target = region_intersect((a.add(b),), (gap,))
                if region_is_empty(target):
                    continue
                z = region_lattice_point(group, target)
                if z is None:
                    continue
                # need x in a, z - x in b, both lattice points
                window = a.intersect(
                    Interval(
                        None if b.hi is None else z - b.hi,
                        z - b.lo,
                        lo_closed=b.hi_closed if b.hi is not None else False,
                        hi_closed=b.lo_closed,
                    )
                )
                if window is None:
                    continue
                x = window.lattice_point(group)
                if x is None:
                    continue
                return (x, z - x)
    return None


# -- structural predicates ---------------------------------------------------


@dataclass(frozen=True)
class BoundedAway:
    gamma: GroupElement
    attained: bool  # True when gamma itself is the least element of the monoid


def bounded_away_from_zero(spec: MonoidSpec) -> BoundedAway | None:
    """The infimum of the first interval when positive, else None."""
    first = spec.intervals[0]
    if first.lo <= spec.group.zero():
        return None
    if not (first.lo > spec.group.zero()):
        return None
    return BoundedAway(first.lo, attained=first.lo_closed)


def is_integrally_terminal_for(spec: MonoidSpec, gamma: GroupElement) -> bool:
    return integrally_terminal_witness(spec, gamma) is None


def integrally_terminal_witness(spec: MonoidSpec, gamma: GroupElement) -> GroupElement | None:
    """A lattice point above gamma missing from the monoid, or None.

    The second half of the terminality condition (every positive element
    has a multiple above gamma) holds automatically for these archimedean
    subgroups of the reals and is not re-derived here.
    """
    above = region(Interval(gamma, None, lo_closed=False, hi_closed=False))
    missing = region_subtract(above, spec.positive_region)
    return region_lattice_point(spec.group, missing)


def find_integrally_terminal(spec: MonoidSpec) -> GroupElement:
    """The least left endpoint of the unbounded interval that works.

    Everything strictly above the unbounded interval's left endpoint lies
    in the monoid, so that endpoint is always integrally terminal.
    """
    return spec.intervals[-1].lo


def has_no_minimal_positive(group: Group) -> bool:
    return group.has_no_minimal_positive


# -- atoms -------------------------------------------------------------------


def monoid_atoms(spec: MonoidSpec) -> Region:
    """Positive elements that are not sums of two positive elements.

    Computed exactly as the interval union minus its own Minkowski
    square.  Interval endpoints are assumed to lie in the group lattice,
    which holds for every monoid this library constructs.
    """
    pos = spec.positive_region
    return region_subtract(pos, region_sum(pos, pos))


# -- length sets -------------------------------------------------------------


@dataclass(frozen=True)
class LengthSet:
    """A finite set of factorization lengths.

    ``full`` marks the common case of a whole integer interval
    [min, max]; otherwise ``exceptional`` lists the members explicitly.
    """

    min: int
    max: int
    full: bool = True
    exceptional: tuple[int, ...] = field(default=())

    def __post_init__(self) -> None:
        if self.min > self.max:
            raise MonoidError("empty length set")
        if self.full and self.exceptional:
            raise MonoidError("a full interval carries no exception list")

    @staticmethod
    def from_values(values) -> "LengthSet":
        vals = sorted(set(values))
        if not vals:
            raise MonoidError("empty length set")
        lo, hi = vals[0], vals[-1]
        if vals == list(range(lo, hi + 1)):
            return LengthSet(lo, hi)
        return LengthSet(lo, hi, full=False, exceptional=tuple(vals))

    def as_set(self) -> set[int]:
        if self.full:
            return set(range(self.min, self.max + 1))
        return set(self.exceptional)

    def __contains__(self, n: int) -> bool:
        return n in self.as_set()

    def __str__(self) -> str:
        if self.full:
            return f"{{{self.min}..{self.max}}}"
        return "{" + ",".join(str(v) for v in self.exceptional) + "}"


def is_one_gap(spec: MonoidSpec) -> bool:
    """True for {0} u [1, inf)."""
    if len(spec.intervals) != 1:
        return False
    iv = spec.intervals[0]
    return iv.lo == spec.group.one() and iv.lo_closed and iv.hi is None


def _require_one_gap(spec: MonoidSpec) -> None:
    if not is_one_gap(spec):
        raise MonoidError(f"closed forms require the one-gap monoid, got {spec}")


def length_set_closed_form(spec: MonoidSpec, v: GroupElement) -> LengthSet:
    """Lengths of a value v in the one-gap monoid: [floor(v/2)+1, floor(v)].

    The lower endpoint realizes the one-sided limit of ceil(v/r) as r
    increases to 2; that identity is property-tested rather than assumed.
    """
    _require_one_gap(spec)
    if v < spec.group.one():
        raise MonoidError(f"value {v} is below the monoid (needs v >= 1)")
    lower = v.scale(Fraction(1, 2)).floor() + 1
    return LengthSet(lower, v.floor())


def catenary_closed_form(spec: MonoidSpec, v: GroupElement) -> int:
    """Catenary degree of a value in the one-gap monoid: 0, 2, or 3."""
    _require_one_gap(spec)
    if v < spec.group.one():
        raise MonoidError(f"value {v} is below the monoid (needs v >= 1)")
    if v < spec.group.element(2):
        return 0
    if v < spec.group.element(3):
        return 2
    return 3


def _grid_int(x: GroupElement, q: int) -> int:
    if x.b != 0:
        raise GridMismatchError(f"{x} is irrational, not on the grid (1/{q})Z")
    scaled = x.a * q
    if scaled.denominator != 1:
        raise GridMismatchError(f"{x} does not lie on the grid (1/{q})Z")
    return int(scaled)


def _atom_grid_values(spec: MonoidSpec, q: int) -> list[int]:
    values = []
    for iv in monoid_atoms(spec):
        if iv.hi is None:
            raise MonoidError("unbounded atom region cannot be enumerated")
        lo_i = _grid_int(iv.lo, q) if iv.lo.b == 0 else None
        if lo_i is None or (iv.hi is not None and iv.hi.b != 0):
            raise GridMismatchError("atom region endpoints must be rational")
        hi_i = _grid_int(iv.hi, q)
        start = lo_i if iv.lo_closed else lo_i + 1
        stop = hi_i if iv.hi_closed else hi_i - 1
        values.extend(range(start, stop + 1))
    if not values:
        raise MonoidError("atom region carries no grid points")
    return sorted(set(values))


def _lengths_on_grid(spec: MonoidSpec, v: GroupElement, grid: int, cap: int, work: list[int]) -> set[int]:
    """All multiset sizes of grid atoms summing to v, by bitmask DP."""
    target = _grid_int(v, grid)
    atoms = _atom_grid_values(spec, grid)
    # dp[r] has bit n set when r is a sum of n grid atoms
    dp = [0] * (target + 1)
    dp[0] = 1
    for r in range(1, target + 1):
        mask = 0
        for a in atoms:
            if a > r:
                break
            mask |= dp[r - a]
        dp[r] = mask << 1
        work[0] += len(atoms)
        if work[0] > cap:
            raise EnumerationTruncated(f"length enumeration exceeded {cap} updates")
    found = set()
    mask, n = dp[target], 0
    while mask:
        if mask & 1:
            found.add(n)
        mask >>= 1
        n += 1
    return found


def length_set_bruteforce(
    spec: MonoidSpec, v: GroupElement, q: int, cap: int = 10**6
) -> LengthSet:
    """Enumerate multisets of atom values summing to v; exact grid oracle.

    Enumeration runs on every refined grid (1/(q*l))Z for candidate
    lengths l and the results are unioned.  Refinement makes the oracle
    exact for single-interval atom regions: a sum of l atoms equal to v
    exists over the rationals iff the equal split v/l is an atom, and
    that witness lies on the grid refined by l.  Grid solutions are
    genuine factorizations, so every reported length is correct.  Work
    beyond ``cap`` state updates raises EnumerationTruncated instead of
    returning a partial answer.
    """
    if spec.group.kind != "rational":
        raise GridMismatchError("the grid oracle runs over rational groups only")
    if q < 1:
        raise MonoidError("grid denominator must be >= 1")
    gamma = bounded_away_from_zero(spec)
    if gamma is None:
        raise MonoidError("enumeration needs a monoid bounded away from zero")
    max_len = int(v.to_fraction() / gamma.gamma.to_fraction())
    if max_len < 1:
        raise MonoidError(f"value {v} is below every atom")
    work = [0]
    found: set[int] = set()
    for refine in range(1, max_len + 1):
        found |= _lengths_on_grid(spec, v, q * refine, cap, work)
    if not found:
        raise MonoidError(f"value {v} has no factorization into atoms on the grid")
    return LengthSet.from_values(found)
