"""Integer-valued rational functions on a finite point set over a
discrete valuation ring.

The concrete model is V = k[u] localized at (u), whose fraction field is
k(u) with the u-adic order.  Field elements reuse the monoid-algebra
fraction type over the integer exponent lattice, so evaluation and
orders are exact.  For a finite set E of points, the per-point atoms
psi_s multiply (together with a unit) to any function whose value vector
is finite, realizing the monoid isomorphism onto |E|-tuples of naturals
and hence unique factorization.
"""

from __future__ import annotations

from dataclasses import dataclass

from .groups import Group
from .algebra import AlgebraError, CoefficientField, KElement
from .minval import RationalFunction
from .monoids import MonoidSpec, parse_monoid


class DvrError(ValueError):
    pass


class EvaluationUndefined(DvrError):
    """The denominator (or the whole function) vanishes at a sample point."""


def dvr_monoid() -> MonoidSpec:
    """The value monoid of k[u]_(u): naturals inside the integer lattice."""
    return parse_monoid("Z: 0 u [1,inf)")


@dataclass(frozen=True)
class DvrContext:
    """Base field, the local ring k[u]_(u), and a finite point set E.

    ``separators`` holds one element c_s per point with
    v(c_s - s) >= v(b - s) for every other point b; the default choice
    is c_s = s + u**m with m past every pairwise closeness.
    """

    field: CoefficientField
    points: tuple[KElement, ...]
    separators: tuple[KElement, ...]

    def __post_init__(self):
        n = len(self.points)
        if n == 0:
            raise DvrError("the point set must be nonempty")
        if len(self.separators) != n:
            raise DvrError("one separator per point is required")
        for i in range(n):
            for j in range(i + 1, n):
                if self.points[i] == self.points[j]:
                    raise DvrError("points must be pairwise distinct")
        for i, (s, c) in enumerate(zip(self.points, self.separators)):
            gap = c - s
            if gap.is_zero():
                raise DvrError("separator must differ from its point")
            m = gap.valuation()
            for j, b in enumerate(self.points):
                if j != i and (b - s).valuation() > m:
                    raise DvrError(
                        f"point {j} is closer to point {i} than its separator"
                    )

    @property
    def group(self) -> Group:
        return self.points[0].group

    @staticmethod
    def make(field: CoefficientField, points) -> "DvrContext":
        points = tuple(points)
        group = Group.integers()
        norm = []
        for p in points:
            if not isinstance(p, KElement):
                raise DvrError("points must be field elements over k(u)")
            if p.group != group:
                raise DvrError("points must live over the integer exponent lattice")
            norm.append(p)
        separators = []
        for i, s in enumerate(norm):
            closeness = 0
            for j, b in enumerate(norm):
                if j != i:
                    m = (b - s).valuation()
                    closeness = max(closeness, m.floor())
            sep = s + KElement.t_power(field, group, group.element(closeness + 1))
            separators.append(sep)
        return DvrContext(field, tuple(norm), tuple(separators))

    def to_json(self) -> dict:
        return {
            "field": self.field.name,
            "points": [str(p) for p in self.points],
            "separators": [str(c) for c in self.separators],
        }


def psi_atom(ctx: DvrContext, index: int) -> RationalFunction:
    """The atom attached to a point s: order 1 at s, order 0 elsewhere.

    Built as ((x-s)**3 + c**3*u**2) / ((x-s)**3 + c**3*u) with c the
    separator offset; the cube denies the order of (x-s)**3 the chance
    to tie with the u-terms at any point of E.
    """
    field = ctx.field
    group = ctx.group
    s = ctx.points[index]
    c = ctx.separators[index] - s
    u1 = KElement.t_power(field, group, group.one())
    u2 = u1 * u1
    one = KElement.one(field, group)
    three = KElement.constant(field, group, field.from_int(3))
    cube = c * c * c
    # (x - s)**3 expanded: x^3 - 3 s x^2 + 3 s^2 x - s^3
    base = (-(s * s * s), three * s * s, -(three * s), one)
    num = (base[0] + cube * u2, base[1], base[2], base[3])
    den = (base[0] + cube * u1, base[1], base[2], base[3])
    return RationalFunction.make(num, den)


def value_vector(phi: RationalFunction, ctx: DvrContext) -> list[int]:
    """u-adic orders of phi at each point of E.

    Vanishing at a point has no finite order and is reported as an
    error: such functions fall outside the tuple model (they absorb
    every power of the point's atom).
    """
    if phi.is_zero():
        raise DvrError("the zero function has no value vector")
    out = []
    for i, s in enumerate(ctx.points):
        try:
            val = phi.evaluate(s)
        except ZeroDivisionError as exc:
            raise EvaluationUndefined(f"denominator vanishes at point {i}") from exc
        if val.is_zero():
            raise EvaluationUndefined(
                f"function vanishes at point {i}; the order there is infinite"
            )
        out.append(val.valuation().floor())
    return out


def is_member(phi: RationalFunction, ctx: DvrContext) -> bool:
    """Membership in the ring of functions mapping E into V."""
    return all(v >= 0 for v in value_vector(phi, ctx))


@dataclass(frozen=True)
class DvrFactorization:
    exponents: tuple[int, ...]
    unit: RationalFunction

    def to_json(self) -> dict:
        return {"exponents": list(self.exponents), "unit": str(self.unit)}


def factor_into_atoms(phi: RationalFunction, ctx: DvrContext) -> DvrFactorization:
    """Unique factorization through the value-vector isomorphism.

    The exponents are the orders at the points of E; dividing out the
    matching atom powers leaves a unit, certified by the zero value
    vectors of the quotient and its reciprocal.
    """
    vec = value_vector(phi, ctx)
    if any(v < 0 for v in vec):
        raise DvrError(f"value vector {vec} has a negative entry; not a member")
    unit = phi
    for i, e in enumerate(vec):
        if e:
            unit = unit / (psi_atom(ctx, i) ** e)
    if value_vector(unit, ctx) != [0] * len(ctx.points):
        raise AssertionError("unit quotient has a nonzero order")  # pragma: no cover
    recip = RationalFunction.make(unit.den, unit.num)
    if value_vector(recip, ctx) != [0] * len(ctx.points):
        raise AssertionError("unit reciprocal has a nonzero order")  # pragma: no cover
    return DvrFactorization(tuple(vec), unit)


@dataclass(frozen=True)
class AtomicityReport:
    atomic: bool
    reason: str
    witness: str | None = None

    def to_json(self) -> dict:
        return {"atomic": self.atomic, "reason": self.reason, "witness": self.witness}


def atomicity_flag(
    finite_count: int | None, accumulates_at_zero: bool = False
) -> AtomicityReport:
    """Atomicity verdict for point families of the form {u**n}.

    Finite families are atomic (value vectors realize all tuples of
    naturals).  An infinite family is not: with the accumulation point
    included, every function vanishing to positive order there is
    strictly divisible forever; without it, the constant u would need a
    factor at infinitely many points at once.  The value group being the
    integers is part of the concrete model.
    """
    if finite_count is not None:
        return AtomicityReport(
            True,
            f"finite point set of size {finite_count} over a discrete valuation"
            " ring: unique factorization through the tuple isomorphism",
        )
    if accumulates_at_zero:
        return AtomicityReport(
            False,
            "the accumulation point admits arbitrarily close neighbors, so"
            " cube-shift functions strictly divide forever",
            witness="0",
        )
    return AtomicityReport(
        False,
        "infinitely many isolated points: the constant u takes a positive"
        " order everywhere but any finite atom product does so at finitely"
        " many points only",
    )


def geometric_points(field: CoefficientField, count: int, include_zero: bool = False):
    """The family {u**n : 0 <= n < count}, optionally with 0 adjoined."""
    group = Group.integers()
    pts = [KElement.t_power(field, group, group.element(n)) for n in range(count)]
    if include_zero:
        pts.append(KElement.zero(field, group))
    return pts
