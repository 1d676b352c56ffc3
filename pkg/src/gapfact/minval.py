"""Exact piecewise-linear calculus for minimum valuations.

A rational function f/g over the valued field K is assigned the
piecewise-linear predictor minval(gamma) = (lower envelope of the lines
v(a_i) + i*gamma over nonzero numerator coefficients) minus the same for
the denominator.  The envelope is computed by a slope-sorted sweep with
exact intersection comparisons.  Off a finite set of tie abscissas the
predictor equals the true valuation of every evaluation at points of
that value.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .groups import Group, GroupElement
from .algebra import KElement


class MinvalError(ValueError):
    pass


@dataclass(frozen=True)
class Affine:
    """gamma |-> slope * gamma + intercept with integer slope."""

    slope: int
    intercept: GroupElement

    def at(self, gamma: GroupElement) -> GroupElement:
        return gamma.scale(self.slope) + self.intercept

    def __str__(self) -> str:
        return f"{self.slope}*g + {self.intercept}"


@dataclass(frozen=True)
class PiecewiseLinear:
    """Continuous piecewise-affine function on the divisible closure.

    ``pieces[i]`` applies on the segment between ``breakpoints[i-1]`` and
    ``breakpoints[i]`` (unbounded at the ends).  Continuity at every
    breakpoint is validated exactly.
    """

    breakpoints: tuple[GroupElement, ...]
    pieces: tuple[Affine, ...]

    def __post_init__(self):
        if len(self.pieces) != len(self.breakpoints) + 1:
            raise MinvalError("piece/breakpoint count mismatch")
        for b1, b2 in zip(self.breakpoints, self.breakpoints[1:]):
            if not b1 < b2:
                raise MinvalError("breakpoints must strictly increase")
        for i, b in enumerate(self.breakpoints):
            if self.pieces[i].at(b) != self.pieces[i + 1].at(b):
                raise MinvalError(f"discontinuity at breakpoint {b}")

    # -- basic queries ------------------------------------------------

    @staticmethod
    def constant(group: Group, value) -> "PiecewiseLinear":
        if not isinstance(value, GroupElement):
            value = group.element(value)
        return PiecewiseLinear((), (Affine(0, value),))

    @property
    def group(self) -> Group:
        return self.pieces[0].intercept.group

    def piece_index(self, gamma: GroupElement) -> int:
        i = 0
        for b in self.breakpoints:
            if gamma > b:
                i += 1
            else:
                break
        return i

    def evaluate(self, gamma: GroupElement) -> GroupElement:
        return self.pieces[self.piece_index(gamma)].at(gamma)

    def is_constant(self) -> bool:
        return all(p.slope == 0 for p in self.pieces) and all(
            p.intercept == self.pieces[0].intercept for p in self.pieces
        )

    def is_identically_zero(self) -> bool:
        return all(p.slope == 0 and p.intercept.is_zero() for p in self.pieces)

    # -- arithmetic -----------------------------------------------------

    def _merged_with(self, other: "PiecewiseLinear", combine) -> "PiecewiseLinear":
        bps = sorted(set(self.breakpoints) | set(other.breakpoints), key=_cmp_key)
        if not bps:
            return PiecewiseLinear((), (combine(self.pieces[0], other.pieces[0]),))
        pieces = []
        for i in range(len(bps) + 1):
            probe = _region_probe(bps, i)
            p1 = self.pieces[self.piece_index(probe)]
            p2 = other.pieces[other.piece_index(probe)]
            pieces.append(combine(p1, p2))
        return PiecewiseLinear(tuple(bps), tuple(pieces)).simplify()

    def __add__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        return self._merged_with(
            other, lambda a, b: Affine(a.slope + b.slope, a.intercept + b.intercept)
        )

    def __sub__(self, other: "PiecewiseLinear") -> "PiecewiseLinear":
        return self._merged_with(
            other, lambda a, b: Affine(a.slope - b.slope, a.intercept - b.intercept)
        )

    def __neg__(self) -> "PiecewiseLinear":
        return PiecewiseLinear(
            self.breakpoints, tuple(Affine(-p.slope, -p.intercept) for p in self.pieces)
        )

    def add_constant(self, c: GroupElement) -> "PiecewiseLinear":
        return PiecewiseLinear(
            self.breakpoints, tuple(Affine(p.slope, p.intercept + c) for p in self.pieces)
        )

    def scale_int(self, n: int) -> "PiecewiseLinear":
        if n == 0:
            return PiecewiseLinear.constant(self.group, self.group.zero())
        pieces = tuple(Affine(p.slope * n, p.intercept.scale(n)) for p in self.pieces)
        return PiecewiseLinear(self.breakpoints, pieces)

    def shift_right(self, delta: GroupElement) -> "PiecewiseLinear":
        """The function gamma |-> self(gamma - delta)."""
        return PiecewiseLinear(
            tuple(b + delta for b in self.breakpoints),
            tuple(
                Affine(p.slope, p.intercept - delta.scale(p.slope)) for p in self.pieces
            ),
        )

    def simplify(self) -> "PiecewiseLinear":
        bps = list(self.breakpoints)
        pieces = list(self.pieces)
        i = 0
        while i < len(bps):
            if pieces[i] == pieces[i + 1]:
                del bps[i]
                del pieces[i + 1]
            else:
                i += 1
        return PiecewiseLinear(tuple(bps), tuple(pieces))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinear):
            return NotImplemented
        a, b = self.simplify(), other.simplify()
        return a.breakpoints == b.breakpoints and a.pieces == b.pieces

    __hash__ = None

    # -- extrema -----------------------------------------------------------

    def minimum(self) -> tuple[GroupElement | None, GroupElement | None]:
        """(min value, witness abscissa); (None, abscissa) encodes -infinity.

        A finite minimum of a continuous piecewise-affine map is attained
        at a breakpoint or along a horizontal piece.
        """
        first, last = self.pieces[0], self.pieces[-1]
        if first.slope > 0 or last.slope < 0:
            side = first if first.slope > 0 else last
            gamma = self._escape(side, downward=True)
            return (None, gamma)
        if not self.breakpoints:
            return (first.intercept, self.group.zero())
        best = None
        witness = None
        for b in self.breakpoints:
            val = self.evaluate(b)
            if best is None or val < best:
                best, witness = val, b
        return (best, witness)

    def maximum(self) -> tuple[GroupElement | None, GroupElement | None]:
        mn, wit = (-self).minimum()
        return (None if mn is None else -mn, wit)

    def _escape(self, piece: Affine, downward: bool) -> GroupElement:
        """An abscissa on an unbounded piece where the value crosses 0."""
        target = self.group.zero()
        if self.breakpoints:
            gamma = self.breakpoints[0] - 1 if piece is self.pieces[0] else self.breakpoints[-1] + 1
        else:
            gamma = self.group.zero()
        step = self.group.one()
        direction = -1 if piece is self.pieces[0] else 1
        for _ in range(256):
            val = self.evaluate(gamma)
            if (downward and val < target) or (not downward and val > target):
                return gamma
            gamma = gamma + step.scale(direction)
            step = step.scale(2)
        raise AssertionError("unbounded piece failed to escape")  # pragma: no cover

    def infimum(self) -> GroupElement | None:
        """Exact infimum over the closure; None encodes -infinity.

        For the dense groups supported here the infimum over the group
        equals the infimum over its divisible closure.
        """
        return self.minimum()[0]

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "breakpoints": [str(b) for b in self.breakpoints],
            "pieces": [
                {"slope": p.slope, "intercept": str(p.intercept)} for p in self.pieces
            ],
        }

    def __str__(self) -> str:
        if not self.breakpoints:
            return f"[{self.pieces[0]}]"
        parts = [f"{self.pieces[0]} for g <= {self.breakpoints[0]}"]
        for i in range(1, len(self.pieces) - 1):
            parts.append(
                f"{self.pieces[i]} on [{self.breakpoints[i-1]}, {self.breakpoints[i]}]"
            )
        parts.append(f"{self.pieces[-1]} for g >= {self.breakpoints[-1]}")
        return "[" + "; ".join(parts) + "]"


def _cmp_key(e: GroupElement):
    class _K:
        __slots__ = ("e",)

        def __init__(self, e):
            self.e = e

        def __lt__(self, other):
            return self.e < other.e

        def __eq__(self, other):
            return self.e == other.e

    return _K(e)


def _region_probe(bps: list, i: int) -> GroupElement:
    """An interior point of region i in the partition induced by bps."""
    if not bps:
        raise MinvalError("probe needs at least one breakpoint")
    if i == 0:
        return bps[0] - 1
    if i == len(bps):
        return bps[-1] + 1
    return (bps[i - 1] + bps[i]).scale(Fraction(1, 2))


def envelope(lines) -> PiecewiseLinear:
    """Exact lower envelope of affine lines, slope-sorted sweep.

    Duplicate slopes keep the lower intercept.  The result has strictly
    decreasing slopes left to right (the largest slope wins toward
    -infinity) and is continuous by construction.
    """
    pool: dict[int, GroupElement] = {}
    lines = list(lines)
    if not lines:
        raise MinvalError("envelope of an empty family")
    for ln in lines:
        cur = pool.get(ln.slope)
        if cur is None or ln.intercept < cur:
            pool[ln.slope] = ln.intercept
    ordered = [Affine(s, pool[s]) for s in sorted(pool, reverse=True)]
    hull: list[tuple[Affine, GroupElement | None]] = []
    for ln in ordered:
        while hull:
            top, start = hull[-1]
            cross = (ln.intercept - top.intercept).scale(
                Fraction(1, top.slope - ln.slope)
            )
            if start is None or cross > start:
                hull.append((ln, cross))
                break
            hull.pop()
        else:
            hull.append((ln, None))
    pieces = tuple(ln for ln, _ in hull)
    bps = tuple(start for _, start in hull[1:])
    return PiecewiseLinear(bps, pieces)


# ---------------------------------------------------------------------------
# rational functions over K in one indeterminate
# ---------------------------------------------------------------------------


def _trim(coeffs: tuple[KElement, ...]) -> tuple[KElement, ...]:
    items = list(coeffs)
    while items and items[-1].is_zero():
        items.pop()
    return tuple(items)


def _poly_mul(a: tuple[KElement, ...], b: tuple[KElement, ...]):
    if not a or not b:
        return ()
    zero = KElement.zero(a[0].field, a[0].group) if a else KElement.zero(b[0].field, b[0].group)
    out = [zero] * (len(a) + len(b) - 1)
    for i, ca in enumerate(a):
        if ca.is_zero():
            continue
        for j, cb in enumerate(b):
            if cb.is_zero():
                continue
            out[i + j] = out[i + j] + ca * cb
    return tuple(out)


def _poly_eq(a, b) -> bool:
    a, b = _trim(a), _trim(b)
    if len(a) != len(b):
        return False
    return all(x == y for x, y in zip(a, b))


@dataclass(frozen=True)
class RationalFunction:
    """Quotient of polynomials in x with coefficients in K."""

    num: tuple[KElement, ...]
    den: tuple[KElement, ...]

    @staticmethod
    def make(num, den=None) -> "RationalFunction":
        num = _trim(tuple(num))
        if den is None:
            if not num:
                raise MinvalError("cannot infer the field of the zero function")
            den = (KElement.one(num[0].field, num[0].group),)
        den = _trim(tuple(den))
        if not den:
            raise ZeroDivisionError("zero denominator polynomial")
        return RationalFunction(num, den)

    @staticmethod
    def constant(c: KElement) -> "RationalFunction":
        return RationalFunction.make((c,), (KElement.one(c.field, c.group),))

    @property
    def field(self):
        return self.den[0].field

    @property
    def group(self):
        return self.den[0].group

    def is_zero(self) -> bool:
        return not self.num

    def constant_ratio(self) -> KElement | None:
        """The constant c with self identically c, or None if nonconstant.

        Presentations are kept unreduced, so the test is proportionality
        of the numerator and denominator as polynomials over K.
        """
        if self.is_zero():
            return KElement.zero(self.field, self.group)
        if len(self.num) != len(self.den):
            return None
        i0 = next(i for i, c in enumerate(self.den) if not c.is_zero())
        if self.num[i0].is_zero():
            return None
        c = self.num[i0] / self.den[i0]
        for a, b in zip(self.num, self.den):
            if not (a == c * b):
                return None
        return c

    def is_constant(self) -> bool:
        return self.constant_ratio() is not None

    def constant_value(self) -> KElement:
        c = self.constant_ratio()
        if c is None:
            raise MinvalError("not a constant rational function")
        return c

    def evaluate(self, a: KElement) -> KElement:
        num = _horner(self.num, a)
        den = _horner(self.den, a)
        if den.is_zero():
            raise ZeroDivisionError("denominator vanishes at the evaluation point")
        return num / den

    def __mul__(self, other: "RationalFunction") -> "RationalFunction":
        return RationalFunction.make(
            _poly_mul(self.num, other.num), _poly_mul(self.den, other.den)
        )

    def __truediv__(self, other: "RationalFunction") -> "RationalFunction":
        if other.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RationalFunction.make(
            _poly_mul(self.num, other.den), _poly_mul(self.den, other.num)
        )

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            return (RationalFunction.make(self.den, self.num)) ** (-n)
        out = RationalFunction.constant(KElement.one(self.field, self.group))
        for _ in range(n):
            out = out * self
        return out

    def __sub__(self, other: "RationalFunction") -> "RationalFunction":
        neg = tuple(-c for c in other.num)
        return RationalFunction.make(
            tuple(
                a + b
                for a, b in _zip_pad(
                    _poly_mul(self.num, other.den), _poly_mul(neg, self.den)
                )
            ),
            _poly_mul(self.den, other.den),
        )

    def scale_argument(self, r: KElement) -> "RationalFunction":
        """The function x |-> self(x / r)."""
        if r.is_zero():
            raise ZeroDivisionError("argument scaling by zero")
        rinv = r.inverse()
        num = tuple(c * rinv**i for i, c in enumerate(self.num))
        den = tuple(c * rinv**i for i, c in enumerate(self.den))
        return RationalFunction.make(num, den)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return _poly_eq(
            _poly_mul(self.num, other.den), _poly_mul(other.num, self.den)
        )

    __hash__ = None

    def __str__(self) -> str:
        def side(coeffs):
            if not coeffs:
                return "0"
            parts = []
            for i, c in enumerate(coeffs):
                if c.is_zero():
                    continue
                if i == 0:
                    parts.append(f"({c})")
                elif i == 1:
                    parts.append(f"({c})*x")
                else:
                    parts.append(f"({c})*x^{i}")
            return " + ".join(parts)

        return f"[{side(self.num)}] / [{side(self.den)}]"


def _horner(coeffs, a: KElement) -> KElement:
    out = KElement.zero(a.field, a.group)
    for c in reversed(coeffs):
        out = out * a + c
    return out


def _zip_pad(a, b):
    zero = None
    if a:
        zero = KElement.zero(a[0].field, a[0].group)
    elif b:
        zero = KElement.zero(b[0].field, b[0].group)
    n = max(len(a), len(b))
    a = list(a) + [zero] * (n - len(a))
    b = list(b) + [zero] * (n - len(b))
    return zip(a, b)


def _lines_of(coeffs) -> list[Affine]:
    lines = []
    for i, c in enumerate(coeffs):
        if not c.is_zero():
            lines.append(Affine(i, c.valuation()))
    if not lines:
        raise MinvalError("zero polynomial has no valuation lines")
    return lines


def minval_of(phi: RationalFunction) -> PiecewiseLinear:
    """Envelope of the numerator minus envelope of the denominator."""
    if phi.is_zero():
        raise MinvalError("the zero function has no minimum-valuation profile")
    return envelope(_lines_of(phi.num)) - envelope(_lines_of(phi.den))


def envelope_of_coefficients(pairs) -> PiecewiseLinear:
    """Envelope from explicit (degree, valuation) pairs."""
    return envelope([Affine(int(i), v) for i, v in pairs])


@dataclass(frozen=True)
class Dichotomy:
    kind: str  # "zero" | "positive" | "mixed"
    witness: GroupElement | None = None


def dichotomy(p: PiecewiseLinear) -> Dichotomy:
    """Classify a profile as identically zero, strictly positive, or mixed.

    The mixed verdict carries an abscissa where the value is not
    positive (or where positivity fails while the function is not
    identically zero)."""
    if p.is_identically_zero():
        return Dichotomy("zero")
    mn, wit = p.minimum()
    if mn is not None and mn > p.group.zero():
        return Dichotomy("positive")
    return Dichotomy("mixed", witness=wit)


def exceptional_abscissas(phi: RationalFunction) -> tuple[GroupElement, ...]:
    """Finite superset of abscissas where the predictor may fail.

    These are the tie points: abscissas where at least two coefficient
    lines of the numerator or of the denominator achieve their envelope.
    The set is over-approximated, never under-approximated.
    """
    if phi.is_zero():
        raise MinvalError("the zero function has no profile")
    out = []
    for coeffs in (phi.num, phi.den):
        lines = _lines_of(coeffs)
        env = envelope(lines)
        for i in range(len(lines)):
            for j in range(i + 1, len(lines)):
                l1, l2 = lines[i], lines[j]
                if l1.slope == l2.slope:
                    continue
                cross = (l2.intercept - l1.intercept).scale(
                    Fraction(1, l1.slope - l2.slope)
                )
                if env.evaluate(cross) == l1.at(cross):
                    out.append(cross)
    unique = []
    for x in sorted(out, key=_cmp_key):
        if not unique or unique[-1] != x:
            unique.append(x)
    return tuple(unique)
