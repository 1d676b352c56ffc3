"""Exact arithmetic and total order for rank-1 value groups.

Supported groups are subgroups of the real line of two shapes: the
rationals and real quadratic extensions ``a + b*sqrt(d)`` with a fixed
real embedding.  Each group carries a lattice marker that distinguishes
the group itself from its divisible closure (``Z`` vs ``Q`` coordinates);
all elements share one representation and lattice membership is a
separate predicate.

Every comparison is decided algebraically (sign analysis of
``a + b*sqrt(d)`` through ``a**2 - d*b**2``), never through floating
point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt
import re


class GroupError(ValueError):
    """Malformed group descriptor or element."""


class GroupMismatchError(GroupError):
    """Operands belong to different groups."""


def _is_squarefree(n: int) -> bool:
    if n < 2:
        return False
    k = 2
    while k * k <= n:
        if n % (k * k) == 0:
            return False
        k += 1
    return True


@dataclass(frozen=True)
class Group:
    """Descriptor of the ambient group and its lattice.

    ``kind`` is ``"rational"`` or ``"quadratic"``; ``d`` is the squarefree
    radicand for quadratic groups.  ``lattice`` selects the actual group
    inside the divisible closure: ``"Z"`` means Z (rational kind) or
    Z + Z*sqrt(d), while ``"Q"`` means the full divisible closure.
    """

    kind: str
    d: int | None = None
    lattice: str = "Q"

    def __post_init__(self) -> None:
        if self.kind not in ("rational", "quadratic"):
            raise GroupError(f"unknown group kind {self.kind!r}")
        if self.lattice not in ("Z", "Q"):
            raise GroupError(f"unknown lattice {self.lattice!r}")
        if self.kind == "quadratic":
            if self.d is None or not _is_squarefree(self.d):
                raise GroupError("quadratic group needs a squarefree d >= 2")
        elif self.d is not None:
            raise GroupError("rational group takes no radicand")

    # -- constructors -------------------------------------------------

    @staticmethod
    def rationals() -> "Group":
        return Group("rational", lattice="Q")

    @staticmethod
    def integers() -> "Group":
        return Group("rational", lattice="Z")

    @staticmethod
    def quadratic_lattice(d: int) -> "Group":
        """Z + Z*sqrt(d), a dense non-divisible subgroup of R."""
        return Group("quadratic", d=d, lattice="Z")

    @staticmethod
    def quadratic_field(d: int) -> "Group":
        """Q + Q*sqrt(d), divisible."""
        return Group("quadratic", d=d, lattice="Q")

    @staticmethod
    def parse(text: str) -> "Group":
        s = text.strip().replace(" ", "")
        if s == "Q":
            return Group.rationals()
        if s == "Z":
            return Group.integers()
        m = re.fullmatch(r"Z\[sqrt(\d+)\]", s)
        if m:
            return Group.quadratic_lattice(int(m.group(1)))
        m = re.fullmatch(r"Q\(sqrt(\d+)\)", s)
        if m:
            return Group.quadratic_field(int(m.group(1)))
        raise GroupError(f"cannot parse group descriptor {text!r}")

    def __str__(self) -> str:
        if self.kind == "rational":
            return "Q" if self.lattice == "Q" else "Z"
        if self.lattice == "Z":
            return f"Z[sqrt{self.d}]"
        return f"Q(sqrt{self.d})"

    # -- structural properties ----------------------------------------

    @property
    def is_divisible(self) -> bool:
        return self.lattice == "Q"

    @property
    def has_no_minimal_positive(self) -> bool:
        """True when the lattice is dense in R (no least positive element)."""
        if self.kind == "rational":
            return self.lattice == "Q"
        return True  # Z + Z*sqrt(d) is dense, and so is its closure

    # -- element constructors ------------------------------------------

    def element(self, a, b=0) -> "GroupElement":
        a = Fraction(a)
        b = Fraction(b)
        if self.kind == "rational" and b != 0:
            raise GroupError("rational group element cannot carry a sqrt part")
        return GroupElement(self, a, b)

    def zero(self) -> "GroupElement":
        return self.element(0)

    def one(self) -> "GroupElement":
        return self.element(1)

    def parse_element(self, text: str) -> "GroupElement":
        return parse_element(self, text)


_RAT = r"[+-]?\d+(?:/\d+)?"


def parse_element(group: Group, text: str) -> "GroupElement":
    """Parse ``"a"``, ``"b*sqrtD"``, or ``"a+b*sqrtD"`` with rationals ``p/q``."""
    s = text.strip().replace(" ", "")
    if not s:
        raise GroupError("empty element")
    m = re.fullmatch(rf"({_RAT})", s)
    if m:
        return group.element(Fraction(m.group(1)))
    # optional rational part, then signed multiple of sqrt(d)
    m = re.fullmatch(rf"(?:({_RAT}))?([+-]?)(?:({_RAT})\*)?sqrt(\d+)", s)
    if not m:
        raise GroupError(f"cannot parse element {text!r}")
    a_part, sign, b_part, d_part = m.groups()
    if group.kind != "quadratic" or int(d_part) != group.d:
        raise GroupError(f"element {text!r} does not live in {group}")
    a = Fraction(a_part) if a_part else Fraction(0)
    b = Fraction(b_part) if b_part else Fraction(1)
    if sign == "-":
        b = -b
    return group.element(a, b)


@dataclass(frozen=True, eq=False)
class GroupElement:
    """Exact element ``a + b*sqrt(d)`` of a group's divisible closure."""

    group: Group
    a: Fraction
    b: Fraction

    # -- helpers -------------------------------------------------------

    def _check(self, other: "GroupElement") -> None:
        if not isinstance(other, GroupElement):
            raise TypeError(f"expected GroupElement, got {type(other).__name__}")
        if other.group != self.group:
            raise GroupMismatchError(f"{self.group} vs {other.group}")

    def _coerce(self, other) -> "GroupElement":
        if isinstance(other, GroupElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.group.element(other)
        raise TypeError(f"cannot combine GroupElement with {type(other).__name__}")

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other) -> "GroupElement":
        o = self._coerce(other)
        return GroupElement(self.group, self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self) -> "GroupElement":
        return GroupElement(self.group, -self.a, -self.b)

    def __sub__(self, other) -> "GroupElement":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "GroupElement":
        return (-self) + self._coerce(other)

    def scale(self, q) -> "GroupElement":
        """Multiply by a rational scalar; the result lives in the divisible closure."""
        q = Fraction(q)
        return GroupElement(self.group, self.a * q, self.b * q)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    # -- order ----------------------------------------------------------

    def sign(self) -> int:
        """Exact sign of a + b*sqrt(d) under the real embedding.

        Mixed-sign coordinates are resolved through the norm form
        a**2 - d*b**2, which never vanishes for b != 0 because d is not a
        square.
        """
        a, b = self.a, self.b
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        n = a * a - self.group.d * b * b
        if a > 0:  # b < 0: positive iff a > |b|sqrt(d)
            return 1 if n > 0 else -1
        return 1 if n < 0 else -1  # a < 0, b > 0

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = self.group.element(other)
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.group == other.group and self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.group, self.a, self.b))

    def __lt__(self, other) -> bool:
        return (self - self._coerce(other)).sign() < 0

    def __le__(self, other) -> bool:
        return (self - self._coerce(other)).sign() <= 0

    def __gt__(self, other) -> bool:
        return (self - self._coerce(other)).sign() > 0

    def __ge__(self, other) -> bool:
        return (self - self._coerce(other)).sign() >= 0

    # -- lattice and integrality ----------------------------------------

    def in_lattice(self) -> bool:
        """Membership in the group proper (as opposed to its divisible closure)."""
        if self.group.lattice == "Q":
            return True
        if self.group.kind == "rational":
            return self.a.denominator == 1
        return self.a.denominator == 1 and self.b.denominator == 1

    def floor(self) -> int:
        if self.b == 0:
            num, den = self.a.numerator, self.a.denominator
            return num // den
        # clear denominators: x = (p1 + p2*sqrt(d)) / q
        q = self.a.denominator * self.b.denominator // gcd(self.a.denominator, self.b.denominator)
        p1 = int(self.a * q)
        p2 = int(self.b * q)
        s = isqrt(p2 * p2 * self.group.d)
        fl = s if p2 >= 0 else -s - 1  # floor(p2*sqrt(d)); exactness impossible
        n = (p1 + fl) // q
        while self < n:
            n -= 1
        while self >= n + 1:
            n += 1
        return n

    def ceil(self) -> int:
        return -((-self).floor())

    def to_fraction(self) -> Fraction:
        if self.b != 0:
            raise GroupError(f"{self} is irrational")
        return self.a

    # -- presentation -----------------------------------------------------

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        root = f"sqrt{self.group.d}"
        if self.b == 1:
            bs = root
        elif self.b == -1:
            bs = f"-{root}"
        else:
            bs = f"{self.b}*{root}"
        if self.a == 0:
            return bs
        joiner = "+" if not bs.startswith("-") else ""
        return f"{self.a}{joiner}{bs}"

    def __repr__(self) -> str:
        return f"<{self} in {self.group}>"


def compare(x: GroupElement, y: GroupElement) -> int:
    """-1, 0, or 1 according to the exact order."""
    if x.group != y.group:
        raise GroupMismatchError(f"{x.group} vs {y.group}")
    return (x - y).sign()


def in_group(x: GroupElement) -> bool:
    """True when x lies in the group's lattice, not merely its closure."""
    return x.in_lattice()


# -- field arithmetic inside Q(sqrt d), used by density searches ----------


def ring_mul(x: GroupElement, y: GroupElement) -> GroupElement:
    x._check(y)
    d = x.group.d or 0
    return GroupElement(
        x.group, x.a * y.a + d * x.b * y.b, x.a * y.b + x.b * y.a
    )


def ring_div(x: GroupElement, y: GroupElement) -> GroupElement:
    """x / y inside the quadratic field (or the rationals)."""
    x._check(y)
    if y.is_zero():
        raise ZeroDivisionError("division by zero group element")
    if y.b == 0:
        return x.scale(Fraction(1, 1) / y.a)
    d = x.group.d
    norm = y.a * y.a - d * y.b * y.b
    conj = GroupElement(y.group, y.a, -y.b)
    return ring_mul(x, conj).scale(Fraction(1, 1) / norm)


def lattice_point_between(
    group: Group,
    lo: GroupElement | None,
    hi: GroupElement | None,
    lo_strict: bool = True,
    hi_strict: bool = True,
) -> GroupElement | None:
    """An element of the group's lattice inside the given interval, or None.

    ``None`` bounds mean the interval is unbounded on that side.  For the
    dense lattice Z + Z*sqrt(d) a point is found by descending powers of
    the unit-interval element sqrt(d) - floor(sqrt(d)); for Z the integer
    scan is exact and may legitimately fail.
    """
    if lo is not None and hi is not None:
        c = compare(lo, hi)
        if c > 0 or (c == 0 and (lo_strict or hi_strict)):
            return None
        if c == 0:
            return lo if lo.in_lattice() else None

    def fits(x: GroupElement) -> bool:
        if lo is not None and (x < lo or (lo_strict and x == lo)):
            return False
        if hi is not None and (x > hi or (hi_strict and x == hi)):
            return False
        return True

    # integer fast path works in every supported lattice
    if lo is None and hi is None:
        return group.zero()
    anchor = lo if lo is not None else hi
    base = anchor.floor() - 1
    for k in range(5):
        cand = group.element(base + k)
        if fits(cand):
            return cand
    # a half-line always admits an integer, so both bounds are finite here
    if group.lattice == "Q":
        mid = (lo + hi).scale(Fraction(1, 2))
        return mid if fits(mid) else None
    if group.kind == "rational":
        return None  # Z: the integer scan above was exhaustive

    # dense quadratic lattice: lam = sqrt(d) - isqrt(d) lies in (0, 1)
    lam = group.element(-isqrt(group.d), 1)
    width = hi - lo
    power = lam
    while power >= width:
        power = ring_mul(power, lam)
    m = ring_div(lo, power).floor() + 1
    cand = power.scale(m)
    # m*lam**k sits in (lo, lo + power] and power < width, hence inside
    if not fits(cand):
        cand = cand + power
    if not fits(cand):
        raise AssertionError("dense lattice search failed")  # pragma: no cover
    return cand
