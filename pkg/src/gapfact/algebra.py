"""Exact arithmetic in the monoid algebra k[t;M], its fraction field K,
and the localization D at the ideal of positive-valuation elements.

Elements are sparse maps from nonnegative exponents (group elements) to
nonzero coefficients in k (the rationals or a prime field).  The
valuation reads the least exponent.  Membership in D is certified, never
guessed: ``DElement`` carries a presentation with unit denominator and
all exponents inside the monoid, and ``normalize_to_d`` constructs such
a presentation whenever the value of the input clears the monoid's
integrally terminal threshold, by multiplying through with
f(den - den(0)) for f(x) = (x**n + b0**n)/(x + b0) and odd n.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .groups import Group, GroupElement
from .intervals import Interval, region, region_contains, region_intersect
from .monoids import (
    MonoidSpec,
    MonoidError,
    find_integrally_terminal,
    is_one_gap,
    length_set_closed_form,
    monoid_atoms,
)


class AlgebraError(ValueError):
    pass


class AssociationUndecided(RuntimeError):
    """A distance computation hit an undecided association."""


# ---------------------------------------------------------------------------
# coefficient fields
# ---------------------------------------------------------------------------


class CoefficientField:
    """Tiny exact-field interface over raw coefficient values."""

    name: str

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def from_int(self, n: int):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def div(self, a, b):
        return self.mul(a, self.inv(b))

    def is_zero(self, a) -> bool:
        return a == self.zero()

    def format(self, a) -> str:
        return str(a)

    def __repr__(self) -> str:
        return self.name


class RationalField(CoefficientField):
    name = "Q"

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def from_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def neg(self, a):
        return -a

    def mul(self, a, b):
        return a * b

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("coefficient inverse of zero")
        return 1 / Fraction(a)

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")


class PrimeField(CoefficientField):
    """F_p with values normalized to 0..p-1."""

    def __init__(self, p: int):
        if p < 2 or any(p % k == 0 for k in range(2, int(p**0.5) + 1)):
            raise AlgebraError(f"{p} is not prime")
        self.p = p
        self.name = f"F{p}"

    def zero(self):
        return 0

    def one(self):
        return 1

    def from_int(self, n):
        return n % self.p

    def add(self, a, b):
        return (a + b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("coefficient inverse of zero")
        return pow(a, self.p - 2, self.p)

    def elements(self):
        return range(self.p)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.p == self.p

    def __hash__(self):
        return hash(("F", self.p))


QQ = RationalField()


def parse_field(text: str) -> CoefficientField:
    s = text.strip().replace(" ", "")
    if s == "Q":
        return QQ
    for pat in ("F", "F_", "GF(", "GF"):
        if s.startswith(pat):
            digits = s[len(pat):].rstrip(")")
            if digits.isdigit():
                return PrimeField(int(digits))
    raise AlgebraError(f"cannot parse field descriptor {text!r}")


# ---------------------------------------------------------------------------
# sparse polynomials in t
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class TPoly:
    """Finite sum of c * t**e with exponents e >= 0 in the divisible closure."""

    field: CoefficientField
    group: Group
    terms: tuple  # ((exponent, coeff), ...) sorted by exponent, coeffs nonzero

    @staticmethod
    def make(field: CoefficientField, group: Group, items: Iterable) -> "TPoly":
        acc: dict[GroupElement, object] = {}
        for exp, coeff in items:
            if not isinstance(exp, GroupElement):
                exp = group.element(exp)
            if exp.group != group:
                raise AlgebraError("exponent group mismatch")
            if exp.sign() < 0:
                raise AlgebraError(f"negative exponent {exp}")
            cur = acc.get(exp)
            coeff = coeff if cur is None else field.add(cur, coeff)
            if field.is_zero(coeff):
                acc.pop(exp, None)
            else:
                acc[exp] = coeff
        ordered = tuple(sorted(acc.items(), key=_exp_key))
        return TPoly(field, group, ordered)

    @staticmethod
    def zero(field, group) -> "TPoly":
        return TPoly(field, group, ())

    @staticmethod
    def constant(field, group, c) -> "TPoly":
        return TPoly.make(field, group, [(group.zero(), c)])

    @staticmethod
    def one(field, group) -> "TPoly":
        return TPoly.constant(field, group, field.one())

    @staticmethod
    def t_power(field, group, exp, coeff=None) -> "TPoly":
        coeff = field.one() if coeff is None else coeff
        return TPoly.make(field, group, [(exp, coeff)])

    # -- queries --------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def valuation(self) -> GroupElement:
        if self.is_zero():
            raise AlgebraError("the zero element has no valuation")
        return self.terms[0][0]

    def exponents(self):
        return [e for e, _ in self.terms]

    def coeff_at(self, exp: GroupElement):
        for e, c in self.terms:
            if e == exp:
                return c
        return self.field.zero()

    def lowest_coeff(self):
        return self.terms[0][1]

    def supported_in(self, spec: MonoidSpec) -> bool:
        return all(spec.contains(e) for e in self.exponents())

    # -- arithmetic -------------------------------------------------------

    def _check(self, other: "TPoly"):
        if self.field != other.field or self.group != other.group:
            raise AlgebraError("mixed coefficient fields or groups")

    def __add__(self, other: "TPoly") -> "TPoly":
        self._check(other)
        return TPoly.make(self.field, self.group, list(self.terms) + list(other.terms))

    def __neg__(self) -> "TPoly":
        f = self.field
        return TPoly(self.field, self.group, tuple((e, f.neg(c)) for e, c in self.terms))

    def __sub__(self, other: "TPoly") -> "TPoly":
        return self + (-other)

    def __mul__(self, other: "TPoly") -> "TPoly":
        self._check(other)
        f = self.field
        items = []
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                items.append((e1 + e2, f.mul(c1, c2)))
        return TPoly.make(f, self.group, items)

    def scalar_mul(self, c) -> "TPoly":
        f = self.field
        if f.is_zero(c):
            return TPoly.zero(f, self.group)
        return TPoly(f, self.group, tuple((e, f.mul(cc, c)) for e, cc in self.terms))

    def shift(self, delta: GroupElement) -> "TPoly":
        """Multiply by t**delta; delta may be negative if every exponent absorbs it."""
        return TPoly.make(
            self.field, self.group, [(e + delta, c) for e, c in self.terms]
        )

    def __pow__(self, n: int) -> "TPoly":
        if n < 0:
            raise AlgebraError("negative power of a polynomial")
        out = TPoly.one(self.field, self.group)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, TPoly):
            return NotImplemented
        return (
            self.field == other.field
            and self.group == other.group
            and self.terms == other.terms
        )

    def __hash__(self):
        return hash((self.field, self.group, self.terms))

    def __str__(self) -> str:
        if self.is_zero():
            return "0"
        parts = []
        for e, c in self.terms:
            cs = self.field.format(c)
            if e.is_zero():
                parts.append(cs)
            else:
                es = f"t^({e})" if (e.b != 0 or e.a.denominator != 1) else f"t^{e}"
                if e == 1:
                    es = "t"
                parts.append(es if cs == "1" else f"{cs}*{es}")
        return " + ".join(parts)


def _exp_key(term):
    # exact comparator wrapper: GroupElement defines a total order
    class _K:
        __slots__ = ("e",)

        def __init__(self, e):
            self.e = e

        def __lt__(self, other):
            return self.e < other.e

    return _K(term[0])


def apply_poly(coeffs: list, arg: TPoly) -> TPoly:
    """Evaluate sum(coeffs[i] * x**i) at a polynomial argument, by Horner."""
    field, group = arg.field, arg.group
    out = TPoly.zero(field, group)
    for c in reversed(coeffs):
        out = out * arg + TPoly.constant(field, group, c)
    return out


# ---------------------------------------------------------------------------
# the fraction field K
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class KElement:
    """Quotient of two t-polynomials (an element of the fraction field)."""

    num: TPoly
    den: TPoly

    @staticmethod
    def make(num: TPoly, den: TPoly) -> "KElement":
        num._check(den)
        if den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if num.is_zero():
            return KElement(num, TPoly.one(num.field, num.group))
        # shift common t-power so min(v(num), v(den)) = 0, then make the
        # denominator's lowest coefficient 1
        m = num.valuation()
        if den.valuation() < m:
            m = den.valuation()
        if not m.is_zero():
            num = num.shift(-m)
            den = den.shift(-m)
        c = den.lowest_coeff()
        if c != num.field.one():
            inv = num.field.inv(c)
            num = num.scalar_mul(inv)
            den = den.scalar_mul(inv)
        return KElement(num, den)

    @staticmethod
    def from_tpoly(p: TPoly) -> "KElement":
        return KElement.make(p, TPoly.one(p.field, p.group))

    @staticmethod
    def t_power(field, group, exp) -> "KElement":
        """t**exp for any exponent in the divisible closure (negative allowed)."""
        if not isinstance(exp, GroupElement):
            exp = group.element(exp)
        if exp.sign() >= 0:
            return KElement.from_tpoly(TPoly.t_power(field, group, exp))
        return KElement.make(
            TPoly.one(field, group), TPoly.t_power(field, group, -exp)
        )

    @staticmethod
    def constant(field, group, c) -> "KElement":
        return KElement.from_tpoly(TPoly.constant(field, group, c))

    @staticmethod
    def zero(field, group) -> "KElement":
        return KElement.from_tpoly(TPoly.zero(field, group))

    @staticmethod
    def one(field, group) -> "KElement":
        return KElement.from_tpoly(TPoly.one(field, group))

    @property
    def field(self):
        return self.num.field

    @property
    def group(self):
        return self.num.group

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def valuation(self) -> GroupElement:
        return self.num.valuation() - self.den.valuation()

    def residue(self):
        """Leading coefficient ratio; for valuation 0 this is the image in k."""
        if self.is_zero():
            raise AlgebraError("zero has no residue")
        return self.field.div(self.num.lowest_coeff(), self.den.lowest_coeff())

    # -- arithmetic -------------------------------------------------------

    def __add__(self, other: "KElement") -> "KElement":
        return KElement.make(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    def __neg__(self) -> "KElement":
        return KElement(-self.num, self.den)

    def __sub__(self, other: "KElement") -> "KElement":
        return self + (-other)

    def __mul__(self, other: "KElement") -> "KElement":
        return KElement.make(self.num * other.num, self.den * other.den)

    def __truediv__(self, other: "KElement") -> "KElement":
        if other.is_zero():
            raise ZeroDivisionError("division by zero element of K")
        return KElement.make(self.num * other.den, self.den * other.num)

    def inverse(self) -> "KElement":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero")
        return KElement.make(self.den, self.num)

    def __pow__(self, n: int) -> "KElement":
        if n < 0:
            return self.inverse() ** (-n)
        return KElement.make(self.num**n, self.den**n)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KElement):
            return NotImplemented
        return (self.num * other.den) == (other.num * self.den)

    __hash__ = None

    def is_constant(self) -> bool:
        """True when the element lies in the coefficient field."""
        if self.is_zero():
            return True
        c = self.residue()
        return self.num == self.den.scalar_mul(c)

    def __str__(self) -> str:
        if self.den == TPoly.one(self.field, self.group):
            return str(self.num)
        return f"({self.num})/({self.den})"

    def __repr__(self) -> str:
        return f"<{self}>"


# ---------------------------------------------------------------------------
# parsing of element expressions
# ---------------------------------------------------------------------------

_TOKEN_CHARS = set("+-*/^()")


def _tokenize(text: str) -> list[str]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in _TOKEN_CHARS:
            tokens.append(ch)
            i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(text[i:j])
            i = j
        elif text.startswith("sqrt", i):
            tokens.append("sqrt")
            i += 4
        elif ch == "t":
            tokens.append("t")
            i += 1
        else:
            raise AlgebraError(f"unexpected character {ch!r} in element expression")
    return tokens


class _ElementParser:
    """Recursive-descent parser for element syntax like
    ``(t^(3/2) + 2*t^2 - t^(7/3))/(1 + t)`` with quadratic exponents
    ``t^(1+1*sqrt2)``."""

    def __init__(self, tokens: list[str], field: CoefficientField, group: Group):
        self.toks = tokens
        self.pos = 0
        self.field = field
        self.group = group

    def peek(self):
        return self.toks[self.pos] if self.pos < len(self.toks) else None

    def take(self, expected=None):
        tok = self.peek()
        if tok is None or (expected is not None and tok != expected):
            raise AlgebraError(f"bad element expression near token {tok!r}")
        self.pos += 1
        return tok

    # K-valued grammar

    def parse(self) -> KElement:
        out = self.expr()
        if self.peek() is not None:
            raise AlgebraError(f"trailing tokens from {self.peek()!r}")
        return out

    def expr(self) -> KElement:
        out = self.term()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> KElement:
        out = self.unary()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.unary()
            out = out * rhs if op == "*" else out / rhs
        return out

    def unary(self) -> KElement:
        if self.peek() == "-":
            self.take()
            return -self.unary()
        if self.peek() == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> KElement:
        base_tok = self.peek()
        if base_tok == "t":
            self.take()
            if self.peek() == "^":
                self.take()
                exp = self.exponent()
                return KElement.t_power(self.field, self.group, exp)
            return KElement.t_power(self.field, self.group, self.group.one())
        base = self.atom()
        if self.peek() == "^":
            self.take()
            neg = False
            if self.peek() == "-":
                self.take()
                neg = True
            n_tok = self.take()
            if not n_tok.isdigit():
                raise AlgebraError("only integer powers of general subexpressions")
            n = int(n_tok)
            return base ** (-n if neg else n)
        return base

    def atom(self) -> KElement:
        tok = self.peek()
        if tok == "(":
            self.take()
            out = self.expr()
            self.take(")")
            return out
        if tok is not None and tok.isdigit():
            self.take()
            return KElement.constant(self.field, self.group, self.field.from_int(int(tok)))
        raise AlgebraError(f"bad element expression near token {tok!r}")

    # exponent sub-grammar, valued in the group's divisible closure

    def exponent(self) -> GroupElement:
        if self.peek() == "(":
            self.take()
            out = self.gexpr()
            self.take(")")
            return out
        neg = False
        if self.peek() == "-":
            self.take()
            neg = True
        tok = self.take()
        if not tok.isdigit():
            raise AlgebraError("exponent must be an integer or a parenthesized value")
        val = self.group.element(int(tok))
        return -val if neg else val

    def gexpr(self) -> GroupElement:
        out = self.gterm()
        while self.peek() in ("+", "-"):
            op = self.take()
            rhs = self.gterm()
            out = out + rhs if op == "+" else out - rhs
        return out

    def gterm(self) -> GroupElement:
        out = self.gfactor()
        while self.peek() in ("*", "/"):
            op = self.take()
            rhs = self.gfactor()
            if op == "*":
                from .groups import ring_mul

                out = ring_mul(out, rhs)
            else:
                from .groups import ring_div

                out = ring_div(out, rhs)
        return out

    def gfactor(self) -> GroupElement:
        tok = self.peek()
        if tok == "-":
            self.take()
            return -self.gfactor()
        if tok == "(":
            self.take()
            out = self.gexpr()
            self.take(")")
            return out
        if tok == "sqrt":
            self.take()
            d_tok = self.take()
            if not d_tok.isdigit() or self.group.kind != "quadratic" or int(d_tok) != self.group.d:
                raise AlgebraError(f"sqrt{d_tok} does not live in {self.group}")
            return self.group.element(0, 1)
        if tok is not None and tok.isdigit():
            self.take()
            return self.group.element(int(tok))
        raise AlgebraError(f"bad exponent expression near {tok!r}")


def parse_element(text: str, field: CoefficientField, group: Group) -> KElement:
    return _ElementParser(_tokenize(text), field, group).parse()


# ---------------------------------------------------------------------------
# the localization D and membership certificates
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class DElement:
    """Certified member of D: numerator and denominator supported in the
    monoid with unit (valuation-zero) denominator.  Constructing the
    object is the certificate; validation is exact."""

    spec: MonoidSpec
    num: TPoly
    den: TPoly

    def __post_init__(self):
        if self.num.group != self.spec.group or self.den.group != self.spec.group:
            raise AlgebraError("group mismatch against the monoid")
        if self.den.is_zero():
            raise ZeroDivisionError("zero denominator")
        if not self.den.valuation().is_zero():
            raise AlgebraError("certificate denominator must have valuation 0")
        for e in self.num.exponents():
            if not self.spec.contains(e):
                raise AlgebraError(f"numerator exponent {e} lies outside the monoid")
        for e in self.den.exponents():
            if not self.spec.contains(e):
                raise AlgebraError(f"denominator exponent {e} lies outside the monoid")

    # -- constructors -----------------------------------------------------

    @staticmethod
    def from_poly(spec: MonoidSpec, p: TPoly) -> "DElement":
        return DElement(spec, p, TPoly.one(p.field, p.group))

    @staticmethod
    def t_power(spec: MonoidSpec, field: CoefficientField, exp) -> "DElement":
        if not isinstance(exp, GroupElement):
            exp = spec.group.element(exp)
        return DElement.from_poly(spec, TPoly.t_power(field, spec.group, exp))

    @staticmethod
    def one(spec: MonoidSpec, field: CoefficientField) -> "DElement":
        return DElement.from_poly(spec, TPoly.one(field, spec.group))

    @staticmethod
    def parse(spec: MonoidSpec, field: CoefficientField, text: str) -> "DElement":
        k = parse_element(text, field, spec.group)
        d = normalize_to_d(k, spec)
        if d is None:
            raise AlgebraError(f"cannot certify {text!r} as a member of D")
        return d

    # -- queries ------------------------------------------------------------

    @property
    def field(self):
        return self.num.field

    def to_k(self) -> KElement:
        return KElement.make(self.num, self.den)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def valuation(self) -> GroupElement:
        return self.num.valuation()  # the denominator has valuation 0

    def is_unit(self) -> bool:
        """Units of the localization are exactly the valuation-0 members."""
        return not self.is_zero() and self.valuation().is_zero()

    def mul(self, other: "DElement") -> "DElement":
        return DElement(self.spec, self.num * other.num, self.den * other.den)

    def divide_t_power(self, exp: GroupElement) -> "DElement":
        """Exact division by t**exp; every numerator exponent must absorb it."""
        return DElement(self.spec, self.num.shift(-exp), self.den)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DElement):
            return NotImplemented
        return self.spec == other.spec and self.to_k() == other.to_k()

    __hash__ = None

    def __str__(self) -> str:
        return str(self.to_k())

    def __repr__(self) -> str:
        return f"<{self} in D>"


def normalize_to_d(c: KElement, spec: MonoidSpec) -> DElement | None:
    """Certify membership of c in D, or return None without a claim.

    Two routes are tried.  If the presentation already has a unit
    denominator and all exponents in the monoid, it certifies directly.
    Otherwise, when v(c) clears the integrally terminal threshold delta
    (v(c) > delta, or v(c) = delta inside the monoid), the denominator is
    cleared by multiplying numerator and denominator with f(den - b0)
    where f(x) = (x**n + b0**n)/(x + b0) and n is odd with
    n * (least positive denominator exponent) > delta.  The resulting
    exponents are checked exactly before anything is returned.
    """
    if c.group != spec.group:
        raise AlgebraError("group mismatch against the monoid")
    field, group = c.field, c.group
    if c.is_zero():
        return DElement.from_poly(spec, TPoly.zero(field, group))
    v = c.valuation()
    if v.sign() < 0:
        return None
    # align to a unit denominator when the numerator allows it
    num, den = c.num, c.den
    dv = den.valuation()
    if not dv.is_zero():
        if (num.valuation() - dv).sign() < 0:
            return None
        num = num.shift(-dv)
        den = den.shift(-dv)
    b0 = den.lowest_coeff()
    inv = field.inv(b0)
    num = num.scalar_mul(inv)
    den = den.scalar_mul(inv)

    def finish(n: TPoly, d: TPoly) -> DElement | None:
        if all(spec.contains(e) for e in n.exponents()) and all(
            spec.contains(e) for e in d.exponents()
        ):
            return DElement(spec, n, d)
        return None

    direct = finish(num, den)
    if direct is not None:
        return direct

    delta = find_integrally_terminal(spec)
    if not (v > delta or (v == delta and spec.contains(delta))):
        return None

    positive_part = den - TPoly.constant(field, group, field.one())
    if positive_part.is_zero():
        return finish(num, den)  # constant denominator; exponent check decides
    eps = positive_part.valuation()
    # smallest odd n with n * eps > delta
    ratio = _group_ratio(delta, eps)
    n = ratio.floor() + 1
    if n % 2 == 0:
        n += 1
    # f(x) = (x**n + 1)/(x + 1) = x**(n-1) - x**(n-2) + ... + 1 for odd n
    f_coeffs = [field.from_int((-1) ** j) for j in range(n)]  # degree n-1, low first
    multiplier = apply_poly(list(reversed(f_coeffs)), positive_part)
    return finish(multiplier * num, multiplier * den)


def _group_ratio(x: GroupElement, y: GroupElement) -> GroupElement:
    from .groups import ring_div

    return ring_div(x, y)


# ---------------------------------------------------------------------------
# units, atoms, association
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomCheck:
    verdict: str  # "yes" | "no" | "unknown"
    split: tuple[DElement, DElement] | None = None
    reason: str = ""


def is_unit_of_d(x: DElement) -> bool:
    return x.is_unit()


def is_atom_of_d(x: DElement) -> AtomCheck:
    """Decide atomicity of a certified member from its valuation.

    A positive-valuation member whose value lies in the atom region of
    the monoid cannot split into two positive-valuation factors, hence is
    an atom.  Outside the atom region a concrete split t**s * (x / t**s)
    is searched with both parts certified; if none is found the verdict
    is left unknown rather than guessed.
    """
    if x.is_zero() or x.is_unit():
        raise AlgebraError("atom test applies to nonzero nonunits only")
    spec = x.spec
    v = x.valuation()
    atoms = monoid_atoms(spec)
    if region_contains(atoms, v):
        return AtomCheck("yes")
    split = _split_by_t_power(x)
    if split is not None:
        return AtomCheck("no", split=split)
    return AtomCheck(
        "unknown", reason="no certified split found; membership tools are silent here"
    )


def _split_by_t_power(x: DElement) -> tuple[DElement, DElement] | None:
    spec = x.spec
    group = spec.group
    v = x.valuation()
    delta = find_integrally_terminal(spec)
    delta_in = spec.contains(delta)
    for a in spec.intervals:
        for b in spec.intervals:
            window = a.intersect(
                Interval(
                    None if b.hi is None else v - b.hi,
                    v - b.lo,
                    lo_closed=(b.hi_closed if b.hi is not None else False),
                    hi_closed=b.lo_closed,
                )
            )
            if window is None:
                continue
            # route 1: leave the cofactor above the terminal threshold
            cap = window.intersect(
                Interval(None, v - delta, lo_closed=False, hi_closed=delta_in)
            )
            if cap is not None:
                s = cap.lattice_point(group)
                if s is not None and s.sign() > 0:
                    cof = normalize_to_d(
                        x.to_k() / KElement.t_power(x.field, group, s), spec
                    )
                    if cof is not None:
                        return (DElement.t_power(spec, x.field, s), cof)
            # route 2: shift the numerator exponents directly into the monoid
            constraint: tuple = (window,)
            for e in x.num.exponents():
                shifted = tuple(
                    Interval(
                        None if iv.hi is None else e - iv.hi,
                        e - iv.lo,
                        lo_closed=(iv.hi_closed if iv.hi is not None else False),
                        hi_closed=iv.lo_closed,
                    )
                    for iv in spec.intervals
                ) + (Interval(e, e),)  # shifting by e itself leaves exponent 0
                constraint = region_intersect(constraint, region(*shifted))
                if not constraint:
                    break
            if constraint:
                from .intervals import region_lattice_point

                s = region_lattice_point(group, constraint)
                if s is not None and s.sign() > 0 and spec.contains(s):
                    try:
                        cof = x.divide_t_power(s)
                    except AlgebraError:
                        continue
                    return (DElement.t_power(spec, x.field, s), cof)
    return None


def unit_verdict(q: KElement, spec: MonoidSpec) -> str:
    """Three-valued test for q being a unit of D: "yes", "no", "unknown".

    "yes" needs certificates for q and 1/q; "no" follows from a nonzero
    valuation or from the residue witness v(q - q(0)) outside the monoid,
    which rules out membership of q (or symmetrically of 1/q) in D.
    """
    if q.is_zero():
        return "no"
    if q.valuation().sign() != 0:
        return "no"
    if q.is_constant():
        return "yes"
    qd = normalize_to_d(q, spec)
    if qd is not None:
        qdi = normalize_to_d(q.inverse(), spec)
        if qdi is not None:
            return "yes"
    for cand in (q, q.inverse()):
        c0 = cand.residue()
        rem = cand - KElement.constant(cand.field, cand.group, c0)
        if rem.is_zero():
            return "yes"
        # members of D take valuations inside the monoid, and subtracting a
        # constant keeps membership; a stray valuation rules the quotient out
        if not spec.contains(rem.valuation()):
            return "no"
    return "unknown"


def assoc_d(x: DElement, y: DElement) -> str:
    """Association test in D, three-valued."""
    if x.spec != y.spec:
        raise AlgebraError("factors live over different monoids")
    if x.is_zero() or y.is_zero():
        raise AlgebraError("association is about nonzero elements")
    return unit_verdict(x.to_k() / y.to_k(), x.spec)


# ---------------------------------------------------------------------------
# factorizations in D
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DFactorization:
    target: DElement
    factors: tuple[DElement, ...]

    def __post_init__(self):
        if not self.factors:
            raise AlgebraError("a factorization needs at least one factor")

    @property
    def length(self) -> int:
        return len(self.factors)

    def product(self) -> KElement:
        out = KElement.one(self.target.field, self.target.spec.group)
        for f in self.factors:
            out = out * f.to_k()
        return out

    def is_exact(self) -> bool:
        return self.product() == self.target.to_k()

    def __str__(self) -> str:
        return " * ".join(f"({f})" for f in self.factors)


class LengthOutsideSet(AlgebraError):
    pass


def factor_in_d(x: DElement, ell: int) -> DFactorization:
    """Explicit length-ell factorization over the one-gap monoid.

    Produces ell - 1 copies of t**(v/ell) and the cofactor
    x / t**((ell-1)v/ell); every factor has valuation v/ell inside the
    atom interval [1, 2).
    """
    spec = x.spec
    if not is_one_gap(spec):
        raise MonoidError("explicit factorizations require the one-gap monoid")
    if x.is_zero() or x.is_unit():
        raise AlgebraError("factorization applies to nonzero nonunits")
    v = x.valuation()
    allowed = length_set_closed_form(spec, v)
    if ell not in allowed:
        raise LengthOutsideSet(f"length {ell} outside {allowed} for value {v}")
    part = v.scale(Fraction(1, ell))
    tp = TPoly.t_power(x.field, spec.group, part)
    try:
        DElement.from_poly(spec, tp)
    except AlgebraError as exc:
        raise AlgebraError(
            f"t-power exponent {part} is not certifiable over {spec.group}; "
            "equal splits need a divisible exponent lattice"
        ) from exc
    factors = [DElement.from_poly(spec, tp) for _ in range(ell - 1)]
    cof = x.divide_t_power(part.scale(ell - 1))
    factors.append(cof)
    out = DFactorization(x, tuple(factors))
    if not out.is_exact():  # pragma: no cover - construction is exact by design
        raise AssertionError("factorization does not multiply back")
    return out


def canonical_t_heavy(x: DElement) -> DFactorization:
    """floor(v)-1 copies of t and one cofactor; the chain target."""
    spec = x.spec
    if not is_one_gap(spec):
        raise MonoidError("canonical factorization requires the one-gap monoid")
    v = x.valuation()
    if v < spec.group.one():
        raise AlgebraError("value below the atom range")
    m = v.floor() - 1
    if m == 0:
        return DFactorization(x, (x,))
    t_one = DElement.t_power(spec, x.field, spec.group.one())
    cof = x.divide_t_power(spec.group.element(m))
    return DFactorization(x, tuple([t_one] * m + [cof]))


def distance(z1: DFactorization, z2: DFactorization) -> int:
    """Factorization distance after grouping factors into association classes."""
    if z1.target != z2.target:
        raise AlgebraError("distance requires factorizations of the same element")
    facs = list(z1.factors) + list(z2.factors)
    n1 = len(z1.factors)
    parent = list(range(len(facs)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(facs)):
        for j in range(i + 1, len(facs)):
            if find(i) == find(j):
                continue
            verdict = assoc_d(facs[i], facs[j])
            if verdict == "yes":
                parent[find(i)] = find(j)
            elif verdict == "unknown":
                raise AssociationUndecided(
                    f"cannot decide association of {facs[i]} and {facs[j]}"
                )
    counts1: dict[int, int] = {}
    counts2: dict[int, int] = {}
    for i in range(len(facs)):
        root = find(i)
        if i < n1:
            counts1[root] = counts1.get(root, 0) + 1
        else:
            counts2[root] = counts2.get(root, 0) + 1
    shared = sum(min(c, counts2.get(r, 0)) for r, c in counts1.items())
    return max(len(z1.factors) - shared, len(z2.factors) - shared)


def _assoc_to_t(f: DElement) -> str:
    t_one = DElement.t_power(f.spec, f.field, f.spec.group.one())
    return assoc_d(f, t_one)


def chain_to_canonical(x: DElement, z: DFactorization) -> list[DFactorization]:
    """Chain of factorizations with step distance <= 3 ending t-heavy.

    Repeatedly picks two factors not associate to t and replaces their
    product P by (t, P/t) when 2 <= v(P) < 3 and by (t, t, P/t**2) when
    3 <= v(P) < 4; each step strictly increases the number of factors
    associate to t.
    """
    spec = x.spec
    if not z.is_exact():
        raise AlgebraError("input factorization does not multiply to the target")
    chain = [z]
    current = z
    t_one = DElement.t_power(spec, x.field, spec.group.one())
    while True:
        flags = [_assoc_to_t(f) for f in current.factors]
        if any(fl == "unknown" for fl in flags):
            raise AssociationUndecided("cannot classify a factor against t")
        non_t = [i for i, fl in enumerate(flags) if fl == "no"]
        if len(non_t) <= 1:
            break
        i, j = non_t[0], non_t[1]
        rest = [f for k, f in enumerate(current.factors) if k not in (i, j)]
        prod = current.factors[i].mul(current.factors[j])
        vp = prod.valuation()
        if vp >= spec.group.element(3):
            repl = [t_one, t_one, prod.divide_t_power(spec.group.element(2))]
        else:
            repl = [t_one, prod.divide_t_power(spec.group.one())]
        current = DFactorization(x, tuple(rest + repl))
        chain.append(current)
    canon = canonical_t_heavy(x)
    if distance(chain[-1], canon) != 0:  # pragma: no cover - procedure invariant
        raise AssertionError("chain endpoint is not the canonical factorization")
    if [str(f) for f in chain[-1].factors] != [str(f) for f in canon.factors]:
        chain.append(canon)
    return chain


def three_chain(
    x: DElement, z1: DFactorization, z2: DFactorization | None = None
) -> list[DFactorization]:
    """Chain between two factorizations through the canonical one."""
    first = chain_to_canonical(x, z1)
    if z2 is None:
        return first
    second = chain_to_canonical(x, z2)
    back = list(reversed(second))
    if first and back and distance(first[-1], back[0]) == 0:
        back = back[1:]
    return first + back
