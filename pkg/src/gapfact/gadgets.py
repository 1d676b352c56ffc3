"""Engineered integer-valued rational functions with exact value profiles,
and the factorization invariants of their ring over gap-monoid bases.

A value profile records v(phi(a)) as an exact function of v(a).  The
constructors here guarantee that exactness: ramp functions built from a
unit-valued polynomial (divisible value groups) or from a p-th power
shift whose tie abscissas fall outside the group (non-divisible ones),
and the cube-shift function used over discrete valuation rings.
Membership certificates, atom certificates, explicit length-l
factorizations, length-set sandwich bounds, strict-divisor witnesses,
and 3-chain constructions are all derived from the profiles and checked
exactly; wherever the available tools cannot decide, the verdict is
"unknown" rather than a guess.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction

from .groups import Group, GroupElement, lattice_point_between
from .intervals import Interval, Region, region, region_contains, region_intersect, region_subtract
from .algebra import (
    AlgebraError,
    AssociationUndecided,
    CoefficientField,
    DElement,
    KElement,
    PrimeField,
    RationalField,
    TPoly,
    normalize_to_d,
    unit_verdict,
)
from .minval import Affine, PiecewiseLinear, RationalFunction, minval_of
from .monoids import (
    BoundedAway,
    ClosureReport,
    LengthSet,
    MonoidError,
    MonoidSpec,
    bounded_away_from_zero,
    check_closure,
    find_integrally_terminal,
    has_no_minimal_positive,
    is_integrally_terminal_for,
    is_one_gap,
    length_set_closed_form,
    monoid_atoms,
)


class GadgetError(ValueError):
    pass


class FlatViolation(GadgetError):
    """A non-constant profile takes a value in a gap-adjacent zone.

    No member of the ring can do that: a single value strictly below a
    gap of the monoid pins the whole profile to that value.
    """


class NotCertified(GadgetError):
    """An operation needing a membership certificate received none."""


# ---------------------------------------------------------------------------
# value profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ValueProfile:
    """Exact description of v(phi(a)) as a function of gamma = v(a).

    ``exact_on`` is "closure" when the prediction holds at every abscissa
    of the divisible closure, or "lattice" when it holds at every group
    abscissa with the finitely many ``excluded`` closure points (none of
    which lie in the group) carrying no claim.
    """

    pl: PiecewiseLinear
    exact_on: str = "closure"  # "closure" | "lattice"
    excluded: tuple[GroupElement, ...] = ()

    def __post_init__(self):
        if self.exact_on not in ("closure", "lattice"):
            raise GadgetError(f"unknown exactness kind {self.exact_on!r}")
        for x in self.excluded:
            if x.in_lattice():
                raise GadgetError(f"excluded abscissa {x} lies in the group")

    @staticmethod
    def constant(group: Group, value: GroupElement) -> "ValueProfile":
        return ValueProfile(PiecewiseLinear.constant(group, value))

    @property
    def group(self) -> Group:
        return self.pl.group

    def value_at(self, gamma: GroupElement) -> GroupElement:
        if any(gamma == x for x in self.excluded):
            raise GadgetError(f"no exact claim at excluded abscissa {gamma}")
        return self.pl.evaluate(gamma)

    def infimum(self) -> GroupElement:
        mn = self.pl.infimum()
        if mn is None:
            raise GadgetError("profile is unbounded below")
        return mn

    def infimum_attained(self) -> bool:
        """Whether some group abscissa attains the infimum.

        True when the minimum sits on a horizontal piece (dense groups
        provide abscissas there); a minimum occurring only at excluded or
        non-lattice breakpoints is approached, not attained.
        """
        mn, _ = self.pl.minimum()
        if mn is None:
            return False
        for i, piece in enumerate(self.pl.pieces):
            if piece.slope == 0 and piece.intercept == mn:
                return True
        for b in self.pl.breakpoints:
            if self.pl.evaluate(b) == mn and b.in_lattice() and not any(
                b == x for x in self.excluded
            ):
                return True
        return False

    def is_constant(self) -> bool:
        return self.pl.is_constant()

    def is_identically_zero(self) -> bool:
        return self.pl.is_identically_zero()

    # -- attained values ---------------------------------------------------

    def plateau_values(self) -> list[GroupElement]:
        return [p.intercept for p in self.pl.pieces if p.slope == 0]

    def slope_value_intervals(self) -> list[Interval]:
        """Open intervals of values swept by the non-horizontal pieces.

        Values are attained on a dense subset of these intervals, so any
        nondegenerate overlap with a target region contains genuinely
        attained values; endpoints are deliberately left out.
        """
        out = []
        bps = self.pl.breakpoints
        for i, piece in enumerate(self.pl.pieces):
            if piece.slope == 0:
                continue
            left = bps[i - 1] if i > 0 else None
            right = bps[i] if i < len(bps) else None
            lo_val = piece.at(left) if left is not None else None
            hi_val = piece.at(right) if right is not None else None
            if piece.slope < 0:
                lo_val, hi_val = hi_val, lo_val
            out.append(Interval(lo_val, hi_val, lo_closed=False, hi_closed=False))
        return out

    def attains_value_in(self, target: Region) -> bool:
        """True when some group abscissa provably maps into the region."""
        for v in self.plateau_values():
            if region_contains(target, v):
                return True
        for iv in self.slope_value_intervals():
            hit = region_intersect((iv,), target)
            if any(not piece.is_degenerate() for piece in hit):
                return True
        return False

    # -- arithmetic ----------------------------------------------------------

    def _combine(self, other: "ValueProfile", pl: PiecewiseLinear) -> "ValueProfile":
        if self.exact_on == "closure" and other.exact_on == "closure":
            return ValueProfile(pl, "closure", ())
        excl = tuple(self.excluded) + tuple(
            x for x in other.excluded if all(x != y for y in self.excluded)
        )
        return ValueProfile(pl, "lattice", excl)

    def add(self, other: "ValueProfile") -> "ValueProfile":
        return self._combine(other, self.pl + other.pl)

    def sub(self, other: "ValueProfile") -> "ValueProfile":
        return self._combine(other, self.pl - other.pl)

    def scale_int(self, n: int) -> "ValueProfile":
        return ValueProfile(self.pl.scale_int(n), self.exact_on, self.excluded)

    def add_constant(self, c: GroupElement) -> "ValueProfile":
        return ValueProfile(self.pl.add_constant(c), self.exact_on, self.excluded)

    def shift_right(self, delta: GroupElement) -> "ValueProfile":
        return ValueProfile(
            self.pl.shift_right(delta),
            self.exact_on,
            tuple(x + delta for x in self.excluded),
        )

    def to_json(self) -> dict:
        return {
            "piecewise": self.pl.to_json(),
            "exact_on": self.exact_on,
            "excluded": [str(x) for x in self.excluded],
        }


def flat_zone(spec: MonoidSpec) -> Region:
    """Monoid values pinned by the constant-profile rule.

    A positive value of the monoid lying strictly below a gap with group
    points inside forces any member attaining it to have a constant
    profile.  For the one-gap monoid the zone is empty.
    """
    if len(spec.intervals) < 2 or not spec.group.has_no_minimal_positive:
        return ()
    gap_lo = spec.intervals[-2].hi
    gap_hi = spec.intervals[-1].lo
    if gap_lo is None or not (gap_lo < gap_hi):
        return ()
    below = Interval(spec.group.zero(), gap_hi, lo_closed=False, hi_closed=False)
    return region_intersect(spec.positive_region, (below,))


# ---------------------------------------------------------------------------
# elements of the integer-valued rational function ring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntRElement:
    """A rational function with an exact value profile and certificates.

    ``certificate`` is "intr_d" when every evaluation provably lands in
    the base ring D (threshold rule, or a constant with its own
    certified presentation), "intr_v" when evaluations provably land in
    the valuation ring (profile nonnegative), and "none" otherwise.
    """

    spec: MonoidSpec
    field: CoefficientField
    func: RationalFunction
    profile: ValueProfile
    certificate: str
    alpha: GroupElement
    alpha_attained: bool
    d_constant: DElement | None = None
    label: dict = dc_field(default_factory=dict)

    def is_certified_d(self) -> bool:
        return self.certificate == "intr_d"

    def is_certified_v(self) -> bool:
        return self.certificate in ("intr_d", "intr_v")

    def is_unit(self) -> bool:
        """Units of the local ring are exactly the all-zero profiles."""
        return self.is_certified_d() and self.profile.is_identically_zero()

    def mul(self, other: "IntRElement") -> "IntRElement":
        return make_element(
            self.spec,
            self.field,
            self.func * other.func,
            self.profile.add(other.profile),
            label={"kind": "product", "of": [self.label, other.label]},
        )

    def div(self, other: "IntRElement") -> "IntRElement":
        return make_element(
            self.spec,
            self.field,
            self.func / other.func,
            self.profile.sub(other.profile),
            label={"kind": "quotient", "of": [self.label, other.label]},
        )

    def evaluate(self, a: KElement) -> KElement:
        return self.func.evaluate(a)

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "profile": self.profile.to_json(),
            "certificate": self.certificate,
            "alpha": str(self.alpha),
            "alpha_attained": self.alpha_attained,
        }

    def __str__(self) -> str:
        kind = self.label.get("kind", "element")
        return f"<{kind}: alpha={self.alpha}, {self.certificate}>"


def _certificate_for(spec: MonoidSpec, profile: ValueProfile) -> str:
    """Threshold membership rule applied to the whole value range.

    Every evaluation value w >= vmin; if vmin clears the integrally
    terminal threshold, each evaluation lies in D pointwise.  When the
    monoid contains every positive group element, D coincides with the
    valuation ring and nonnegativity suffices.
    """
    vmin = profile.pl.minimum()[0]
    if vmin is None:
        return "none"
    zero = spec.group.zero()
    if vmin < zero:
        return "none"
    delta = find_integrally_terminal(spec)
    if vmin > delta or (vmin == delta and spec.contains(delta)):
        return "intr_d"
    if is_integrally_terminal_for(spec, zero) and spec.contains(zero):
        # the base ring is the full valuation ring here
        return "intr_d"
    return "intr_v"


def make_element(
    spec: MonoidSpec,
    field: CoefficientField,
    func: RationalFunction,
    profile: ValueProfile,
    label: dict | None = None,
    d_constant: DElement | None = None,
) -> IntRElement:
    """Assemble an element, enforcing the constant-profile (flat) rule."""
    if not profile.is_constant() and profile.attains_value_in(flat_zone(spec)):
        raise FlatViolation(
            "a non-constant profile attains a value below a monoid gap; "
            "no member of the ring can do that"
        )
    cert = _certificate_for(spec, profile)
    if d_constant is not None:
        cert = "intr_d"
    alpha = profile.infimum()
    return IntRElement(
        spec,
        field,
        func,
        profile,
        cert,
        alpha,
        profile.infimum_attained(),
        d_constant=d_constant,
        label=label or {},
    )


def constant_element(spec: MonoidSpec, d: DElement, label: dict | None = None) -> IntRElement:
    """A constant of D viewed inside the rational-function ring."""
    if d.is_zero():
        raise GadgetError("the zero constant is not a factorization subject")
    k = d.to_k()
    func = RationalFunction.constant(k)
    profile = ValueProfile.constant(spec.group, d.valuation())
    return make_element(
        spec, d.field, func, profile,
        label=label or {"kind": "constant", "value": str(d)},
        d_constant=d,
    )


# ---------------------------------------------------------------------------
# hypothesis checking
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HypothesisReport:
    spec: MonoidSpec
    field_name: str
    positive: bool
    closure: ClosureReport
    bounded_away: BoundedAway | None
    bf_certified: bool
    dense_group: bool
    all_pass: bool
    conclusion: str

    def to_json(self) -> dict:
        return {
            "monoid": str(self.spec),
            "field": self.field_name,
            "positive": self.positive,
            "closed_under_addition": self.closure.closed,
            "closure_witness": None
            if self.closure.closed
            else self.closure.witness_text(),
            "bounded_away_from_zero": None
            if self.bounded_away is None
            else str(self.bounded_away.gamma),
            "bounded_factorization": self.bf_certified,
            "group_dense": self.dense_group,
            "all_pass": self.all_pass,
            "conclusion": self.conclusion,
        }


def check_atomic_hypotheses(spec: MonoidSpec, field: CoefficientField) -> HypothesisReport:
    """Verify the structural hypotheses making the function ring local and atomic.

    Positivity and closure make the monoid a genuine value monoid;
    a positive lower bound gamma forces every factorization length of a
    value v below v/gamma (bounded factorization); density of the group
    rules out a principal maximal ideal in the valuation overring.  When
    all hold, the ring of integer-valued rational functions over the base
    is local (valuation-gap dichotomy) and atomic (induction on longest
    base-ring lengths).
    """
    closure = check_closure(spec)
    ba = bounded_away_from_zero(spec)
    dense = has_no_minimal_positive(spec.group)
    positive = all(iv.lo > spec.group.zero() for iv in spec.intervals)
    bf = ba is not None
    all_pass = positive and closure.closed and bf and dense
    if all_pass:
        conclusion = (
            "local and atomic: the valuation gap above 0 forces the"
            " zero-or-positive profile dichotomy (locality), and lengths are"
            f" bounded by value/{ba.gamma} (atomicity by induction)"
        )
    else:
        conclusion = "hypotheses fail; no locality or atomicity certificate"
    return HypothesisReport(
        spec, field.name, positive, closure, ba, bf, dense, all_pass, conclusion
    )


# ---------------------------------------------------------------------------
# ramp gadget (two plateaus joined by a fixed slope)
# ---------------------------------------------------------------------------


_UNIT_VALUED_CACHE: dict = {}


def _unit_valued_polynomial(field: CoefficientField) -> list:
    """A monic nonconstant polynomial with unit values on the valuation ring.

    The residue polynomial must have no root in the coefficient field:
    x**q - x + 1 over F_q (never zero by the Frobenius identity) and
    x**2 + 1 over the rationals (no rational root).  The no-root property
    is verified, not assumed.
    """
    key = field.name
    if key in _UNIT_VALUED_CACHE:
        return _UNIT_VALUED_CACHE[key]
    if isinstance(field, PrimeField):
        q = field.p
        coeffs = [field.from_int(0)] * (q + 1)
        coeffs[0] = field.from_int(1)
        coeffs[1] = field.from_int(-1)
        coeffs[q] = field.from_int(1)
        for a in field.elements():
            val = 0
            for c in reversed(coeffs):
                val = field.add(field.mul(val, a), c)
            if field.is_zero(val):
                raise GadgetError("candidate polynomial has a root; not unit-valued")
    elif isinstance(field, RationalField):
        coeffs = [Fraction(1), Fraction(0), Fraction(1)]  # x^2 + 1
        for r in (Fraction(1), Fraction(-1)):  # rational root test: divisors of 1
            val = sum(c * r**i for i, c in enumerate(coeffs))
            if val == 0:
                raise GadgetError("candidate polynomial has a rational root")
    else:  # pragma: no cover - only the two field kinds exist
        raise GadgetError(f"no unit-valued polynomial rule for {field!r}")
    _UNIT_VALUED_CACHE[key] = coeffs
    return coeffs


def _least_ramp_plateau(
    group: Group, alpha: GroupElement, alpha_prime: GroupElement,
    eps: GroupElement, p: int,
) -> GroupElement:
    """Finest-coefficient lattice value a'' in (max(a'-eps, a), a'] with
    (a'' - a)/p in the group.

    The admissible set is dense, so a true order-minimum does not exist;
    the search scans quadratic coordinates by growing |b| and returns the
    smallest hit at the first level that has one, which is deterministic.
    """
    window_lo = alpha_prime - eps
    if window_lo < alpha:
        window_lo = alpha
    g_lo = (window_lo - alpha).scale(Fraction(1, p))
    g_hi = (alpha_prime - alpha).scale(Fraction(1, p))
    if group.kind != "quadratic":
        raise GadgetError("the non-divisible construction runs over quadratic lattices")
    d = group.d
    for absb in range(0, 10_000):
        hits = []
        for b in {absb, -absb}:
            broot = group.element(0, b)
            lo = g_lo - broot
            hi = g_hi - broot
            a_first = lo.floor() + 1
            a_last = hi.floor()
            for a in range(a_first, a_last + 1):
                g = group.element(a, b)
                if g_lo < g <= g_hi:
                    hits.append(alpha + g.scale(p))
        if hits:
            return min(hits)
    raise GadgetError("plateau search exhausted its bound")  # pragma: no cover


def gadget_ramp(
    spec: MonoidSpec,
    field: CoefficientField,
    alpha: GroupElement,
    alpha_prime: GroupElement,
    eps: GroupElement | None = None,
    case: int | None = None,
    shift: GroupElement | None = None,
) -> IntRElement:
    """Function whose value profile ramps from plateau alpha up to a
    plateau near alpha_prime.

    Over a divisible group (case 1) the construction is
    b*c**n*f(x/c)/f(x) for a unit-valued f of degree n, v(b) = alpha,
    v(c) = (alpha_prime - alpha)/n; the top plateau equals alpha_prime
    exactly and the profile is exact at every closure abscissa.  Over a
    non-divisible group (case 2) it is b*(x**p + c*c')/(x**p + c') with
    v(c') a positive value mu where mu/p leaves the group; the top
    plateau is a group value a'' with alpha_prime - eps < a'' <=
    alpha_prime, and the two tie abscissas fall outside the group, so
    the profile is exact at every group abscissa.
    """
    group = spec.group
    if not group.has_no_minimal_positive:
        raise GadgetError("ramp construction needs a dense value group")
    if not (alpha >= group.zero() and alpha < alpha_prime):
        raise GadgetError("need 0 <= alpha < alpha_prime")
    if not alpha.in_lattice():
        raise GadgetError("the low plateau must be a group value")
    if case is None:
        case = 1 if group.is_divisible else 2
    if eps is None:
        eps = (alpha_prime - alpha).scale(Fraction(1, 2))
    if not (eps > group.zero()):
        raise GadgetError("eps must be positive")

    t_pow = lambda e: KElement.t_power(field, group, e)
    zero_k = KElement.zero(field, group)

    if case == 1:
        if not group.is_divisible:
            raise GadgetError("case 1 needs a divisible value group")
        f_coeffs = _unit_valued_polynomial(field)
        n = len(f_coeffs) - 1
        c_exp = (alpha_prime - alpha).scale(Fraction(1, n))
        num = []
        den = []
        for i, fc in enumerate(f_coeffs):
            den.append(KElement.constant(field, group, fc))
            if field.is_zero(fc):
                num.append(zero_k)
            else:
                # b * c**n * f_i * c**(-i) = f_i * t**(alpha + (n-i)*c_exp)
                e = alpha + c_exp.scale(n - i)
                num.append(KElement.constant(field, group, fc) * t_pow(e))
        func = RationalFunction.make(tuple(num), tuple(den))
        pl = PiecewiseLinear(
            (group.zero(), c_exp),
            (Affine(0, alpha), Affine(n, alpha), Affine(0, alpha_prime)),
        )
        profile = ValueProfile(pl, "closure", ())
        top = alpha_prime
        params = {"case": 1, "degree": n}
    elif case == 2:
        if group.is_divisible:
            raise GadgetError("case 2 needs a non-divisible value group")
        p = 2
        mu = group.one()
        if mu.scale(Fraction(1, p)).in_lattice():
            raise GadgetError("mu/p unexpectedly lies in the group")  # pragma: no cover
        top = _least_ramp_plateau(group, alpha, alpha_prime, eps, p)
        b1 = mu.scale(Fraction(1, p))
        b2 = (mu + top - alpha).scale(Fraction(1, p))
        if b2.in_lattice():
            raise GadgetError("tie abscissa lies in the group")  # pragma: no cover
        num = [t_pow(alpha + (top - alpha) + mu)] + [zero_k] * (p - 1) + [t_pow(alpha)]
        den = [t_pow(mu)] + [zero_k] * (p - 1) + [KElement.one(field, group)]
        func = RationalFunction.make(tuple(num), tuple(den))
        pl = PiecewiseLinear(
            (b1, b2), (Affine(0, alpha), Affine(p, alpha - mu), Affine(0, top))
        )
        profile = ValueProfile(pl, "lattice", (b1, b2))
        params = {"case": 2, "p": p, "mu": str(mu)}
    else:
        raise GadgetError(f"unknown ramp case {case}")

    if minval_of(func) != profile.pl:  # pragma: no cover - construction identity
        raise AssertionError("declared profile disagrees with the envelope")

    if shift is not None and not shift.is_zero():
        func = func.scale_argument(t_pow(shift))
        profile = profile.shift_right(shift)

    label = {
        "kind": "ramp",
        "alpha": str(alpha),
        "alpha_prime": str(alpha_prime),
        "plateau": str(top),
        "eps": str(eps),
        "shift": str(shift) if shift is not None else "0",
        **params,
    }
    return make_element(spec, field, func, profile, label=label)


def ramp_top_plateau(elem: IntRElement) -> GroupElement:
    """The high plateau value of a ramp element."""
    return elem.profile.pl.pieces[-1].intercept


# ---------------------------------------------------------------------------
# cube-shift gadget (discrete maximal ideal)
# ---------------------------------------------------------------------------


def gadget_cube_shift(
    spec: MonoidSpec,
    field: CoefficientField,
    b: KElement,
    t_exp: GroupElement | None = None,
) -> IntRElement:
    """(x**3 + b**3*T**2) / (x**3 + b**3*T) for T = t**t_exp.

    Exactness on the group needs an empty group slice strictly between
    v(b) + t_exp/3 and v(b) + 2*t_exp/3, which holds exactly when t_exp
    is a minimal positive group element; this is verified, not assumed.
    The profile is 0 below the first tie abscissa and t_exp above the
    second one, ramping with slope 3 in between.
    """
    group = spec.group
    t_exp = group.one() if t_exp is None else t_exp
    vb = b.valuation()
    b1 = vb + t_exp.scale(Fraction(1, 3))
    b2 = vb + t_exp.scale(Fraction(2, 3))
    if lattice_point_between(group, b1, b2) is not None:
        raise GadgetError(
            "group points exist between the tie abscissas; the profile"
            " would not be exact (t_exp must generate the positive part)"
        )
    cube = b**3
    tpow = KElement.t_power(field, group, t_exp)
    one = KElement.one(field, group)
    zero = KElement.zero(field, group)
    num = (cube * tpow * tpow, zero, zero, one)
    den = (cube * tpow, zero, zero, one)
    func = RationalFunction.make(num, den)
    pl = PiecewiseLinear(
        (b1, b2),
        (
            Affine(0, group.zero()),
            Affine(3, -(vb.scale(3) + t_exp)),
            Affine(0, t_exp),
        ),
    )
    profile = ValueProfile(pl, "lattice", (b1, b2))
    if minval_of(func) != pl:  # pragma: no cover - construction identity
        raise AssertionError("declared profile disagrees with the envelope")
    label = {"kind": "cube_shift", "vb": str(vb), "t_exp": str(t_exp)}
    return make_element(spec, field, func, profile, label=label)


# ---------------------------------------------------------------------------
# atom certification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomVerdict:
    verdict: str  # "yes" | "no" | "unknown"
    split: tuple | None = None
    reason: str = ""


def _part_windows(spec: MonoidSpec, value: GroupElement) -> Region:
    """Possible first summands w with w and value - w both positive monoid
    values, at interval resolution."""
    pieces = []
    for a in spec.intervals:
        for b in spec.intervals:
            window = a.intersect(
                Interval(
                    None if b.hi is None else value - b.hi,
                    value - b.lo,
                    lo_closed=(b.hi_closed if b.hi is not None else False),
                    hi_closed=b.lo_closed,
                )
            )
            if window is not None:
                pieces.append(window)
    return region(*pieces)


def atom_certify(phi: IntRElement) -> AtomVerdict:
    """Certified atom test for members of the function ring.

    Two sufficient conditions are checked.  First, a provably attained
    value inside the monoid's atom region: such a value cannot split as
    a sum of two positive monoid values, and in the local ring both
    factors of a genuine split take positive values everywhere.  Second,
    the gap argument: when every binary decomposition of the infimum
    value lands both parts in the flat zone, each factor of a split
    would be pinned to a constant profile, forcing the whole profile
    constant; a non-constant profile is then an atom.  Reducibility is
    certified by an explicit split.  Anything else stays unknown.
    """
    if not phi.is_certified_d():
        raise NotCertified("atom test needs a membership certificate")
    if phi.is_unit() or phi.profile.is_identically_zero():
        raise GadgetError("units are not factorization subjects")
    spec = phi.spec
    atoms = monoid_atoms(spec)
    if phi.profile.attains_value_in(atoms):
        return AtomVerdict("yes", reason="attains a value in the atom region")
    if not phi.profile.is_constant():
        v0 = phi.alpha
        if phi.profile.infimum_attained():
            windows = _part_windows(spec, v0)
            zone = flat_zone(spec)
            if windows and not region_subtract(windows, zone):
                return AtomVerdict(
                    "yes",
                    reason="every split of the infimum value lands in the flat"
                    " zone, pinning both factors constant",
                )
    if is_one_gap(spec) and phi.alpha >= spec.group.element(2):
        split = factorization_intr(phi, 2)
        return AtomVerdict("no", split=tuple(split), reason="explicit split")
    return AtomVerdict("unknown", reason="no certificate either way")


# ---------------------------------------------------------------------------
# length sets and explicit factorizations in the function ring
# ---------------------------------------------------------------------------


def length_set_intr(phi: IntRElement) -> LengthSet:
    """Lengths of a certified member over the one-gap monoid:
    {2..floor(alpha)} when alpha >= 2, {1} when 1 <= alpha < 2."""
    spec = phi.spec
    if not is_one_gap(spec):
        raise MonoidError("the closed form requires the one-gap monoid")
    if not phi.is_certified_d():
        raise NotCertified("length set needs a membership certificate")
    alpha = phi.alpha
    one = spec.group.one()
    if phi.profile.is_identically_zero():
        raise GadgetError("the element is a unit; no factorization lengths")
    if alpha < one:
        raise GadgetError(f"inconsistent certified element with alpha={alpha}")
    if alpha < spec.group.element(2):
        return LengthSet(1, 1)
    return LengthSet(2, alpha.floor())


def factorization_intr(phi: IntRElement, ell: int) -> list[IntRElement]:
    """Explicit product of ell certified atoms equal to phi (one-gap base).

    Lengths realizable through constants use equal t-power parts; the
    remaining short lengths use ell - 1 ramp atoms with low plateau 1
    positioned so the quotient's infimum stays inside [1, 2).  The
    product is exact by construction and re-verified.
    """
    spec, field = phi.spec, phi.field
    group = spec.group
    if not is_one_gap(spec):
        raise MonoidError("explicit factorizations require the one-gap monoid")
    allowed = length_set_intr(phi)
    if ell not in allowed:
        raise AlgebraError(f"length {ell} outside {allowed} for alpha {phi.alpha}")
    if ell == 1:
        return [phi]
    alpha = phi.alpha
    one = group.one()

    if phi.d_constant is not None:
        v = phi.d_constant.valuation()
        d_lengths = length_set_closed_form(spec, v)
        if ell in d_lengths:
            from .algebra import factor_in_d

            zd = factor_in_d(phi.d_constant, ell)
            return [
                constant_element(spec, f, label={"kind": "constant-atom", "value": str(f)})
                for f in zd.factors
            ]
        # short lengths: ramp construction with alpha' = (v-1)/(ell-1)
        a_prime = (v - one).scale(Fraction(1, ell - 1))
        eps = one.scale(Fraction(1, ell - 1))
        ramp = gadget_ramp(spec, field, one, a_prime, eps=eps)
        return _assemble_ramp_factorization(phi, ramp, ell)

    # general certified members: work against m = floor(alpha)
    m = alpha.floor()
    if ell == m:
        t_atom = constant_element(spec, DElement.t_power(spec, field, one))
        quotient = phi
        for _ in range(ell - 1):
            quotient = quotient.div(t_atom)
        return [t_atom] * (ell - 1) + [quotient]
    # position a ramp so its top plateau covers an infimum abscissa of phi
    mn, witness = phi.profile.pl.minimum()
    a_prime = (alpha - one).scale(Fraction(1, ell - 1))
    eps = one.scale(Fraction(1, ell - 1))
    base = gadget_ramp(spec, field, one, a_prime, eps=eps)
    top_bp = base.profile.pl.breakpoints[-1]
    shift = group.element((witness - top_bp).floor() - 1)
    ramp = gadget_ramp(spec, field, one, a_prime, eps=eps, shift=shift)
    return _assemble_ramp_factorization(phi, ramp, ell)


def _assemble_ramp_factorization(phi: IntRElement, ramp: IntRElement, ell: int):
    quotient = phi
    for _ in range(ell - 1):
        quotient = quotient.div(ramp)
    factors = [ramp] * (ell - 1) + [quotient]
    product = factors[0].func
    for f in factors[1:]:
        product = product * f.func
    if product != phi.func:  # pragma: no cover - construction is exact
        raise AssertionError("factorization does not multiply back")
    for f in factors:
        if not f.is_certified_d():
            raise GadgetError("constructed factor lost its membership certificate")
        if atom_certify(f).verdict != "yes":
            raise GadgetError("constructed factor is not a certified atom")
    return factors


# ---------------------------------------------------------------------------
# length-set sandwich over general gap monoids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SandwichReport:
    value: GroupElement
    n_threshold: int
    base_lengths: LengthSet
    lower_set: tuple[int, ...]
    upper_bound: int
    witnesses: dict

    def to_json(self) -> dict:
        return {
            "value": str(self.value),
            "N": self.n_threshold,
            "base_lengths": sorted(self.base_lengths.as_set()),
            "lower_set": list(self.lower_set),
            "upper_bound": self.upper_bound,
            "witness_lengths": sorted(self.witnesses),
        }


def extend_length_bounds(
    d: DElement,
    alpha: GroupElement,
    beta: GroupElement,
    grid_q: int = 1,
) -> SandwichReport:
    """Sandwich for the function-ring lengths of a base constant d.

    Requires a gap (beta, alpha) empty in the monoid, integral
    terminality at alpha with alpha in the monoid, and v(d) > 3*alpha.
    The lower set joins the base-ring lengths with {2..N-2} for
    N = min{n : n*alpha > v(d)}, each backed by an explicit witness
    factorization of ramp atoms; the upper bound is the longest
    base-ring length.
    """
    spec = d.spec
    group = spec.group
    v = d.valuation()
    zero = group.zero()
    if not (zero < beta and beta < alpha):
        raise GadgetError("need 0 < beta < alpha")
    gap = region_intersect(
        spec.positive_region,
        (Interval(beta, alpha, lo_closed=False, hi_closed=False),),
    )
    if gap:
        raise GadgetError(f"the interval ({beta}, {alpha}) meets the monoid")
    if not is_integrally_terminal_for(spec, alpha) or not spec.contains(alpha):
        raise GadgetError(f"monoid is not integrally terminal at {alpha}")
    if not v > alpha.scale(3):
        raise GadgetError(f"need v(d) = {v} > 3*alpha = {alpha.scale(3)}")
    ba = bounded_away_from_zero(spec)
    if ba is None:
        raise GadgetError("monoid must be bounded away from zero")
    from .groups import ring_div
    from .monoids import length_set_bruteforce

    n_threshold = ring_div(v, alpha).floor() + 1
    base_lengths = length_set_bruteforce(spec, v, grid_q)
    field = d.field
    witnesses = {}
    for ell in range(2, n_threshold - 1):
        a_prime = (v - alpha).scale(Fraction(1, ell - 1))
        eps = ba.gamma.scale(Fraction(1, ell - 1))
        ramp = gadget_ramp(spec, field, alpha, a_prime, eps=eps)
        phi = constant_element(spec, d)
        quotient = phi
        for _ in range(ell - 1):
            quotient = quotient.div(ramp)
        factors = [ramp] * (ell - 1) + [quotient]
        product = factors[0].func
        for f in factors[1:]:
            product = product * f.func
        if product != phi.func:  # pragma: no cover
            raise AssertionError("witness does not multiply back")
        for f in factors:
            if not f.is_certified_d():
                raise GadgetError("witness factor lost its membership certificate")
            if atom_certify(f).verdict != "yes":
                raise GadgetError("witness factor is not a certified atom")
        witnesses[ell] = factors
    lower = sorted(base_lengths.as_set() | set(witnesses))
    return SandwichReport(
        v, n_threshold, base_lengths, tuple(lower), max(base_lengths.as_set()), witnesses
    )


# ---------------------------------------------------------------------------
# strict-divisor (antimatter) witnesses over the valuation ring
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StrictDivisor:
    psi: IntRElement
    quotient: IntRElement
    branch: int

    def to_json(self) -> dict:
        return {
            "branch": self.branch,
            "psi": self.psi.to_json(),
            "quotient": self.quotient.to_json(),
        }


def _final_plateau(phi: IntRElement) -> tuple[GroupElement, GroupElement]:
    """(value, onset abscissa) of the rightmost plateau; errors otherwise."""
    last = phi.profile.pl.pieces[-1]
    if last.slope != 0:
        raise GadgetError("witness construction needs a final plateau")
    bps = phi.profile.pl.breakpoints
    onset = bps[-1] if bps else phi.spec.group.zero()
    return last.intercept, onset


def antimatter_witness(phi: IntRElement, branch: int | None = None) -> StrictDivisor:
    """A nonunit psi with phi/psi a certified nonunit over the valuation ring.

    Branch 1 (divisible group): a ramp from 0 to half the final plateau
    value, shifted past the abscissa where phi settles.  Branch 2
    (non-divisible group): the same with a plateau tolerance below half
    the value.  Branch 3 (discrete positive part): the cube-shift
    function based just past the settling abscissa.  All value checks
    are exact profile arithmetic; membership in the valuation-ring
    setting is nonnegativity of the profile.
    """
    spec, field, group = phi.spec, phi.field, phi.spec.group
    if not phi.is_certified_v():
        raise NotCertified("witness construction needs a valuation certificate")
    if phi.profile.is_identically_zero():
        raise GadgetError("units admit no strict divisors")
    amount, onset = _final_plateau(phi)
    if not amount > group.zero():
        raise GadgetError("final plateau must be positive for a nonunit")
    if branch is None:
        if group.has_no_minimal_positive:
            branch = 1 if group.is_divisible else 2
        else:
            branch = 3
    half = amount.scale(Fraction(1, 2))
    zero = group.zero()
    if branch in (1, 2):
        if not group.has_no_minimal_positive:
            raise GadgetError("branches 1 and 2 need a dense value group")
        if branch == 1 and not group.is_divisible:
            raise GadgetError("branch 1 needs a divisible value group")
        if branch == 2 and group.is_divisible:
            raise GadgetError("branch 2 needs a non-divisible value group")
        shift = group.element(onset.floor() + 1)
        eps = half.scale(Fraction(1, 2)) if branch == 2 else None
        psi = gadget_ramp(spec, field, zero, half, eps=eps, shift=shift)
    elif branch == 3:
        if group.has_no_minimal_positive:
            raise GadgetError("branch 3 needs a discrete positive part")
        vb = group.element(onset.floor() + 1)
        psi = gadget_cube_shift(spec, field, KElement.t_power(field, group, vb))
    else:
        raise GadgetError(f"unknown branch {branch}")
    quotient = phi.div(psi)
    qmin = quotient.profile.pl.minimum()[0]
    if qmin is None or qmin < zero:  # pragma: no cover - construction invariant
        raise AssertionError("quotient fails valuation-ring membership")
    for elem, name in ((psi, "psi"), (quotient, "quotient")):
        mx = elem.profile.pl.maximum()[0]
        if mx is None or not mx > zero:
            raise GadgetError(f"{name} came out a unit; no strict division")
    return StrictDivisor(psi, quotient, branch)


# ---------------------------------------------------------------------------
# factorization distance and 3-chains in the function ring
# ---------------------------------------------------------------------------


def assoc_intr(f: IntRElement, g: IntRElement) -> str:
    """Three-valued association test in the function ring.

    Associates differ by a unit, and units have identically zero
    profiles, so unequal profiles refute association outright.  Equal
    profiles with a constant quotient reduce to the base-ring unit test;
    anything else is left undecided.
    """
    if f.spec != g.spec:
        raise GadgetError("elements live over different monoids")
    if f.profile.pl != g.profile.pl:
        return "no"
    q = f.func / g.func
    if q.is_constant():
        return unit_verdict(q.constant_value(), f.spec)
    return "unknown"


@dataclass(frozen=True)
class IntRFactorization:
    target: IntRElement
    factors: tuple[IntRElement, ...]

    @property
    def length(self) -> int:
        return len(self.factors)

    def is_exact(self) -> bool:
        product = self.factors[0].func
        for f in self.factors[1:]:
            product = product * f.func
        return product == self.target.func

    def to_json(self) -> dict:
        return {
            "length": self.length,
            "factors": [f.to_json() for f in self.factors],
        }


def distance_intr(z1: IntRFactorization, z2: IntRFactorization) -> int:
    """Distance after grouping the factors into association classes."""
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
            verdict = assoc_intr(facs[i], facs[j])
            if verdict == "yes":
                parent[find(i)] = find(j)
            elif verdict == "unknown":
                raise AssociationUndecided("cannot decide an association class")
    c1: dict[int, int] = {}
    c2: dict[int, int] = {}
    for i in range(len(facs)):
        r = find(i)
        if i < n1:
            c1[r] = c1.get(r, 0) + 1
        else:
            c2[r] = c2.get(r, 0) + 1
    shared = sum(min(c, c2.get(r, 0)) for r, c in c1.items())
    return max(z1.length - shared, z2.length - shared)


def canonical_intr(phi: IntRElement) -> IntRFactorization:
    """floor(alpha) - 1 copies of t and a cofactor; the chain target."""
    spec, field = phi.spec, phi.field
    if not is_one_gap(spec):
        raise MonoidError("canonical factorization requires the one-gap monoid")
    m = phi.alpha.floor() - 1
    t_atom = constant_element(spec, DElement.t_power(spec, field, spec.group.one()))
    if m == 0:
        return IntRFactorization(phi, (phi,))
    quotient = phi
    for _ in range(m):
        quotient = quotient.div(t_atom)
    return IntRFactorization(phi, tuple([t_atom] * m + [quotient]))


def chain_intr(
    phi: IntRElement,
    z1: IntRFactorization,
    z2: IntRFactorization | None = None,
) -> list[IntRFactorization]:
    """Chain with step distances <= 3 from z1 (through the canonical
    t-heavy factorization, then back to z2 when given).

    Each step picks two factors not associate to t and replaces their
    product P by (t, P/t) when alpha(P) < 3 or by (t, r1, r2) with an
    explicit two-atom split of P/t otherwise; the number of t factors
    strictly grows, so the walk terminates.
    """
    first = _chain_to_canonical(phi, z1)
    if z2 is None:
        return first
    second = _chain_to_canonical(phi, z2)
    back = list(reversed(second))
    if first and back and distance_intr(first[-1], back[0]) == 0:
        back = back[1:]
    return first + back


def _chain_to_canonical(phi: IntRElement, z: IntRFactorization) -> list[IntRFactorization]:
    spec, field, group = phi.spec, phi.field, phi.spec.group
    if not z.is_exact():
        raise GadgetError("input factorization does not multiply to the target")
    t_atom = constant_element(spec, DElement.t_power(spec, field, group.one()))
    chain = [z]
    current = z
    while True:
        flags = []
        for f in current.factors:
            v = assoc_intr(f, t_atom)
            if v == "unknown":
                raise AssociationUndecided("cannot classify a factor against t")
            flags.append(v)
        non_t = [i for i, fl in enumerate(flags) if fl == "no"]
        if len(non_t) <= 1:
            break
        i, j = non_t[0], non_t[1]
        rest = [f for k, f in enumerate(current.factors) if k not in (i, j)]
        prod = current.factors[i].mul(current.factors[j])
        if prod.alpha >= group.element(3):
            inner = prod.div(t_atom)
            r1, r2 = factorization_intr(inner, 2)
            repl = [t_atom, r1, r2]
        else:
            repl = [t_atom, prod.div(t_atom)]
        current = IntRFactorization(phi, tuple(rest + repl))
        chain.append(current)
    canon = canonical_intr(phi)
    if distance_intr(chain[-1], canon) != 0:  # pragma: no cover - invariant
        raise AssertionError("chain endpoint is not canonical")
    if chain[-1].length != canon.length or any(
        a is not b for a, b in zip(chain[-1].factors, canon.factors)
    ):
        chain.append(canon)
    return chain
