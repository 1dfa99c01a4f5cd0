"""Exact rational scalars, rational-endpoint intervals and integer polynomials.

Everything that ends up inside a certificate is computed here with
``fractions.Fraction`` and integer arithmetic only.  Floats never enter:
the sizes involved (widths like ``2**-1000``) are far below what a double
can represent, and a certificate is either exact or absent.

The module also hosts the subdivision engine used by the inequality
certifications: :func:`certify_by_subdivision` bisects a domain until an
interval enclosure proves ``f >= floor`` on every leaf.
"""

from __future__ import annotations

import heapq
import json
import sys
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import gcd
from typing import Callable, Iterable, Sequence, Union

from .errors import BitBudgetExceeded, DenominatorVanishes, InvalidParameter, NoSignChange

ExactScalar = Fraction
ScalarLike = Union[int, Fraction, str]

_BIT_BUDGET = [1 << 22]

# certificates carry integers with tens of thousands of digits
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)


def set_bit_budget(bits: int) -> None:
    """Cap the bit size of any numerator or denominator stored in an interval."""
    if bits < 64:
        raise InvalidParameter("bit budget must be at least 64")
    _BIT_BUDGET[0] = int(bits)


def get_bit_budget() -> int:
    return _BIT_BUDGET[0]


def bit_size(x: Fraction) -> int:
    return max(x.numerator.bit_length(), x.denominator.bit_length())


def check_bits(x: Fraction) -> Fraction:
    if bit_size(x) > _BIT_BUDGET[0]:
        raise BitBudgetExceeded(
            f"rational of {bit_size(x)} bits exceeds the budget of {_BIT_BUDGET[0]} bits"
        )
    return x


def to_scalar(x: ScalarLike) -> Fraction:
    """Coerce to an exact rational.  Floats are rejected on purpose."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise InvalidParameter("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InvalidParameter(f"not an exact rational: {x!r}") from exc
    raise InvalidParameter(f"cannot convert {type(x).__name__} to an exact rational")


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def decimal_str(x: Fraction, digits: int = 17) -> str:
    """Decimal rendering with ``digits`` significant digits, computed exactly."""
    if x == 0:
        return "0"
    sign = "-" if x < 0 else ""
    x = abs(x)
    exp = len(str(x.numerator)) - len(str(x.denominator))
    if Fraction(10) ** exp > x:
        exp -= 1
    scaled = x / Fraction(10) ** (exp - digits + 1)
    mant = int(scaled + Fraction(1, 2))
    if mant >= 10**digits:
        mant //= 10
        exp += 1
    s = str(mant)
    return f"{sign}{s[0]}.{s[1:]}e{exp:+d}"


def round_down(x: Fraction, bits: int) -> Fraction:
    """Largest multiple of ``2**-bits`` that is <= x."""
    return Fraction((x.numerator << bits) // x.denominator, 1 << bits)


def round_up(x: Fraction, bits: int) -> Fraction:
    return Fraction(-((-x.numerator << bits) // x.denominator), 1 << bits)


def simplest_rational_in(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational of smallest denominator in the closed interval [lo, hi]."""
    if lo > hi:
        raise InvalidParameter("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_rational_in(-hi, -lo)
    # continued-fraction descent on integers; x = (p1*y + p0) / (q1*y + q0)
    a, b, c, d = lo.numerator, lo.denominator, hi.numerator, hi.denominator
    p1, p0, q1, q0 = 1, 0, 0, 1
    while True:
        fl = a // b
        if fl * b == a:
            y = fl
            break
        if (fl + 1) * d <= c:
            y = fl + 1
            break
        # both ends share the integer part; recurse on reciprocals of the fractional parts
        a, b, c, d = d, c - fl * d, b, a - fl * b
        p1, p0, q1, q0 = p1 * fl + p0, p1, q1 * fl + q0, q1
    return Fraction(p1 * y + p0, q1 * y + q0)


# ---------------------------------------------------------------------------
# Intervals
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RatInterval:
    """Closed interval with exact rational endpoints.

    Arithmetic is inclusion-isotonic: the result of ``X op Y`` contains
    ``x op y`` for every ``x`` in ``X`` and ``y`` in ``Y``.
    """

    lo: Fraction
    hi: Fraction

    def __post_init__(self) -> None:
        lo = to_scalar(self.lo)
        hi = to_scalar(self.hi)
        if lo > hi:
            raise InvalidParameter(f"interval endpoints out of order: {lo} > {hi}")
        check_bits(lo)
        check_bits(hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, x: ScalarLike) -> RatInterval:
        x = to_scalar(x)
        return cls(x, x)

    @classmethod
    def around(cls, center: ScalarLike, radius: ScalarLike) -> RatInterval:
        c, r = to_scalar(center), to_scalar(radius)
        return cls(c - r, c + r)

    @classmethod
    def hull_of(cls, values: Iterable[Fraction]) -> RatInterval:
        vals = list(values)
        return cls(min(vals), max(vals))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Union[ScalarLike, RatInterval]) -> bool:
        if isinstance(x, RatInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = to_scalar(x)
        return self.lo <= x <= self.hi

    __contains__ = contains

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def intersects(self, other: RatInterval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def intersect(self, other: RatInterval) -> RatInterval:
        return RatInterval(max(self.lo, other.lo), min(self.hi, other.hi))

    def join(self, other: RatInterval) -> RatInterval:
        return RatInterval(min(self.lo, other.lo), max(self.hi, other.hi))

    def bisect(self) -> tuple[RatInterval, RatInterval]:
        m = self.mid
        return RatInterval(self.lo, m), RatInterval(m, self.hi)

    def widen(self, r: ScalarLike) -> RatInterval:
        r = to_scalar(r)
        return RatInterval(self.lo - r, self.hi + r)

    def rounded(self, bits: int) -> RatInterval:
        """Outward rounding of both endpoints to dyadic rationals."""
        return RatInterval(round_down(self.lo, bits), round_up(self.hi, bits))

    def abs_max(self) -> Fraction:
        return max(abs(self.lo), abs(self.hi))

    def _coerce(self, other: Union[ScalarLike, RatInterval]) -> RatInterval:
        if isinstance(other, RatInterval):
            return other
        return RatInterval.point(other)

    def __add__(self, other):
        o = self._coerce(other)
        return RatInterval(self.lo + o.lo, self.hi + o.hi)

    __radd__ = __add__

    def __neg__(self):
        return RatInterval(-self.hi, -self.lo)

    def __sub__(self, other):
        o = self._coerce(other)
        return RatInterval(self.lo - o.hi, self.hi - o.lo)

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o.is_point:
            c = o.lo
            return RatInterval(min(self.lo * c, self.hi * c), max(self.lo * c, self.hi * c))
        if self.lo >= 0 and o.lo >= 0:
            return RatInterval(self.lo * o.lo, self.hi * o.hi)
        ps = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return RatInterval(min(ps), max(ps))

    __rmul__ = __mul__

    def reciprocal(self) -> RatInterval:
        if self.contains_zero():
            raise DenominatorVanishes(f"division by an interval containing 0: {self}")
        return RatInterval(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other):
        o = self._coerce(other)
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, n: int):
        if n < 0:
            return (self ** (-n)).reciprocal()
        if n == 0:
            return RatInterval.point(1)
        a, b = self.lo**n, self.hi**n
        if n % 2 == 1 or self.lo >= 0:
            return RatInterval(min(a, b), max(a, b))
        if self.hi <= 0:
            return RatInterval(min(a, b), max(a, b))
        return RatInterval(Fraction(0), max(a, b))

    def to_strs(self) -> list[str]:
        return [frac_str(self.lo), frac_str(self.hi)]

    @classmethod
    def from_strs(cls, pair: Sequence[str]) -> RatInterval:
        return cls(to_scalar(pair[0]), to_scalar(pair[1]))

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


IntervalLike = Union[RatInterval, ScalarLike]


def as_interval(x: IntervalLike) -> RatInterval:
    return x if isinstance(x, RatInterval) else RatInterval.point(x)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------


def _trim(coeffs: Sequence[int]) -> tuple[int, ...]:
    c = list(coeffs)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


@dataclass(frozen=True, slots=True)
class IntPoly:
    """Polynomial in λ with integer coefficients; ``coeffs[k]`` multiplies λ**k."""

    coeffs: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        for c in self.coeffs:
            if not isinstance(c, int) or isinstance(c, bool):
                raise InvalidParameter("IntPoly coefficients must be integers")
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @classmethod
    def from_seq(cls, coeffs: Iterable[int]) -> IntPoly:
        return cls(tuple(int(c) for c in coeffs))

    @classmethod
    def const(cls, c: int) -> IntPoly:
        return cls((c,))

    @classmethod
    def monomial(cls, k: int, c: int = 1) -> IntPoly:
        return cls((0,) * k + (c,))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def leading(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def low_order(self) -> int:
        """Index of the lowest nonzero coefficient (the λ-adic valuation)."""
        for i, c in enumerate(self.coeffs):
            if c:
                return i
        raise InvalidParameter("zero polynomial has no valuation")

    def content(self) -> int:
        g = 0
        for c in self.coeffs:
            g = gcd(g, c)
        return g

    def shift_down(self, k: int) -> IntPoly:
        if any(self.coeffs[:k]):
            raise InvalidParameter("shift would drop nonzero coefficients")
        return IntPoly(self.coeffs[k:])

    def scale(self, c: int) -> IntPoly:
        return IntPoly(tuple(c * a for a in self.coeffs))

    def exact_div_int(self, c: int) -> IntPoly:
        return IntPoly(tuple(a // c for a in self.coeffs))

    def __add__(self, other: IntPoly) -> IntPoly:
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return IntPoly(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)))

    def __neg__(self) -> IntPoly:
        return IntPoly(tuple(-c for c in self.coeffs))

    def __sub__(self, other: IntPoly) -> IntPoly:
        return self + (-other)

    def __mul__(self, other: Union[IntPoly, int]) -> IntPoly:
        if isinstance(other, int):
            return self.scale(other)
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return IntPoly()
        out = [0] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return IntPoly(tuple(out))

    __rmul__ = __mul__

    def __pow__(self, n: int) -> IntPoly:
        out = IntPoly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def derivative(self) -> IntPoly:
        return IntPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k))

    def eval_exact(self, x: ScalarLike) -> Fraction:
        """Exact value at a rational point, by homogeneous integer Horner."""
        x = to_scalar(x)
        if not self.coeffs:
            return Fraction(0)
        p, q = x.numerator, x.denominator
        acc = 0
        qpow = 1
        for c in reversed(self.coeffs):
            acc = acc * p + c * qpow
            qpow *= q
        return Fraction(acc, qpow // q)

    def sign_at(self, x: Fraction) -> int:
        """Sign of p(x) without building the reduced fraction."""
        if not self.coeffs:
            return 0
        p, q = x.numerator, x.denominator
        acc = 0
        qpow = 1
        for c in reversed(self.coeffs):
            acc = acc * p + c * qpow
            qpow *= q
        return (acc > 0) - (acc < 0)

    def horner_interval(self, x: RatInterval) -> RatInterval:
        acc = RatInterval.point(0)
        if x.is_point:
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        # outward dyadic rounding keeps sizes bounded; the added slack
        # (degree * 2**-bits) is far below the width of x
        w = x.hi - x.lo
        bits = max(64, w.denominator.bit_length() - w.numerator.bit_length()) + 128
        for c in reversed(self.coeffs):
            acc = (acc * x + c).rounded(bits)
        return acc

    def eval_interval(self, x: RatInterval) -> RatInterval:
        """Inclusion-isotonic enclosure of p over x.

        Combines naive Horner with the mean-value form, and returns the exact
        range whenever the derivative enclosure proves monotonicity.
        """
        if x.is_point:
            return RatInterval.point(self.eval_exact(x.lo))
        if self.degree <= 0:
            return RatInterval.point(self.coeffs[0] if self.coeffs else 0)
        dp = self.derivative().horner_interval(x)
        if dp.lo > 0 or dp.hi < 0:
            a, b = self.eval_exact(x.lo), self.eval_exact(x.hi)
            return RatInterval(min(a, b), max(a, b))
        naive = self.horner_interval(x)
        m = x.mid
        mv = self.eval_exact(m) + dp * RatInterval(x.lo - m, x.hi - m)
        return naive.intersect(mv)

    def __call__(self, x: IntervalLike):
        if isinstance(x, RatInterval):
            return self.eval_interval(x)
        return self.eval_exact(x)

    def to_list(self) -> list[int]:
        return list(self.coeffs)

    def __repr__(self) -> str:
        if not self.coeffs:
            return "0"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*x^{k}")
        return " + ".join(terms)


LAMBDA = IntPoly((0, 1))
ONE = IntPoly.const(1)


def eval_poly(p: IntPoly, x: IntervalLike) -> RatInterval:
    return p.eval_interval(as_interval(x))


def poly_divmod(p: IntPoly, d: IntPoly) -> tuple[list[Fraction], list[Fraction]]:
    """Quotient and remainder over the rationals (coefficient lists, low order first)."""
    if d.is_zero():
        raise ZeroDivisionError("division by the zero polynomial")
    r = [Fraction(c) for c in p.coeffs]
    dc = d.coeffs
    dd = len(dc) - 1
    if len(r) - 1 < dd:
        return [], r
    q = [Fraction(0)] * (len(r) - dd)
    lead = Fraction(dc[-1])
    for i in range(len(r) - 1, dd - 1, -1):
        coef = r[i] / lead
        q[i - dd] = coef
        if coef:
            for j, c in enumerate(dc):
                r[i - dd + j] -= coef * c
    while r and r[-1] == 0:
        r.pop()
    return q, r


def divides(d: IntPoly, p: IntPoly) -> bool:
    return not poly_divmod(p, d)[1]


def exact_quotient(p: IntPoly, d: IntPoly) -> IntPoly:
    """p / d when the division is exact and the quotient is integral."""
    q, r = poly_divmod(p, d)
    if r or any(c.denominator != 1 for c in q):
        raise InvalidParameter(f"{d} does not divide {p} over the integers")
    return IntPoly(tuple(int(c) for c in q))


def primitive_part(p: IntPoly) -> IntPoly:
    if p.is_zero():
        return p
    c = p.content()
    if p.leading < 0:
        c = -c
    return p.exact_div_int(c)


def poly_gcd(a: IntPoly, b: IntPoly) -> IntPoly:
    """Primitive gcd with positive leading coefficient (primitive remainder sequence)."""
    a, b = primitive_part(a), primitive_part(b)
    while not b.is_zero():
        # pseudo-remainder keeps everything integral
        r = a
        db = b.degree
        lb = b.leading
        while not r.is_zero() and r.degree >= db:
            shift = r.degree - db
            r = r * lb - IntPoly.monomial(shift, r.leading) * b
        a, b = b, primitive_part(r)
    return primitive_part(a) if not a.is_zero() else a


# ---------------------------------------------------------------------------
# Rational functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class RatFunc:
    """Quotient of integer polynomials in lowest terms.

    The canonical form divides out the polynomial gcd and the integer
    content and makes the leading coefficient of the denominator positive,
    so two RatFuncs compare equal exactly when they are the same function.
    """

    num: IntPoly
    den: IntPoly = ONE
    _deriv_cache: list = field(default_factory=list, compare=False, repr=False, hash=False)

    def __post_init__(self) -> None:
        num, den = self.num, self.den
        if den.is_zero():
            raise InvalidParameter("RatFunc denominator is the zero polynomial")
        if num.is_zero():
            num, den = IntPoly(), ONE
        else:
            if den.degree > 0 and num.degree > 0:
                g = poly_gcd(num, den)
                if g.degree > 0:
                    num = exact_quotient(num, g) if divides(g, num) else num
                    den = exact_quotient(den, g) if divides(g, den) else den
            c = gcd(num.content(), den.content())
            if den.leading < 0:
                c = -c
            num, den = num.exact_div_int(c), den.exact_div_int(c)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @classmethod
    def const(cls, c: ScalarLike) -> RatFunc:
        c = to_scalar(c)
        return cls(IntPoly.const(c.numerator), IntPoly.const(c.denominator))

    @classmethod
    def from_poly(cls, p: IntPoly) -> RatFunc:
        return cls(p, ONE)

    def _lift(self, other) -> RatFunc:
        if isinstance(other, RatFunc):
            return other
        if isinstance(other, IntPoly):
            return RatFunc(other)
        return RatFunc.const(other)

    def __add__(self, other) -> RatFunc:
        o = self._lift(other)
        return RatFunc(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __neg__(self) -> RatFunc:
        return RatFunc(-self.num, self.den)

    def __sub__(self, other) -> RatFunc:
        return self + (-self._lift(other))

    def __rsub__(self, other) -> RatFunc:
        return self._lift(other) - self

    def __mul__(self, other) -> RatFunc:
        o = self._lift(other)
        return RatFunc(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> RatFunc:
        o = self._lift(other)
        if o.num.is_zero():
            raise ZeroDivisionError("division by the zero function")
        return RatFunc(self.num * o.den, self.den * o.num)

    def __rtruediv__(self, other) -> RatFunc:
        return self._lift(other) / self

    def __pow__(self, n: int) -> RatFunc:
        if n < 0:
            return RatFunc.const(1) / (self ** (-n))
        return RatFunc(self.num**n, self.den**n)

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def eval_exact(self, x: ScalarLike) -> Fraction:
        x = to_scalar(x)
        d = self.den.eval_exact(x)
        if d == 0:
            raise DenominatorVanishes(f"denominator vanishes at {x}")
        return self.num.eval_exact(x) / d

    def derivative(self) -> RatFunc:
        if not self._deriv_cache:
            self._deriv_cache.append(rf_derivative(self))
        return self._deriv_cache[0]

    def eval_interval(self, x: RatInterval, refine: bool = True) -> RatInterval:
        if x.is_point:
            return RatInterval.point(self.eval_exact(x.lo))
        den = self.den.eval_interval(x)
        if den.contains_zero():
            raise DenominatorVanishes(f"denominator enclosure {den} contains 0 on {x}")
        out = self.num.eval_interval(x) / den
        if refine and self.num.degree + self.den.degree > 0:
            try:
                d = self.derivative().eval_interval(x, refine=False)
            except DenominatorVanishes:
                return out
            if d.lo > 0 or d.hi < 0:
                a, b = self.eval_exact(x.lo), self.eval_exact(x.hi)
                return RatInterval(min(a, b), max(a, b))
            m = x.mid
            mv = self.eval_exact(m) + d * RatInterval(x.lo - m, x.hi - m)
            out = out.intersect(mv)
        return out

    def __call__(self, x: IntervalLike):
        if isinstance(x, RatInterval):
            return self.eval_interval(x)
        return self.eval_exact(x)

    def to_json_obj(self) -> dict:
        return {"num": self.num.to_list(), "den": self.den.to_list()}

    def __repr__(self) -> str:
        return f"({self.num}) / ({self.den})"


def rf_derivative(f: RatFunc) -> RatFunc:
    """Quotient rule, returned in canonical form."""
    return RatFunc(f.num.derivative() * f.den - f.num * f.den.derivative(), f.den * f.den)


def cross_difference(f: RatFunc, g: RatFunc) -> IntPoly:
    """num(f)·den(g) − num(g)·den(f); the zero polynomial exactly when f ≡ g."""
    return f.num * g.den - g.num * f.den


def isolate_root(p: IntPoly, domain: RatInterval, width: ScalarLike) -> RatInterval:
    """Bisection with exact signs down to an enclosure of the requested width.

    The caller is responsible for uniqueness of the root on ``domain``
    (typically via a certified derivative bound).
    """
    width = to_scalar(width)
    if width <= 0:
        raise InvalidParameter("width must be positive")
    lo, hi = domain.lo, domain.hi
    slo, shi = p.sign_at(lo), p.sign_at(hi)
    if slo == 0:
        return RatInterval.point(lo)
    if shi == 0:
        return RatInterval.point(hi)
    if slo == shi:
        raise NoSignChange(f"polynomial has sign {slo} at both ends of {domain}")
    coarse = max(width, Fraction(1, 1 << 60))
    while hi - lo > coarse:
        m = (lo + hi) / 2
        sm = p.sign_at(m)
        if sm == 0:
            return RatInterval.point(m)
        if sm == slo:
            lo = m
        else:
            hi = m
    if hi - lo > width:
        refined = _newton_bracket(p, lo, hi, slo, width)
        if refined is not None:
            return refined
    while hi - lo > width:
        m = (lo + hi) / 2
        sm = p.sign_at(m)
        if sm == 0:
            return RatInterval.point(m)
        if sm == slo:
            lo = m
        else:
            hi = m
    return RatInterval(lo, hi)


def _newton_bracket(p: IntPoly, lo: Fraction, hi: Fraction, slo: int, width: Fraction) -> RatInterval | None:
    """Newton iteration on dyadic iterates, accepted only if exact signs confirm a bracket."""
    dp = p.derivative()
    target = width.denominator.bit_length() - width.numerator.bit_length() + 2
    bits = 64
    x = round_down((lo + hi) / 2, bits)
    while True:
        bits = min(2 * bits, target + 16)
        d = dp.eval_exact(x)
        if d == 0:
            return None
        x = round_down(x - p.eval_exact(x) / d, bits)
        x = min(max(x, lo), hi)
        if bits >= target + 16:
            break
    half = width / 2
    a, b = max(lo, x - half), min(hi, x + half)
    sa, sb = p.sign_at(a), p.sign_at(b)
    if sa == slo and sb == -slo:
        return RatInterval(a, b)
    return None


# ---------------------------------------------------------------------------
# Subdivision certificates
# ---------------------------------------------------------------------------


class CertStatus(str, Enum):
    PROVED = "PROVED"
    INCONCLUSIVE = "INCONCLUSIVE"
    REFUTED = "REFUTED"


@dataclass
class CertNode:
    interval: RatInterval
    bound: Fraction | None = None
    children: list[CertNode] = field(default_factory=list)

    def to_obj(self):
        b = "undecided" if self.bound is None else frac_str(self.bound)
        triple = [frac_str(self.interval.lo), frac_str(self.interval.hi), b]
        if not self.children:
            return triple
        return [triple, [c.to_obj() for c in self.children]]

    def leaves(self) -> Iterable[CertNode]:
        if not self.children:
            yield self
        for c in self.children:
            yield from c.leaves()


@dataclass
class CertResult:
    status: CertStatus
    claim: str
    domain: RatInterval
    floor: Fraction
    tree: CertNode
    lower: Fraction | None = None
    upper: Fraction | None = None
    nodes: int = 0
    witness: RatInterval | None = None
    note: str = ""

    @property
    def proved(self) -> bool:
        return self.status is CertStatus.PROVED

    def to_json_obj(self) -> dict:
        obj = {
            "claim": self.claim,
            "domain": self.domain.to_strs(),
            "floor": frac_str(self.floor),
            "status": self.status.value,
            "lower": None if self.lower is None else frac_str(self.lower),
            "upper": None if self.upper is None else frac_str(self.upper),
            "nodes": self.nodes,
            "tree": self.tree.to_obj(),
        }
        if self.witness is not None:
            obj["witness"] = self.witness.to_strs()
        if self.note:
            obj["note"] = self.note
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)


def certify_by_subdivision(
    enclose: Callable[[RatInterval], RatInterval],
    domain: RatInterval,
    floor: ScalarLike,
    claim: str,
    max_depth: int = 40,
    max_nodes: int = 200_000,
) -> CertResult:
    """Prove ``f >= floor`` on ``domain`` from an inclusion-isotonic enclosure of f.

    Widest undecided leaves are split first.  A leaf whose enclosure lies
    entirely below ``floor`` refutes the claim.  ``enclose`` may raise
    ``DenominatorVanishes``; such leaves stay undecided and are split, and
    the error propagates only if one survives to ``max_depth``.
    """
    floor = to_scalar(floor)
    root = CertNode(domain)
    heap: list[tuple[Fraction, int, int, CertNode]] = [(-domain.width, 0, 0, root)]
    counter = 1
    nodes = 0
    lower: Fraction | None = None
    upper: Fraction | None = None
    while heap:
        _, _, depth, node = heapq.heappop(heap)
        nodes += 1
        vanishing = False
        try:
            enc = enclose(node.interval)
        except DenominatorVanishes:
            vanishing = True
            enc = None
        if enc is not None:
            node.bound = enc.lo
            upper = enc.hi if upper is None else max(upper, enc.hi)
            if enc.lo >= floor:
                lower = enc.lo if lower is None else min(lower, enc.lo)
                continue
            if enc.hi < floor:
                return CertResult(CertStatus.REFUTED, claim, domain, floor, root, None, None, nodes, node.interval,
                                  "enclosure entirely below floor")
        if depth >= max_depth or nodes >= max_nodes or node.interval.is_point:
            if vanishing:
                raise DenominatorVanishes(f"denominator not separated from 0 on {node.interval}")
            return CertResult(CertStatus.INCONCLUSIVE, claim, domain, floor, root, None, None, nodes, node.interval,
                              "undecided leaf at the depth limit")
        left, right = node.interval.bisect()
        node.children = [CertNode(left), CertNode(right)]
        for child in node.children:
            heapq.heappush(heap, (-child.interval.width, counter, depth + 1, child))
            counter += 1
    return CertResult(CertStatus.PROVED, claim, domain, floor, root, lower, upper, nodes)


def certify_positive(
    f: RatFunc,
    domain: RatInterval,
    floor: ScalarLike = 0,
    max_depth: int = 40,
    claim: str | None = None,
) -> CertResult:
    """Certify f(λ) >= floor for every λ in domain."""
    floor = to_scalar(floor)
    den_check = certify_by_subdivision(
        lambda x: _abs_enclosure(f.den.eval_interval(x)),
        domain, Fraction(0), "denominator nonvanishing", max_depth,
    )
    if not den_check.proved or (den_check.lower is not None and den_check.lower <= 0):
        leaf = den_check.witness or domain
        raise DenominatorVanishes(f"cannot separate the denominator from 0 on {leaf}")
    return certify_by_subdivision(
        f.eval_interval, domain, floor, claim or f"{f} >= {floor}", max_depth
    )


def _abs_enclosure(x: RatInterval) -> RatInterval:
    if x.contains_zero():
        # undecided: force a split by reporting a straddling enclosure
        return RatInterval(Fraction(-1), x.abs_max() + 1)
    return RatInterval(min(abs(x.lo), abs(x.hi)), x.abs_max())
