"""Words, the three-map system on the line and its planar companion.

Symbols of the line system are 1, 2, 3 with fixed translations 0, t, 1.
A pair of symbols is coded into the seven-letter planar alphabet
``J`` by ``beta``; the planar maps ``S_(i,j)(x, y) = (λx + i, λy + j)``
then turn differences of orbit points into ``x`` and ``y`` coordinates,
and the ratio ``x / y`` (``proj``) measures how close ``t`` is to making
the two orbit points coincide.

Words compose leftmost-outermost: ``φ_w = φ_{w1} ∘ ... ∘ φ_{wn}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import InvalidParameter, LengthMismatch, NoSecondCoordinate
from .numerics import IntPoly, RatFunc, RatInterval, ScalarLike, as_interval, to_scalar

Word3 = tuple[int, ...]
Symbol = tuple[int, int]
WordJ = tuple[Symbol, ...]

J_ALPHABET: tuple[Symbol, ...] = ((0, 0), (-1, 0), (-1, -1), (1, 0), (1, 1), (0, -1), (0, 1))

# (δ³_i, δ²_i): indicator of symbol 3 and of symbol 2
_D3 = {1: 0, 2: 0, 3: 1}
_D2 = {1: 0, 2: 1, 3: 0}

_BETA = {(i, j): (_D3[j] - _D3[i], _D2[i] - _D2[j]) for i in (1, 2, 3) for j in (1, 2, 3)}
_BETA_INV = {v: k for k, v in _BETA.items() if k[0] != k[1]}
_BETA_INV[(0, 0)] = (1, 1)

K_PREFIX: WordJ = ((0, 1), (1, 1), (0, -1), (0, -1), (1, 0))
L_PREFIX: WordJ = ((0, 1), (1, 0), (0, 1), (0, 1), (-1, 0))


# ---------------------------------------------------------------------------
# parsing and formatting
# ---------------------------------------------------------------------------


def word3(symbols: Iterable[int] | str) -> Word3:
    if isinstance(symbols, str):
        symbols = [int(c) for c in symbols.strip()]
    w = tuple(int(s) for s in symbols)
    if any(s not in (1, 2, 3) for s in w):
        raise InvalidParameter(f"Word3 symbols must be 1, 2 or 3: {w}")
    return w


def format_word3(w: Word3) -> str:
    return "".join(str(s) for s in w)


def word_j(symbols: Iterable[Sequence[int]] | str) -> WordJ:
    if isinstance(symbols, str):
        s = symbols.strip()
        if not s:
            return ()
        symbols = [tuple(int(v) for v in part.split()) for part in s.split(",")]
    w = tuple((int(a), int(b)) for a, b in symbols)
    for sym in w:
        if sym not in J_ALPHABET:
            raise InvalidParameter(f"{sym} is not a planar symbol")
    return w


def format_word_j(w: WordJ) -> str:
    return ",".join(f"{a} {b}" for a, b in w)


def common_prefix_len(i: Sequence, j: Sequence) -> int:
    n = 0
    for a, b in zip(i, j):
        if a != b:
            break
        n += 1
    return n


def shift(w: Sequence, k: int) -> tuple:
    """σ^k: drop the first k symbols."""
    return tuple(w[k:])


def pad(w: WordJ, n: int) -> WordJ:
    """Append (0,0) until the word has length n."""
    return tuple(w) + ((0, 0),) * max(0, n - len(w))


# ---------------------------------------------------------------------------
# parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class ParamPair:
    lam: Fraction
    t: Fraction

    def __post_init__(self) -> None:
        lam, t = to_scalar(self.lam), to_scalar(self.t)
        if not 0 < lam < Fraction(1, 3):
            raise InvalidParameter(f"lambda must lie in (0, 1/3), got {lam}")
        if not 0 < t < lam / (1 - lam):
            raise InvalidParameter(f"t must lie in (0, lambda/(1-lambda)), got {t}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "t", t)

    @classmethod
    def of(cls, lam: ScalarLike, t: ScalarLike) -> ParamPair:
        return cls(to_scalar(lam), to_scalar(t))

    def translations(self) -> tuple[Fraction, Fraction, Fraction]:
        return (Fraction(0), self.t, Fraction(1))


def phi_at_zero(w: Word3, p: ParamPair) -> Fraction:
    """φ_w(0) = Σ (δ³ + t δ²)_{w_k} λ^{k-1}."""
    c = p.translations()
    acc = Fraction(0)
    for s in reversed(w):
        acc = c[s - 1] + p.lam * acc
    return acc


# ---------------------------------------------------------------------------
# coding map
# ---------------------------------------------------------------------------


def beta(i: Word3, j: Word3) -> WordJ:
    if len(i) != len(j):
        raise LengthMismatch(f"beta needs equal lengths, got {len(i)} and {len(j)}")
    return tuple(_BETA[(a, b)] for a, b in zip(i, j))


def beta_inv(w: WordJ) -> tuple[Word3, Word3]:
    pairs = [_BETA_INV[s] for s in w]
    return tuple(a for a, _ in pairs), tuple(b for _, b in pairs)


# ---------------------------------------------------------------------------
# planar orbit and projection
# ---------------------------------------------------------------------------


def s_orbit_point(w: WordJ, lam: ScalarLike) -> tuple[Fraction, Fraction]:
    """S_w(0,0) = (Σ i_k λ^{k-1}, Σ j_k λ^{k-1})."""
    lam = to_scalar(lam)
    x = y = Fraction(0)
    for a, b in reversed(w):
        x = a + lam * x
        y = b + lam * y
    return x, y


def coordinate_polys(w: WordJ) -> tuple[IntPoly, IntPoly]:
    return IntPoly(tuple(a for a, _ in w)), IntPoly(tuple(b for _, b in w))


def coordinate_cross_difference(k: WordJ, l: WordJ) -> IntPoly:
    """x_k·y_l − x_l·y_k from the raw coordinate series.

    Unlike the cross-difference of the canonical proj functions this keeps any
    factor shared by a word's two coordinates (for the base pair, 1 + λ).
    """
    xk, yk = coordinate_polys(k)
    xl, yl = coordinate_polys(l)
    return xk * yl - xl * yk


def proj_ratfunc(w: WordJ) -> RatFunc:
    """λ ↦ x(λ)/y(λ) for S_w(0,0), in canonical form."""
    x, y = coordinate_polys(w)
    if y.is_zero():
        raise NoSecondCoordinate(f"word {format_word_j(w)} has no nonzero second coordinate")
    return RatFunc(x, y)


class Infinite:
    """Value of proj at a point on the x-axis; compares far from any real."""

    __slots__ = ()

    def __repr__(self) -> str:
        return "Infinite"


INFINITE = Infinite()


def proj_value(w: WordJ, lam: ScalarLike) -> Fraction | Infinite:
    x, y = s_orbit_point(w, lam)
    if y == 0:
        return INFINITE
    return x / y


def leading_offset(w: WordJ) -> int | None:
    """Position of the first nonzero first coordinate minus that of the second.

    ``None`` when every first coordinate vanishes (proj ≡ 0).
    """
    px = next((k for k, (a, _) in enumerate(w) if a), None)
    py = next((k for k, (_, b) in enumerate(w) if b), None)
    if py is None:
        raise NoSecondCoordinate(f"word {format_word_j(w)} has no nonzero second coordinate")
    if px is None:
        return None
    return px - py


@dataclass(frozen=True)
class ProjBounds:
    enclosure: RatInterval
    abs_band: RatInterval
    m: int | None
    offset_derivative_bound: Fraction


def proj_bounds(w: WordJ, domain: RatInterval | ScalarLike) -> ProjBounds:
    """Enclosure of proj over ``domain`` together with the leading-term band.

    ``abs_band`` encloses ``|proj|`` through ``λ^m(1−2λ) ≤ |proj| ≤ λ^m/(1−2λ)``
    evaluated over the domain, and ``offset_derivative_bound`` is the
    closed-form ``2|m|λ^{m−1}/((1−λ)(1−2λ))`` maximised over the domain.  The
    latter is reported for comparison only; see ``transversality.derivative_bound``
    for the bound that is actually certified.
    """
    dom = as_interval(domain)
    if not (Fraction(0) < dom.lo and dom.hi < Fraction(1, 2)):
        raise InvalidParameter("domain must lie inside (0, 1/2)")
    rf = proj_ratfunc(w)
    m = leading_offset(w)
    enc = rf.eval_interval(dom)
    if m is None:
        return ProjBounds(enc, RatInterval.point(0), None, Fraction(0))
    band = RatInterval(
        _min_over(lambda lam: lam**m * (1 - 2 * lam), dom),
        _max_over(lambda lam: lam**m / (1 - 2 * lam), dom),
    )
    if m == 0:
        dbound = Fraction(0)
    else:
        dbound = _max_over(lambda lam: 2 * abs(m) * lam ** (m - 1) / ((1 - lam) * (1 - 2 * lam)), dom)
    return ProjBounds(enc, band, m, dbound)


def _min_over(g, dom: RatInterval) -> Fraction:
    # for fixed m each band function is monotone, log-concave (minimum) or
    # log-convex (maximum) on (0, 1/2), so the extremes sit at the endpoints
    return min(g(dom.lo), g(dom.hi))


def _max_over(g, dom: RatInterval) -> Fraction:
    return max(g(dom.lo), g(dom.hi))
