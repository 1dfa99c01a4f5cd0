"""Hexagonal hull of the planar attractor and the projected-interval covering.

P_λ is the hexagon |x| ≤ R, |y| ≤ R, |x − y| ≤ R with R = 1/(1−λ); its
vertices are the fixed points i/(1−λ), j/(1−λ) of the seven planar maps.
Projecting a scaled copy λⁿP_λ + (a, b) lying above the x-axis by
(x, y) ↦ x/y gives the interval [(a − λⁿR)/b, (a + λⁿR)/b].  The seven
first-level pieces of such a copy project onto intervals that overlap in
a chain and cover the parent exactly when six linear inequalities in
(a, b) hold; the checks below are written in that reduced linear form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence, Union

from .errors import InvalidParameter, PreconditionViolated
from .numerics import (
    CertResult,
    CertStatus,
    IntPoly,
    RatFunc,
    RatInterval,
    ScalarLike,
    as_interval,
    certify_by_subdivision,
    certify_positive,
    to_scalar,
)
from .symbolic_ifs import J_ALPHABET, WordJ, format_word_j, s_orbit_point

CHILD_ORDER: tuple[tuple[int, int], ...] = ((-1, 0), (-1, -1), (0, 1), (0, 0), (0, -1), (1, 1), (1, 0))
ADMISSIBLE_3_PREFIXES: tuple[WordJ, ...] = (((0, 1), (1, 1), (0, -1)), ((0, 1), (1, 0), (0, 1)))


@dataclass(frozen=True)
class HullPoint:
    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "a", to_scalar(self.a))
        object.__setattr__(self, "b", to_scalar(self.b))


@dataclass(frozen=True)
class HullBox:
    """Axis-parallel box of candidate (a, b) centres."""

    a: RatInterval
    b: RatInterval

    def corners(self) -> list[tuple[Fraction, Fraction]]:
        return [(x, y) for x in (self.a.lo, self.a.hi) for y in (self.b.lo, self.b.hi)]


BoxSource = Union[HullPoint, HullBox, Callable[[RatInterval], HullBox]]


def hull_vertices(lam: ScalarLike) -> list[tuple[Fraction, Fraction]]:
    lam = to_scalar(lam)
    r = 1 / (1 - lam)
    return [(i * r, j * r) for i, j in J_ALPHABET if (i, j) != (0, 0)]


def in_hull(x: Fraction, y: Fraction, lam: Fraction, scale: Fraction = Fraction(1)) -> bool:
    """Membership in scale·P_λ."""
    r = scale / (1 - lam)
    return abs(x) <= r and abs(y) <= r and abs(x - y) <= r


def hull_precondition(a: Fraction, b: Fraction, lam: Fraction) -> str | None:
    """Return the first failed requirement for (a, b) ∈ S_(0,1)(P_λ), a > 0, or None."""
    if not a > 0:
        return "a > 0"
    if not b > (1 - 2 * lam) / (1 - lam):
        return "b > (1-2λ)/(1-λ)"
    if not in_hull(a, b - 1, lam, lam):
        return "(a,b) in S_(0,1)(P_λ)"
    return None


def hull_projection_interval(pt: HullPoint, lam: ScalarLike, n: int) -> RatInterval:
    """Exact image of λⁿP_λ + (a, b) under (x, y) ↦ x/y."""
    lam = to_scalar(lam)
    bad = hull_precondition(pt.a, pt.b, lam)
    if bad:
        raise PreconditionViolated(f"hull point fails {bad}")
    r = lam**n / (1 - lam)
    if pt.a < r:
        raise PreconditionViolated("a >= λ^n/(1-λ) fails")
    return RatInterval((pt.a - r) / pt.b, (pt.a + r) / pt.b)


def child_intervals(a: Fraction, b: Fraction, lam: Fraction, n: int) -> list[RatInterval]:
    """Projections of the seven children of λⁿP_λ + (a, b), in covering order."""
    ln = lam**n
    c = ln * lam / (1 - lam)
    out = []
    for i, j in CHILD_ORDER:
        num = a + i * ln
        den = b + j * ln
        out.append(RatInterval((num - c) / den, (num + c) / den))
    return out


def union_equals_parent(a: Fraction, b: Fraction, lam: Fraction, n: int) -> bool:
    parent = RatInterval((a - lam**n / (1 - lam)) / b, (a + lam**n / (1 - lam)) / b)
    kids = child_intervals(a, b, lam, n)
    for left, right in zip(kids, kids[1:]):
        if right.lo > left.hi:
            return False
    return min(k.lo for k in kids) == parent.lo and max(k.hi for k in kids) == parent.hi and all(
        parent.contains(k) for k in kids
    )


# ---------------------------------------------------------------------------
# the six chain conditions in linear form
# ---------------------------------------------------------------------------

# Each condition is g(a, b) = α·a + β·b + γ ≥ 0 with coefficients depending on λ and λⁿ.
# Checking "right end of child k ≥ left end of child k+1" and clearing the
# (positive) denominators reduces every one of them to such a form.


def _conditions(lam, ln):
    """Return (alpha, beta, gamma) triples for the six chain conditions."""
    one_m = 1 - lam
    slope = 2 * lam / one_m
    return [
        ("l1", -1, slope, ln * (1 - 2 * lam) / one_m),
        ("l2", 2, -(1 - 3 * lam) / one_m, -ln),
        ("l3", -1, slope, ln * lam / one_m),
        ("l4", -1, slope, -ln * lam / one_m),
        ("l5", 2, -(1 - 3 * lam) / one_m, -ln),
        ("l6", -1, slope, -ln * (1 - 2 * lam) / one_m),
    ]


# l1 and l3 get harder as n grows (their constant term shrinks to 0); the
# others get easier.  For "all n' ≥ n" the first pair is checked at n = ∞.
_HARDER_WITH_N = {"l1", "l3"}


def _linear_min(alpha, beta, gamma, box: HullBox):
    """Enclosure of min over the box of α a + β b + γ (α, β, γ possibly intervals)."""
    best = None
    for a, b in box.corners():
        v = alpha * a + beta * b + gamma
        lo = v.lo if isinstance(v, RatInterval) else v
        best = lo if best is None else min(best, lo)
    return best


def _as_box(pt: BoxSource, lam: RatInterval) -> HullBox:
    if isinstance(pt, HullPoint):
        return HullBox(RatInterval.point(pt.a), RatInterval.point(pt.b))
    if isinstance(pt, HullBox):
        return pt
    return pt(lam)


@dataclass
class CoveringCert:
    status: CertStatus
    n: int
    uniform: bool
    lambda_domain: RatInterval
    results: dict[str, CertResult] = field(default_factory=dict)
    failed: list[str] = field(default_factory=list)

    @property
    def proved(self) -> bool:
        return self.status is CertStatus.PROVED

    def to_json_obj(self) -> dict:
        return {
            "claim": "seven projected children chain-overlap and cover the parent",
            "status": self.status.value,
            "n": self.n,
            "uniform_in_n": self.uniform,
            "domain": self.lambda_domain.to_strs(),
            "failed": self.failed,
            "conditions": {k: v.to_json_obj() for k, v in self.results.items()},
        }


def check_covering(pt: BoxSource, lam: RatInterval | ScalarLike, n: int, uniform: bool = False,
                   max_depth: int = 30) -> CoveringCert:
    """Certify the six chain conditions over a λ-interval.

    ``pt`` is a single centre, a fixed box of centres or a function mapping a
    λ-subinterval to a box (so the box may move with λ).  With ``uniform``
    the conditions are certified for every n' ≥ n at once.
    """
    dom = as_interval(lam)
    if not (0 < dom.lo and dom.hi < Fraction(1, 3)):
        raise InvalidParameter("λ-domain must lie inside (0, 1/3)")
    results: dict[str, CertResult] = {}
    failed: list[str] = []
    for idx, (name, *_rest) in enumerate(_conditions(Fraction(1, 4), Fraction(1))):
        at_infinity = uniform and name in _HARDER_WITH_N

        def enclose(x: RatInterval, idx=idx, at_infinity=at_infinity) -> RatInterval:
            ln = RatInterval.point(0) if at_infinity else x**n
            _, alpha, beta, gamma = _conditions(x, ln)[idx]
            box = _as_box(pt, x)
            lo = _linear_min(alpha, beta, gamma, box)
            return RatInterval(lo, max(lo, Fraction(0)) + 1)

        res = certify_by_subdivision(enclose, dom, 0, f"chain condition {name}, n={n}", max_depth)
        results[name] = res
        if not res.proved:
            failed.append(name)
    status = CertStatus.PROVED if not failed else CertStatus.REFUTED
    if failed and all(results[f].status is CertStatus.INCONCLUSIVE for f in failed):
        status = CertStatus.INCONCLUSIVE
    return CoveringCert(status, n, uniform, dom, results, failed)


# ---------------------------------------------------------------------------
# the box of centres for words with an admissible three-letter prefix
# ---------------------------------------------------------------------------


def projint_box(lam: RatInterval | ScalarLike) -> HullBox:
    """Centres S_k(0,0) of all words k with an admissible 3-prefix lie in this box.

    a ∈ [λ − λ³/(1−λ), λ + λ³/(1−λ)] and
    b ∈ [1 + λ² − λ³/(1−λ), 1 + λ − λ² + λ³/(1−λ)].
    """
    x = as_interval(lam)
    tail = x**3 / (1 - x)
    a = RatInterval((x - tail).lo, (x + tail).hi)
    b = RatInterval((1 + x**2 - tail).lo, (1 + x - x**2 + tail).hi)
    return HullBox(a, b)


def projint_box_preconditions(lam: Fraction) -> str | None:
    """Check that every centre in the box is a valid hull point at level >= 3."""
    box = projint_box(lam)
    for a, b in box.corners():
        bad = hull_precondition(a, b, lam)
        if bad:
            return bad
    if box.a.lo < lam**3 / (1 - lam):
        return "a >= λ^3/(1-λ)"
    return None


def box_contains_centres(lam: Fraction, words: Sequence[WordJ]) -> bool:
    box = projint_box(lam)
    for w in words:
        a, b = s_orbit_point(w, lam)
        if not (box.a.contains(a) and box.b.contains(b)):
            return False
    return True


@dataclass
class IntervalReport:
    word: WordJ
    lam: Fraction
    center: Fraction
    hull_interval: RatInterval
    length: Fraction
    length_lower: Fraction
    length_upper: Fraction
    covering: CoveringCert
    chain_checked: int

    @property
    def ok(self) -> bool:
        return (
            self.covering.proved
            and self.length_lower <= self.length <= self.length_upper
            and self.hull_interval.lo < self.center < self.hull_interval.hi
        )


def projected_cylinder_interval(k: WordJ, lam: ScalarLike, depth: int = 1) -> IntervalReport:
    """The interval proj(S_k(K_λ)) with its centre, length and a covering certificate.

    The covering certificate is uniform: the box of centres is checked at
    n = 3 for every deeper level, and the exact seven-child union is
    additionally confirmed for every descendant of k down to ``depth`` levels.
    """
    lam = to_scalar(lam)
    if not (Fraction(1, 4) < lam < Fraction(1, 3)):
        raise PreconditionViolated("λ must lie in (1/4, 1/3)")
    if len(k) < 3 or tuple(k[:3]) not in ADMISSIBLE_3_PREFIXES:
        raise PreconditionViolated(f"word {format_word_j(k)} lacks an admissible 3-prefix")
    a, b = s_orbit_point(k, lam)
    n = len(k)
    hull = hull_projection_interval(HullPoint(a, b), lam, n)
    center = a / b
    bad = projint_box_preconditions(lam)
    if bad:
        raise PreconditionViolated(f"box of centres fails {bad}")
    cov = check_covering(projint_box, RatInterval.point(lam), 3, uniform=True)
    checked = 0
    frontier = [(a, b, n)]
    for _ in range(depth):
        nxt = []
        for pa, pb, pn in frontier:
            if not union_equals_parent(pa, pb, lam, pn):
                raise PreconditionViolated(f"children of a node at level {pn} fail to cover the parent")
            checked += 1
            ln = lam**pn
            for i, j in CHILD_ORDER:
                nxt.append((pa + i * ln, pb + j * ln, pn + 1))
        frontier = nxt
    length = hull.width
    return IntervalReport(k, lam, center, hull, length, 2 * lam**n, 3 * lam**n, cov, checked)


# ---------------------------------------------------------------------------
# closed-form bounds behind the interval-length claim
# ---------------------------------------------------------------------------

L = IntPoly((0, 1))


def _rf(coeffs_num, coeffs_den=(1,)) -> RatFunc:
    return RatFunc(IntPoly(tuple(coeffs_num)), IntPoly(tuple(coeffs_den)))


def projint_claims() -> dict[str, RatFunc]:
    """Functions of λ that must be ≥ 0 on [1/4, 1/3]."""
    lam = RatFunc(L)
    one = RatFunc.const(1)
    tail = lam**3 / (one - lam)
    a_lo = lam - tail
    b_hi = one + lam - lam**2 + tail
    b_lo = one + lam**2 - tail
    a_hi = lam + tail
    return {
        # lower length bound as printed: 2/(1−2λ²−2λ³) ≥ 2
        "length_lower_printed": _rf([2], [1, 0, -2, -2]) - 2,
        # the same bound with the sign of λ³ that the expansion of b_max(1−λ) produces
        "length_lower_expanded": _rf([2], [1, 0, -2, 2]) - 2,
        "length_upper": 3 - _rf([2], [1, -1, 1, -2]),
        # the minimum display, first entry: 2a_min − (1−3λ) b_max/(1−λ) ≥ λ³
        "min_display_first": 2 * a_lo - (one - 3 * lam) * b_hi / (one - lam) - lam**3,
        # second entry: 2λ b_min/(1−λ) − λ³(1−2λ)/(1−λ) − a_max ≥ λ³... rewritten as
        # (2λ b_min − (1−λ) a_max)/(1−2λ) ≥ λ³
        "min_display_second": (2 * lam * b_lo - (one - lam) * a_hi) / (one - 2 * lam) - lam**3,
    }


@dataclass
class ProjintCert:
    domain: RatInterval
    results: dict[str, CertResult]

    @property
    def proved(self) -> bool:
        return all(r.proved for r in self.results.values())

    def to_json_obj(self) -> dict:
        return {
            "claim": "projected cylinder length between 2λ^n and 3λ^n; covering minimum display",
            "domain": self.domain.to_strs(),
            "status": "PROVED" if self.proved else "FAILED",
            "claims": {k: v.to_json_obj() for k, v in self.results.items()},
        }


def verify_projint_numeric(lambda_domain: RatInterval | None = None, floors: dict[str, ScalarLike] | None = None,
                           max_depth: int = 40) -> ProjintCert:
    dom = lambda_domain or RatInterval(Fraction(1, 4), Fraction(1, 3))
    if dom.lo < Fraction(1, 4) or dom.hi > Fraction(1, 3):
        raise InvalidParameter("domain must lie inside [1/4, 1/3]")
    floors = floors or {}
    results = {}
    for name, f in projint_claims().items():
        results[name] = certify_positive(f, dom, floors.get(name, 0), max_depth, claim=name)
    return ProjintCert(dom, results)
