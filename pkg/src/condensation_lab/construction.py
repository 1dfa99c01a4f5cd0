"""Nested parameter intervals along a binary tree of planar words.

Every node ω carries a word k(ω) over the planar alphabet and a λ-interval
I_ω of width η_{|k(ω)|}.  To expand a node, an extension of the auxiliary
word l(ω) is steered towards proj(S_{k(ω)}(0,0)) at a rational anchor λ''
near the centre of I_ω.  The two projections then cross exactly once
(transversality), and two disjoint child intervals are cut on either side
of the crossing.  Along a branch the limit parameters condense at the rate
η, while every other word stays a definite distance away.

Everything checkable is checked with exact rationals.  The one place
where the argument needs a transcendental anchor is replaced by a
rational anchor plus two surrogates that are disclosed in every bundle.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field
from decimal import ROUND_CEILING, Decimal, localcontext
from fractions import Fraction
from typing import Callable, Sequence

from .errors import (
    BudgetExceeded,
    ConstructionFailed,
    EtaTooSlow,
    GapBoundTooWeak,
    InvalidParameter,
    MarginViolation,
    NoBranchPoint,
    NoSignChange,
    PreconditionViolated,
    RootNotFound,
)
from .numerics import (
    CertResult,
    IntPoly,
    RatFunc,
    RatInterval,
    ScalarLike,
    certify_positive,
    cross_difference,
    decimal_str,
    exact_quotient,
    frac_str,
    get_bit_budget,
    isolate_root,
    simplest_rational_in,
    to_scalar,
)
from .projection_geometry import CHILD_ORDER, CoveringCert, check_covering, projint_box, union_equals_parent
from .separation import min_gap
from .symbolic_ifs import (
    J_ALPHABET,
    K_PREFIX,
    L_PREFIX,
    ParamPair,
    WordJ,
    beta,
    coordinate_cross_difference,
    beta_inv,
    format_word3,
    format_word_j,
    pad,
    phi_at_zero,
    proj_ratfunc,
    s_orbit_point,
)
from .transversality import (
    TransversalityCert,
    certify_transversality,
    prefixed_derivative_bound,
    uniform_offset_derivative_bound,
)

QUARTER = Fraction(1, 4)
THIRD = Fraction(1, 3)
CLOSED_DOMAIN = RatInterval(QUARTER, THIRD)
MAX_DEPTH = 6
DEFAULT_K_CAP = 200
DEFAULT_MAX_WORD_LEN = 4000
ENUMERATION_MAX_LEN = 6

SURROGATE_DISCLOSURES = (
    "anchor lambda'' is rational (simplest rational in delta*I), not transcendental",
    "value coincidences at the anchor are resolved by exact identity of the rational functions",
    "the minimum gap between distinct projections at the anchor is exact enumeration for short words "
    "and a denominator bound (1-2l)^2/(1-l)^2 * q^(-2(L-1)) otherwise",
    "designated evaluation point: simplest rationals in the lambda-box and the t-box",
)


# ---------------------------------------------------------------------------
# the sequence η
# ---------------------------------------------------------------------------


@dataclass
class EtaSpec:
    """A decreasing positive sequence η_1 ≥ η_2 ≥ … with a certified ratio bound.

    ``ratio_from(k)`` bounds η_{j+1}/η_j for every j ≥ k; ``tail_ratio`` is
    its value at k = 1, so Σ_{j≥n} η_j ≤ C·η_n with C = 1/(1−ρ).
    """

    name: str
    value_fn: Callable[[int], Fraction]
    log2_fn: Callable[[int], float]
    tail_ratio: Fraction
    ratio_from: Callable[[int], Fraction]
    max_index: int | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not 0 < self.tail_ratio < 1:
            raise InvalidParameter("eta tail ratio must lie in (0, 1)")

    @property
    def tail_constant(self) -> Fraction:
        return 1 / (1 - self.tail_ratio)

    def __call__(self, n: int) -> Fraction:
        if n < 1:
            raise InvalidParameter("eta is indexed from 1")
        if self.max_index is not None and n > self.max_index:
            raise BudgetExceeded(f"eta table has {self.max_index} entries, index {n} requested")
        v = self._cache.get(n)
        if v is None:
            if self.log2_fn(n) < -get_bit_budget():
                raise BudgetExceeded(f"eta_{n} needs about {-self.log2_fn(n):.3g} bits")
            v = self.value_fn(n)
            self._cache[n] = v
        return v

    def log2(self, n: int) -> float:
        return self.log2_fn(n)

    def check_ratio(self, k: int) -> bool:
        """Exact check of η_{k+1} ≤ min(ρ, ratio_from(k))·η_k."""
        return self(k + 1) <= min(self.tail_ratio, self.ratio_from(k)) * self(k)

    def spot_check(self, n_max: int) -> bool:
        """Ratios hold, η decreases, and (1/n) log η_n strictly decreases on 2..n_max."""
        top = n_max if self.max_index is None else min(n_max, self.max_index)
        if top < 3:
            return True
        if not all(self.check_ratio(k) for k in range(1, top)):
            return False
        rates = [self.log2(n) / n for n in range(2, top + 1)]
        return all(b < a for a, b in zip(rates, rates[1:]))

    def to_json_obj(self) -> dict:
        return {
            "name": self.name,
            "tail_ratio": frac_str(self.tail_ratio),
            "tail_constant": frac_str(self.tail_constant),
            "max_index": self.max_index,
        }


def _nlogn_exponent(n: int) -> int:
    if n == 1:
        return 0
    # n ln n is irrational for n ≥ 2, so 50 digits settle the ceiling
    with localcontext() as ctx:
        ctx.prec = 50
        v = Decimal(n) * Decimal(n).ln()
        return int(v.to_integral_value(rounding=ROUND_CEILING))


def eta_builtin(name: str) -> EtaSpec:
    """η_n = 2^(−n²) ("nsq"), n^(−n) ("nn") or 2^(−⌈n ln n⌉) ("nlogn")."""
    if name == "nsq":
        # η_{j+1}/η_j = 2^(−2j−1)
        return EtaSpec("nsq", lambda n: Fraction(1, 1 << (n * n)), lambda n: -float(n * n),
                       Fraction(1, 8), lambda k: Fraction(1, 1 << (2 * k + 1)))
    if name == "nn":
        # η_{j+1}/η_j = (j/(j+1))^j/(j+1) ≤ 1/(j+1), and = 1/4 at j = 1
        return EtaSpec("nn", lambda n: Fraction(1, n**n), lambda n: -n * math.log2(n),
                       Fraction(1, 4), lambda k: Fraction(1, 4) if k == 1 else Fraction(1, k + 1))
    if name == "nlogn":
        # (j+1)ln(j+1) − j ln j ≥ ln(j+1) + 1/2 > 1, and the ceilings differ by at least its floor
        return EtaSpec("nlogn", lambda n: Fraction(1, 1 << _nlogn_exponent(n)),
                       lambda n: -float(_nlogn_exponent(n)), Fraction(1, 2),
                       lambda k: Fraction(1, 1 << max(1, math.floor(math.log(k + 1)))))
    raise InvalidParameter(f"unknown eta {name!r}; expected nsq, nn, nlogn or table:<file>")


def eta_from_table(values: Sequence[ScalarLike], rho: ScalarLike) -> EtaSpec:
    vals = [to_scalar(v) for v in values]
    rho = to_scalar(rho)
    if not vals or any(v <= 0 for v in vals):
        raise InvalidParameter("eta table entries must be positive")
    for k, (a, b) in enumerate(zip(vals, vals[1:]), start=1):
        if b > rho * a:
            raise InvalidParameter(f"eta table violates the declared ratio {rho} at n={k}")
    return EtaSpec("table", lambda n: vals[n - 1], lambda n: _log2_exact(vals[n - 1]),
                   rho, lambda k: rho, max_index=len(vals))


def load_eta_table(path: str, rho: ScalarLike) -> EtaSpec:
    """CSV with header ``n,eta`` and rows n = 1, 2, … in order."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    vals = []
    for expected, row in enumerate(rows, start=1):
        if int(row["n"]) != expected:
            raise InvalidParameter(f"eta table must list n = 1, 2, ... in order (row {expected})")
        vals.append(to_scalar(row["eta"]))
    return eta_from_table(vals, rho)


def parse_eta(selector: str, rho: ScalarLike | None = None) -> EtaSpec:
    if selector.startswith("table:"):
        if rho is None:
            raise InvalidParameter("a table eta needs a declared ratio bound (--rho)")
        return load_eta_table(selector[len("table:"):], rho)
    return eta_builtin(selector)


# ---------------------------------------------------------------------------
# certificates shared by every node
# ---------------------------------------------------------------------------


def _rf(*c: int) -> RatFunc:
    return RatFunc(IntPoly(c))


@dataclass
class GlobalCerts:
    """Word-independent facts used at every node."""

    trans: TransversalityCert
    location: dict[str, CertResult]
    far_offset: CertResult
    covering: CoveringCert
    offset_derivative: Fraction
    prefix_derivative: Fraction

    @property
    def delta(self) -> Fraction:
        return self.trans.delta

    @property
    def combined_derivative(self) -> Fraction:
        """Bound on |d/dλ (proj_i − proj_k)| for an offset ≥ −1 word i and a prefixed word k."""
        return self.offset_derivative + self.prefix_derivative

    @property
    def ok(self) -> bool:
        return (
            all(r.proved and r.lower is not None and r.lower > 0 for r in self.location.values())
            and self.far_offset.proved and self.far_offset.lower > 0
            and self.covering.proved
            and self.combined_derivative < 1 / self.delta
        )

    def to_json_obj(self) -> dict:
        return {
            "transversality": self.trans.to_json_obj(with_trees=False),
            "location": {k: {"status": v.status.value, "lower": frac_str(v.lower)} for k, v in self.location.items()},
            "far_offset": {"status": self.far_offset.status.value, "lower": frac_str(self.far_offset.lower)},
            "covering": {"status": self.covering.status.value, "uniform_in_n": self.covering.uniform},
            "offset_derivative_bound": frac_str(self.offset_derivative),
            "prefix_derivative_bound": frac_str(self.prefix_derivative),
            "ok": self.ok,
        }


def location_claims() -> dict[str, RatFunc]:
    """Positive-on-[1/4, 1/3] claims giving 0 ≤ proj ≤ λ/(1−λ) for every prefixed word."""
    lam = _rf(0, 1)
    e = lam**5 / (1 - lam)
    ceiling = lam / (1 - lam)
    return {
        "first_prefix_upper": ceiling - (_rf(0, 1, 0, 0, 1) + e) / (_rf(1, 1, -1, -1) - e),
        "second_prefix_upper": ceiling - (_rf(0, 1, 0, 0, -1) + e) / (_rf(1, 0, 1, 1) - e),
        "first_prefix_numerator": _rf(0, 1, 0, 0, 1) - e,
        "second_prefix_numerator": _rf(0, 1, 0, 0, -1) - e,
        "first_prefix_denominator": _rf(1, 1, -1, -1) - e,
        "second_prefix_denominator": _rf(1, 0, 1, 1) - e,
    }


def global_certificates(trans: TransversalityCert | None = None) -> GlobalCerts:
    trans = trans or certify_transversality()
    loc = {name: certify_positive(f, CLOSED_DOMAIN, 0, claim=f"{name} > 0 on [1/4, 1/3]")
           for name, f in location_claims().items()}
    lam = _rf(0, 1)
    # offset m ≤ −2: |proj| ≥ λ^m(1−2λ) ≥ (1−2λ)/λ² > 2λ/(1−λ)
    far = certify_positive((1 - 2 * lam) / lam**2 - 2 * lam / (1 - lam), CLOSED_DOMAIN, 0,
                           claim="(1-2l)/l^2 - 2l/(1-l) > 0 on [1/4, 1/3]")
    cov = check_covering(projint_box, trans.lambda_domain, 3, uniform=True)
    off = uniform_offset_derivative_bound(trans.lambda_domain, m_min=-1)
    pre = prefixed_derivative_bound(trans.lambda_domain)
    return GlobalCerts(trans, loc, far, cov, off, pre)


# ---------------------------------------------------------------------------
# the base pair and the root node
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BaseRoot:
    enclosure: RatInterval
    cross_difference: IntPoly
    quotient: IntPoly

    @property
    def quadratic(self) -> IntPoly:
        return IntPoly((-1, 3, 1))


def base_root(width: ScalarLike = Fraction(1, 10**12)) -> BaseRoot:
    """Enclosure of the unique crossing of the two base words in [1/4, 1/3].

    The cross-difference factors as (λ² + 3λ − 1) times a polynomial with no
    root in the domain, so the crossing is (√13 − 3)/2.
    """
    cd = coordinate_cross_difference(K_PREFIX, L_PREFIX)
    quad = IntPoly((-1, 3, 1))
    quotient = exact_quotient(cd, quad)
    enc = isolate_root(cd, CLOSED_DOMAIN, width)
    return BaseRoot(enc, cd, quotient)


def _record(ok: bool, detail: str) -> dict:
    return {"ok": bool(ok), "detail": detail}


@dataclass
class ConstructionNode:
    omega: str
    k_word: WordJ
    interval: RatInterval
    l_word: WordJ
    m_used: int | None
    cert: dict[str, dict] = field(default_factory=dict)
    expansion: dict | None = None

    @property
    def level(self) -> int:
        return len(self.omega)

    @property
    def length(self) -> int:
        return len(self.k_word)

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.cert.values())

    def _body(self) -> dict:
        return {
            "omega": self.omega,
            "k_word": format_word_j(self.k_word),
            "k_length": self.length,
            "l_word": format_word_j(self.l_word),
            "interval": self.interval.to_strs(),
            "interval_decimal": [decimal_str(self.interval.lo), decimal_str(self.interval.hi)],
            "m_used": self.m_used,
            "conditions": self.cert,
        }

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self._body(), sort_keys=True).encode()).hexdigest()

    def to_json_obj(self) -> dict:
        obj = self._body()
        obj["ok"] = self.ok
        obj["digest"] = self.digest()
        if self.expansion is not None:
            obj["expansion"] = self.expansion
        return obj


def _admissible(w: WordJ) -> bool:
    return tuple(w[:5]) in (K_PREFIX, L_PREFIX)


def search_k(eta: EtaSpec, delta: Fraction, lam_enclosure: RatInterval, cap: int = DEFAULT_K_CAP) -> tuple[int, str]:
    """Smallest K with [λ' ± η_K/2] ⊂ (1/4, 1/3) and 2·4^(−k) > (3/2)δ⁻¹η_k for all k ≥ K.

    The inequality propagates from k to k+1 whenever η_{k+1}/η_k ≤ 1/4,
    so it is checked exactly up to the first index where both hold and the
    ratio bound takes over.  A finite table is checked to its end.
    """
    factor = Fraction(3, 2) / delta

    def ineq(k: int) -> bool:
        return 2 * Fraction(1, 4**k) > factor * eta(k)

    def boxed(k: int) -> bool:
        half = eta(k) / 2
        return QUARTER < lam_enclosure.lo - half and lam_enclosure.hi + half < THIRD

    top = cap if eta.max_index is None else min(cap, eta.max_index)
    start = None
    how = ""
    for k in range(1, top + 1):
        if eta.ratio_from(k) <= QUARTER and ineq(k):
            start, how = k, f"exact for k < {k}, ratio bound <= 1/4 from k = {k}"
            break
    if start is None:
        if eta.max_index is None or eta.max_index > cap:
            raise EtaTooSlow(f"no K <= {cap} satisfies the start conditions for eta {eta.name}")
        start, how = eta.max_index + 1, f"exact over the whole table (n <= {eta.max_index})"
    K = start
    while K > 1 and ineq(K - 1):
        K -= 1
    while K <= top and not boxed(K):
        K += 1
    if K > top:
        raise EtaTooSlow(f"no K <= {top} satisfies the start conditions for eta {eta.name}")
    return K, how


def initial_node(eta: EtaSpec, cert: TransversalityCert | GlobalCerts, k_cap: int = DEFAULT_K_CAP) -> ConstructionNode:
    """Root node: the base pair, I_∅ centred at a rational within η/2^20 of the crossing."""
    g = cert if isinstance(cert, GlobalCerts) else None
    trans = cert.trans if isinstance(cert, GlobalCerts) else cert
    delta = trans.delta
    coarse = base_root(Fraction(1, 10**12))
    K, how = search_k(eta, delta, coarse.enclosure, k_cap)
    k0 = K_PREFIX if K <= len(K_PREFIX) else pad(K_PREFIX, K)
    n0 = len(k0)
    eta0 = eta(n0)
    fine = isolate_root(coarse.cross_difference, coarse.enclosure, eta0 / (1 << 20))
    centre = simplest_rational_in(fine.lo, fine.hi)
    interval = RatInterval(centre - eta0 / 2, centre + eta0 / 2)
    fk, fl = proj_ratfunc(k0), proj_ratfunc(L_PREFIX)
    # difference is increasing on the domain, so its extremes sit at the endpoints
    ends = [abs(fk.eval_exact(x) - fl.eval_exact(x)) for x in (interval.lo, interval.hi)]
    node = ConstructionNode("", k0, interval, L_PREFIX, None)
    node.cert = {
        "start_index": dict(_record(n0 >= K, f"K = {K} ({how}); |k| = {n0}"), K=K),
        "padding_preserves_projection": _record(fk == proj_ratfunc(K_PREFIX), "canonical forms equal"),
        "1_prefix": _record(tuple(k0[:5]) == K_PREFIX, "root word begins with the first admissible prefix"),
        "3_width": _record(interval.width == eta0, f"width = eta_{n0}"),
        "inside_domain": _record(QUARTER < interval.lo and interval.hi < THIRD, "I within (1/4, 1/3)"),
        "4_start_distance": _record(max(ends) <= eta0 / delta,
                                    f"|proj_l - proj_k| <= {decimal_str(max(ends))} <= eta/delta on I"),
        "5_location": _record(_admissible(k0) and (g is None or g.ok), "prefixed word, location certificates"),
    }
    return node


# ---------------------------------------------------------------------------
# the two-interval step
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepDetail:
    root: RatInterval
    left: RatInterval
    right: RatInterval
    endpoint_gaps: tuple[Fraction, Fraction, Fraction, Fraction]


def _orient(k: WordJ, l: WordJ) -> tuple[WordJ, WordJ]:
    """Return (first-prefix word, second-prefix word)."""
    if tuple(k[:5]) == K_PREFIX and tuple(l[:5]) == L_PREFIX:
        return k, l
    if tuple(k[:5]) == L_PREFIX and tuple(l[:5]) == K_PREFIX:
        return l, k
    raise PreconditionViolated("the two words must begin with different admissible prefixes")


def two_interval_step_detail(k: WordJ, l: WordJ, lambda_center: ScalarLike, epsilon: ScalarLike,
                             eta_at_l: ScalarLike, cert: TransversalityCert) -> StepDetail:
    lam_c, eps, h = to_scalar(lambda_center), to_scalar(epsilon), to_scalar(eta_at_l)
    delta = cert.delta
    dinv = 1 / delta
    first, second = _orient(k, l)
    if not h < dinv * eps:
        raise PreconditionViolated("eta_|l| must be below epsilon/delta")
    margin = 3 * dinv * eps
    window = RatInterval(lam_c - margin, lam_c + margin)
    if not (QUARTER < window.lo and window.hi < THIRD):
        raise MarginViolation(f"centre {decimal_str(lam_c)} is within 3 eps/delta of the domain boundary")
    if not window.lo >= cert.lambda_domain.lo or not window.hi <= cert.lambda_domain.hi:
        raise MarginViolation("window leaves the certified transversality domain")
    f1, f2 = proj_ratfunc(first), proj_ratfunc(second)

    def diff(x: Fraction) -> Fraction:
        return f1.eval_exact(x) - f2.eval_exact(x)

    if not abs(diff(lam_c)) < eps:
        raise RootNotFound("the projections are not epsilon-close at the centre")
    search = RatInterval(lam_c - dinv * eps, lam_c + dinv * eps)
    try:
        enc = isolate_root(cross_difference(f1, f2), search, h / (1 << 16))
    except NoSignChange as exc:
        raise RootNotFound(f"no crossing within eps/delta of the centre: {exc}") from exc
    c = simplest_rational_in(enc.lo, enc.hi)
    left = RatInterval(c - 3 * h / 2, c - h / 2)
    right = RatInterval(c + h / 2, c + 3 * h / 2)
    # the difference increases with slope in [δ, 1/δ]; |diff| on each interval lies between its endpoint values
    vals = (diff(left.lo), diff(left.hi), diff(right.lo), diff(right.hi))
    if not (vals[0] < vals[1] < 0 < vals[2] < vals[3]):
        raise MarginViolation("difference is not ordered as the monotone crossing requires")
    gaps = tuple(abs(v) for v in vals)
    low, high = delta * h / 2, Fraction(3, 2) * dinv * h
    if not all(low < g < high for g in gaps):
        raise MarginViolation("two-sided distance bound fails at an endpoint")
    if not (window.contains(left) and window.contains(right)):
        raise MarginViolation("intervals leave the 3 eps/delta window")
    return StepDetail(enc, left, right, gaps)


def two_interval_step(k: WordJ, l: WordJ, lambda_center: ScalarLike, epsilon: ScalarLike,
                      eta_at_l: ScalarLike, cert: TransversalityCert) -> tuple[RatInterval, RatInterval]:
    """Two disjoint intervals of width η_|l| flanking the crossing of proj_k and proj_l.

    On both, ½δη < |proj_k − proj_l| < (3/2)δ⁻¹η, checked exactly at the
    endpoints and extended to the interiors by monotonicity.
    """
    d = two_interval_step_detail(k, l, lambda_center, epsilon, eta_at_l, cert)
    return d.left, d.right


# ---------------------------------------------------------------------------
# steering words towards a target projection
# ---------------------------------------------------------------------------


def _hull_interval(a: Fraction, b: Fraction, lam: Fraction, n: int) -> RatInterval:
    r = lam**n / (1 - lam)
    return RatInterval((a - r) / b, (a + r) / b)


def _children(a: Fraction, b: Fraction, lam: Fraction, n: int):
    ln = lam**n
    c = ln * lam / (1 - lam)
    for sym in CHILD_ORDER:
        ca, cb = a + sym[0] * ln, b + sym[1] * ln
        yield sym, ca, cb, RatInterval((ca - c) / cb, (ca + c) / cb)


def _clearance(iv: RatInterval, x: Fraction) -> Fraction:
    return min(x - iv.lo, iv.hi - x)


@dataclass(frozen=True)
class DescentResult:
    extensions: tuple[WordJ, WordJ]
    branch_level: int
    distances: tuple[Fraction, Fraction]


def greedy_descend_detail(l_parent: WordJ, target: ScalarLike, lam: ScalarLike, depth: int,
                          tolerance: ScalarLike, max_levels: int = DEFAULT_MAX_WORD_LEN) -> DescentResult:
    lam, target, tol = to_scalar(lam), to_scalar(target), to_scalar(tolerance)
    n = len(l_parent)
    a, b = s_orbit_point(l_parent, lam)
    top = _hull_interval(a, b, lam, n)
    if not top.lo < target < top.hi:
        raise PreconditionViolated("target is not interior to the parent's projected hull")

    def step(a, b, n, allow_branch):
        if not union_equals_parent(a, b, lam, n):
            raise PreconditionViolated(f"children fail to cover the parent at level {n}")
        kids = list(_children(a, b, lam, n))
        hits = [i for i, (_, _, _, iv) in enumerate(kids) if iv.lo < target < iv.hi]
        if not hits:
            hits = [i for i, (_, _, _, iv) in enumerate(kids) if iv.contains(target)]
        if not hits:
            raise PreconditionViolated("target escaped the covering")
        if allow_branch:
            for i in hits:
                if i + 1 in hits:
                    return [kids[i], kids[i + 1]]
        best = max(hits, key=lambda i: _clearance(kids[i][3], target))
        return [kids[best]]

    prefix: list = []
    branch_level = None
    for _ in range(max_levels):
        nxt = step(a, b, n, True)
        if len(nxt) == 2:
            branch_level = n
            break
        sym, a, b, _ = nxt[0]
        prefix.append(sym)
        n += 1
    if branch_level is None:
        raise NoBranchPoint(f"no overlap region hit within {max_levels} levels")
    exts = []
    dists = []
    for sym, ca, cb, iv in nxt:
        word = list(prefix) + [sym]
        cn = n + 1
        while len(word) < depth or iv.width >= tol:
            if len(word) > max_levels:
                raise BudgetExceeded(f"descent needs more than {max_levels} letters")
            nsym, ca, cb, iv = step(ca, cb, cn, False)[0]
            word.append(nsym)
            cn += 1
        full = tuple(l_parent) + tuple(word)
        x, y = s_orbit_point(full, lam)
        dist = abs(x / y - target)
        if not dist < tol:
            raise ConstructionFailed("descended word misses the tolerance")
        exts.append(tuple(word))
        dists.append(dist)
    if exts[0] == exts[1]:
        raise ConstructionFailed("branch produced identical words")
    return DescentResult((exts[0], exts[1]), branch_level, (dists[0], dists[1]))


def greedy_descend(l_parent: WordJ, target: ScalarLike, lam: ScalarLike, depth: int,
                   tolerance: ScalarLike, max_levels: int = DEFAULT_MAX_WORD_LEN) -> tuple[WordJ, WordJ]:
    """Two distinct extensions l′ (|l′| ≥ depth) with |proj(S_{l_parent l′}(0,0)) − target| < tolerance.

    The descent follows the seven-child covering of projected hulls, keeps
    the child with the most clearance around the target, and branches at the
    first level where two consecutive children both contain it.
    """
    return greedy_descend_detail(l_parent, target, lam, depth, tolerance, max_levels).extensions


# ---------------------------------------------------------------------------
# the minimum gap between distinct projections at the anchor
# ---------------------------------------------------------------------------


def gap_lower_bound(lambda_pq: ScalarLike, max_len: int) -> Fraction:
    """Positive lower bound on |proj_i − proj_j| over words of length ≤ max_len with distinct values.

    With λ = p/q every finite projection is X/Y with integers X, Y scaled by
    q^(L−1) and |Y| ≤ q^(L−1)/(1−λ), so a nonzero difference is at least
    (1−λ)²·q^(−2(L−1)); the smaller constant (1−2λ)²/(1−λ)² is used.
    """
    lam = to_scalar(lambda_pq)
    if not QUARTER < lam < THIRD:
        raise InvalidParameter("gap_lower_bound needs lambda in (1/4, 1/3)")
    if max_len < 1:
        raise InvalidParameter("max_len must be positive")
    q = lam.denominator
    return (1 - 2 * lam) ** 2 / (1 - lam) ** 2 / Fraction(q) ** (2 * (max_len - 1))


@dataclass(frozen=True)
class GapInfo:
    value: Fraction
    method: str
    max_len: int
    words_checked: int
    coincident: tuple[WordJ, ...] = ()


def _word_from_index7(index: int, n: int) -> WordJ:
    out = []
    for _ in range(n):
        out.append(J_ALPHABET[index % 7])
        index //= 7
    return tuple(reversed(out))


def enumerate_projections(lam: Fraction, length: int) -> list[tuple[Fraction, int]]:
    """(proj value, word index) for every length-L word with y ≠ 0, sorted by value."""
    p, q = lam.numerator, lam.denominator
    xs, ys = [0], [0]
    # build from the last letter inwards: X = a_0 q^(k) + p·X_suffix (integers over q^(L−1))
    for k in range(length):
        qk = q**k
        xs = [a * qk + p * x for a, _ in J_ALPHABET for x in xs]
        ys = [b * qk + p * y for _, b in J_ALPHABET for y in ys]
    out = [(Fraction(x, y), i) for i, (x, y) in enumerate(zip(xs, ys)) if y]
    out.sort()
    return out


def eq_other_gap(lam: ScalarLike, max_len: int, reference: WordJ | None = None,
                 enumeration_max_len: int = ENUMERATION_MAX_LEN) -> GapInfo:
    """min |proj_i − proj_j| over words of length ≤ max_len with distinct values at λ.

    Short words are enumerated exactly (padding by (0,0) leaves values
    unchanged, so length exactly L covers all shorter words); longer ones
    fall back to ``gap_lower_bound``.  With a reference word, words sharing
    its value are returned for an identity check.
    """
    lam = to_scalar(lam)
    if max_len > enumeration_max_len:
        return GapInfo(gap_lower_bound(lam, max_len), "denominator-bound", max_len, 0)
    vals = enumerate_projections(lam, max_len)
    best = None
    for (u, _), (v, _) in zip(vals, vals[1:]):
        if v != u and (best is None or v - u < best):
            best = v - u
    if best is None:
        raise ConstructionFailed("fewer than two distinct projections")
    coincident: tuple[WordJ, ...] = ()
    if reference is not None:
        x, y = s_orbit_point(reference, lam)
        ref = x / y
        coincident = tuple(_word_from_index7(i, max_len) for v, i in vals if v == ref)
    return GapInfo(best, "enumeration", max_len, len(vals), coincident)


# ---------------------------------------------------------------------------
# one induction step
# ---------------------------------------------------------------------------


def _log2_frac(x: Fraction) -> float:
    return x.numerator.bit_length() - x.denominator.bit_length()


def _log2_exact(x: Fraction) -> float:
    return math.log2(x.numerator) - math.log2(x.denominator)


def _anchor_candidates(centre_band: RatInterval):
    yield simplest_rational_in(centre_band.lo, centre_band.hi)
    w = centre_band.width
    for k in range(1, 8):
        lo = centre_band.lo + w * k / 9
        yield simplest_rational_in(lo, lo + w / 9)


def expand_node(node: ConstructionNode, eta: EtaSpec, cert: GlobalCerts, level_max_len: int | None = None,
                max_word_len: int = DEFAULT_MAX_WORD_LEN, max_m: int = 100_000) -> tuple[ConstructionNode, ConstructionNode]:
    """Children ω0, ω1 of a node, with exact checks of the five conditions."""
    delta = cert.delta
    dinv = 1 / delta
    maxlen = level_max_len if level_max_len is not None else node.length
    l = node.l_word
    I = node.interval
    band = RatInterval(I.mid - delta * I.width / 2, I.mid + delta * I.width / 2)

    # anchor λ'' ∈ δI and the gap G at it; value coincidences must be identities
    gap = None
    anchor = None
    ref_rf = proj_ratfunc(node.k_word)
    rejected = 0
    for cand in _anchor_candidates(band):
        g = eq_other_gap(cand, maxlen, reference=pad(node.k_word, maxlen) if maxlen <= ENUMERATION_MAX_LEN else None)
        if all(proj_ratfunc(w) == ref_rf for w in g.coincident):
            gap, anchor = g, cand
            break
        rejected += 1
    if gap is None:
        raise ConstructionFailed("every anchor candidate has a value coincidence that is not an identity")

    # smallest m meeting the three conditions
    G = gap.value
    target_log = _log2_frac(G * delta / 5)
    eta_floor = eta(maxlen)
    m = max(1, maxlen - len(l) + 1)
    while True:
        if m > max_m:
            raise GapBoundTooWeak(f"no m <= {max_m} beats the gap bound 2^{_log2_frac(G)}")
        M = len(l) + m
        if eta.log2(M) < target_log + 2:
            eM = eta(M)
            if 3 * eM / (1 - delta) < eta_floor and 5 * dinv * eM < G:
                break
        m += 1
    eM = eta(M)
    eps = delta * eM

    # predicted sizes of the next words before any heavy arithmetic
    levels = math.ceil((_log2_frac(eps) - 2) / math.log2(float(anchor)))
    predicted_len = max(M + 1, levels + 2)
    predicted_bits = -eta.log2(predicted_len)
    if predicted_len > max_word_len or predicted_bits > get_bit_budget():
        raise BudgetExceeded(
            f"expanding node '{node.omega}': gap bound 2^{_log2_frac(G):.0f} ({gap.method}, L = {maxlen}) forces "
            f"m = {m}; the children would need words of about {predicted_len} letters and intervals of width "
            f"about 2^-{predicted_bits:.3g} (word cap {max_word_len}, bit budget {get_bit_budget()})"
        )

    target = ref_rf.eval_exact(anchor)
    limit = max(predicted_len + 64, 2 * predicted_len)
    try:
        desc = greedy_descend_detail(l, target, anchor, m + 1, eps, limit)
    except NoBranchPoint:
        desc = greedy_descend_detail(l, target, anchor, m + 1, eps, 4 * limit)

    steps = []
    words = []
    for ext in desc.extensions:
        w = tuple(l) + ext
        words.append(w)
        steps.append(two_interval_step_detail(node.k_word, w, anchor, eps, eta(len(w)), cert.trans))
    choice = None
    for i0, a in enumerate((steps[0].left, steps[0].right)):
        for i1, b in enumerate((steps[1].left, steps[1].right)):
            if a.hi < b.lo or b.hi < a.lo:
                choice = (i0, a, i1, b)
                break
        if choice:
            break
    if choice is None:
        raise ConstructionFailed("no disjoint pair among the four candidate intervals")
    _, I0, _, I1 = choice

    reach = RatInterval(anchor - 3 * eM, anchor + 3 * eM)
    chain_lower = G - delta * eM - 3 * cert.combined_derivative * eM
    node.expansion = {
        "anchor": frac_str(anchor),
        "anchor_decimal": decimal_str(anchor),
        "anchors_rejected": rejected,
        "gap": frac_str(G),
        "gap_log2": _log2_frac(G),
        "gap_method": gap.method,
        "gap_max_len": maxlen,
        "coincident_words": len(gap.coincident),
        "m": m,
        "epsilon": frac_str(eps),
        "branch_level": desc.branch_level,
        "reach_inside_interval": I.contains(reach),
    }
    children = []
    for bit, w, Ic, st, dist, sib in ((0, words[0], I0, steps[0], desc.distances[0], I1),
                                      (1, words[1], I1, steps[1], desc.distances[1], I0)):
        h = eta(len(w))
        child = ConstructionNode(node.omega + str(bit), w, Ic, node.k_word, m)
        child.cert = {
            "1_prefix_and_growth": _record(_admissible(w) and len(w) > maxlen,
                                           f"|k| = {len(w)} > {maxlen}, admissible prefix"),
            "2_nesting": _record(I.contains(Ic) and not Ic.intersects(sib) and I.contains(reach),
                                 "inside the parent, disjoint from the sibling"),
            "3_width": _record(Ic.width == h, f"width = eta_{len(w)}"),
            "4_first": _record(max(st.endpoint_gaps) < Fraction(3, 2) * dinv * h
                               and min(st.endpoint_gaps) > delta * h / 2,
                               "delta*eta/2 < |proj_k(parent) - proj_k| < (3/2)eta/delta at all endpoints"),
            "4_second": _record(
                dist < eps and reach.contains(Ic) and chain_lower >= delta * h / 2
                and cert.far_offset.proved and cert.combined_derivative < dinv,
                f"G - delta*eta_M - 3*D*eta_M = 2^{_log2_frac(chain_lower) if chain_lower > 0 else 'neg'} "
                f">= delta*eta/2; {len(gap.coincident)} coincident words are identities",
            ),
            "5_location": _record(_admissible(w) and cert.ok, "prefixed word, location certificates"),
        }
        children.append(child)
    return children[0], children[1]


# ---------------------------------------------------------------------------
# the tree
# ---------------------------------------------------------------------------


@dataclass
class ConstructionTree:
    eta: EtaSpec
    certs: GlobalCerts
    nodes: dict[str, ConstructionNode]
    depth: int
    K: int
    level_checks: list[dict] = field(default_factory=list)
    status: str = "complete"
    failure: str | None = None

    def level(self, n: int) -> list[ConstructionNode]:
        return [v for k, v in sorted(self.nodes.items()) if len(k) == n]

    def branch(self, omega: str) -> list[ConstructionNode]:
        return [self.nodes[omega[:i]] for i in range(len(omega) + 1)]

    def leaves(self) -> list[ConstructionNode]:
        deepest = max(len(k) for k in self.nodes)
        return self.level(deepest)

    @property
    def ok(self) -> bool:
        return self.status == "complete" and self.certs.ok and all(n.ok for n in self.nodes.values()) and all(
            c["ok"] for c in self.level_checks)

    def to_json_obj(self) -> dict:
        return {
            "eta": self.eta.to_json_obj(),
            "delta": frac_str(self.certs.delta),
            "K": self.K,
            "depth_requested": self.depth,
            "status": self.status,
            "failure": self.failure,
            "global_certificates": self.certs.to_json_obj(),
            "level_checks": self.level_checks,
            "nodes": {k: v.to_json_obj() for k, v in sorted(self.nodes.items())},
            "surrogate_disclosures": list(SURROGATE_DISCLOSURES),
            "ok": self.ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1)


def build_tree(eta: EtaSpec, depth: int, certs: GlobalCerts | None = None,
               max_word_len: int = DEFAULT_MAX_WORD_LEN) -> ConstructionTree:
    """Breadth-first expansion to ``depth`` levels (2^depth leaves).

    A failure part-way raises with the partial tree attached as
    ``exc.partial_tree``.
    """
    if depth < 0:
        raise InvalidParameter("depth must be nonnegative")
    if depth > MAX_DEPTH:
        raise BudgetExceeded(f"depth {depth} exceeds the cap {MAX_DEPTH}")
    certs = certs or global_certificates()
    root = initial_node(eta, certs)
    K = root.cert["start_index"]["K"]
    tree = ConstructionTree(eta, certs, {"": root}, depth, K)
    for lvl in range(depth):
        current = tree.level(lvl)
        maxlen = max(n.length for n in current)
        new = []
        try:
            for node in current:
                new.extend(expand_node(node, eta, certs, maxlen, max_word_len))
        except (ConstructionFailed, BudgetExceeded) as exc:
            tree.status = "budget_exceeded" if isinstance(exc, BudgetExceeded) else "failed"
            tree.failure = str(exc)
            exc.partial_tree = tree
            raise
        for c in new:
            tree.nodes[c.omega] = c
        lo = min(c.length for c in new)
        tree.level_checks.append({"level": lvl + 1, "min_len": lo, "previous_max_len": maxlen, "ok": lo > maxlen})
    return tree


# ---------------------------------------------------------------------------
# parameter bundles
# ---------------------------------------------------------------------------


def _dual(x: Fraction) -> dict:
    return {"exact": frac_str(x), "decimal": decimal_str(x)}


@dataclass
class ConstructedParam:
    omega_prefix: str
    lambda_box: RatInterval
    t_box: RatInterval
    cert_depth: int
    eta_prime_factor: Fraction
    point: tuple[Fraction, Fraction]
    table: list[dict]
    bridge: list[dict]
    contradiction: list[dict]
    checks: dict[str, bool]

    @property
    def ok(self) -> bool:
        return (all(self.checks.values()) and all(r["ok"] for r in self.table)
                and all(b["ok"] for b in self.bridge) and all(c["ok"] for c in self.contradiction))

    def to_json_obj(self) -> dict:
        return {
            "omega": self.omega_prefix,
            "lambda_box": self.lambda_box.to_strs(),
            "lambda_box_decimal": [decimal_str(self.lambda_box.lo), decimal_str(self.lambda_box.hi)],
            "t_box": self.t_box.to_strs(),
            "t_box_decimal": [decimal_str(self.t_box.lo), decimal_str(self.t_box.hi)],
            "N": self.cert_depth,
            "eta_prime_factor": _dual(self.eta_prime_factor),
            "designated_point": {"lambda": _dual(self.point[0]), "t": _dual(self.point[1])},
            "table": self.table,
            "bridge": self.bridge,
            "contradiction": self.contradiction,
            "checks": self.checks,
            "overlap_scan": f"none_found_up_to_{self.cert_depth}" if all(r["delta_n_positive"] for r in self.table)
            else "overlap_found",
            "surrogate_disclosures": list(SURROGATE_DISCLOSURES),
            "ok": self.ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=1)


def assemble_params(tree: Sequence[ConstructionNode], eta: EtaSpec, cert: GlobalCerts | TransversalityCert,
                    N: int) -> ConstructedParam:
    """Boxes for (λ*, t*) below a branch and the finite-depth certificates for them."""
    branch = list(tree)
    if len(branch) < 2:
        raise InvalidParameter("assemble_params needs a branch of depth >= 1")
    for a, b in zip(branch, branch[1:]):
        if b.omega[:-1] != a.omega:
            raise InvalidParameter("nodes do not form a branch")
    trans = cert.trans if isinstance(cert, GlobalCerts) else cert
    delta = trans.delta
    C = eta.tail_constant
    factor = Fraction(3, 2) / delta * C
    leaf = branch[-1]
    lam_box = leaf.interval
    centre = proj_ratfunc(leaf.k_word).eval_interval(lam_box)
    tail = Fraction(3, 2) / delta * C * eta(leaf.length + 1)
    t_box = centre.widen(tail)
    lam_pt = simplest_rational_in(lam_box.lo, lam_box.hi)
    t_pt = simplest_rational_in(t_box.lo, t_box.hi)
    checks = {
        "branch_conditions": all(n.ok for n in branch),
        "t_box_positive": t_box.lo > 0,
        "t_box_below_ceiling": t_box.hi < lam_box.lo / (1 - lam_box.lo),
        "point_in_boxes": lam_box.contains(lam_pt) and t_box.contains(t_pt),
    }
    p = ParamPair(lam_pt, t_pt)
    lengths = [n.length for n in branch]
    table = []
    bridge = []
    for n in range(1, N + 1):
        g = min_gap(p, n)
        bound = factor * eta(n)
        row = {
            "n": n,
            "delta_n": _dual(g.delta),
            "eta_prime_n": _dual(bound),
            "pair": [format_word3(g.pair[0]), format_word3(g.pair[1])],
            "method": g.method,
            "delta_n_positive": g.delta > 0,
            "below_eta_prime": g.delta < bound,
        }
        row["ok"] = row["delta_n_positive"] and row["below_eta_prime"]
        table.append(row)
        # explicit witness pair from the last word on the branch not longer than n
        idx = max((i for i, ln in enumerate(lengths[:-1]) if ln <= n and n < lengths[i + 1]), default=None)
        if idx is None:
            continue
        i_w, j_w = beta_inv(pad(branch[idx].k_word, n))
        dist = abs(phi_at_zero(i_w, p) - phi_at_zero(j_w, p))
        x, y = s_orbit_point(beta(i_w, j_w), lam_pt)
        off = abs(t_pt - x / y)
        bridge.append({
            "n": n,
            "node": branch[idx].omega,
            "pair": [format_word3(i_w), format_word3(j_w)],
            "first_symbols": [i_w[0], j_w[0]],
            "witness_distance": _dual(dist),
            "t_offset": _dual(off),
            "ok": (i_w[0], j_w[0]) == (2, 1) and dist <= 2 * off and g.delta <= dist < bound,
        })
    contradiction = []
    for a, b in zip(branch, branch[1:]):
        val = delta * eta(a.length) / 2 - Fraction(3, 2) / delta * C * eta(b.length)
        contradiction.append({"levels": [a.level, b.level], "lengths": [a.length, b.length], "ok": val > 0,
                              "value_log2": _log2_frac(val) if val > 0 else None})
    return ConstructedParam(leaf.omega, lam_box, t_box, N, factor, (lam_pt, t_pt), table, bridge, contradiction,
                            checks)


def construct(eta: EtaSpec, depth: int, cert_n: int, certs: GlobalCerts | None = None,
              max_word_len: int = DEFAULT_MAX_WORD_LEN) -> tuple[ConstructionTree, list[ConstructedParam]]:
    tree = build_tree(eta, depth, certs, max_word_len)
    if depth == 0:
        return tree, []
    bundles = [assemble_params(tree.branch(leaf.omega), eta, tree.certs, cert_n) for leaf in tree.leaves()]
    return tree, bundles
