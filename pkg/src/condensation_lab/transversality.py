"""Uniform bounds on the λ-derivative of proj_k − proj_l for the two base prefixes.

Words k, l starting with the two admissible 5-prefixes have

    proj_k = (λ + λ⁴ + a) / (1 + λ − λ² − λ³ + b)
    proj_l = (λ − λ⁴ + c) / (1 + λ² + λ³ + d)

where a, b, c, d are power series from degree 5 on with coefficients in
{−1, 0, 1}.  Bounding those tails by E = λ⁵/(1−λ) and their derivatives by
E' = λ⁴(5−4λ)/(1−λ)² gives rational envelopes for the two quotient-rule
terms A and B, so one certificate covers every admissible pair of words.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CertificationFailed, InvalidParameter
from .numerics import (
    CertResult,
    IntPoly,
    RatFunc,
    RatInterval,
    as_interval,
    certify_by_subdivision,
    certify_positive,
    frac_str,
    round_up,
)
from .symbolic_ifs import K_PREFIX, L_PREFIX, WordJ, format_word_j, leading_offset, proj_ratfunc

DEFAULT_EPS0 = Fraction(1, 10**9)
DELTA_CAP = Fraction(1, 145)
DEFAULT_DOMAIN = RatInterval(Fraction(1, 4) + DEFAULT_EPS0, Fraction(1, 3) - DEFAULT_EPS0)

_L = RatFunc(IntPoly((0, 1)))
_ONE = RatFunc.const(1)


def _poly(*c: int) -> RatFunc:
    return RatFunc(IntPoly(c))


def tail_bound() -> RatFunc:
    return _L**5 / (_ONE - _L)


def tail_derivative_bound() -> RatFunc:
    return _L**4 * (5 - 4 * _L) / (_ONE - _L) ** 2


# heads of the four coordinate series and of their derivatives
X_K = _poly(0, 1, 0, 0, 1)          # λ + λ⁴
Y_K = _poly(1, 1, -1, -1)           # 1 + λ − λ² − λ³
X_L = _poly(0, 1, 0, 0, -1)         # λ − λ⁴
Y_L = _poly(1, 0, 1, 1)             # 1 + λ² + λ³
DX_K = _poly(1, 0, 0, 4)
DY_K = _poly(1, -2, -3)
DX_L = _poly(1, 0, 0, -4)
DY_L = _poly(0, 2, 3)


def envelopes() -> dict[str, RatFunc]:
    """The A-lower and B-upper envelopes with their numerators and denominators."""
    e, ep = tail_bound(), tail_derivative_bound()
    num_a = (DX_K - ep) * (Y_K - e) - (X_K + e) * (DY_K + ep)
    num_b = (DX_L + ep) * (Y_L + e) - (X_L - e) * (DY_L - ep)
    a_low = num_a / (Y_K + e) ** 2
    b_up = num_b / (Y_L - e) ** 2
    return {"num_a_low": num_a, "num_b_up": num_b, "a_low": a_low, "b_up": b_up, "diff": a_low - b_up}


def _check_prefixes(k: WordJ, l: WordJ) -> None:
    if tuple(k[:5]) != K_PREFIX or tuple(l[:5]) != L_PREFIX:
        raise InvalidParameter("ab_split needs k with the first and l with the second admissible prefix")


def ab_split(k: WordJ, l: WordJ) -> tuple[RatFunc, RatFunc]:
    """Exact derivatives A = proj_k' and B = proj_l' of the two words."""
    _check_prefixes(k, l)
    return proj_ratfunc(k).derivative(), proj_ratfunc(l).derivative()


def tails(k: WordJ, l: WordJ) -> dict[str, IntPoly]:
    """The coefficient tails a, b, c, d (degrees ≥ 5) of the two words."""
    _check_prefixes(k, l)
    pad = lambda w, i: IntPoly(tuple(0 if d < 5 else s[i] for d, s in enumerate(w)))
    return {"a": pad(k, 0), "b": pad(k, 1), "c": pad(l, 0), "d": pad(l, 1)}


def _tail_interval(x: RatInterval) -> tuple[RatInterval, RatInterval]:
    e = (x**5 / (1 - x)).hi
    ep = (x**4 * (5 - 4 * x) / (1 - x) ** 2).hi
    return RatInterval(-e, e), RatInterval(-ep, ep)


def _ab_enclosures(x: RatInterval) -> tuple[RatInterval, RatInterval]:
    t, tp = _tail_interval(x)
    xk = x + x**4 + t
    yk = 1 + x - x**2 - x**3 + t
    xl = x - x**4 + t
    yl = 1 + x**2 + x**3 + t
    dxk = 1 + 4 * x**3 + tp
    dyk = 1 - 2 * x - 3 * x**2 + tp
    dxl = 1 - 4 * x**3 + tp
    dyl = 2 * x + 3 * x**2 + tp
    a = (dxk * yk - xk * dyk) / yk**2
    b = (dxl * yl - xl * dyl) / yl**2
    return a, b


def generic_difference_enclosure(x: RatInterval) -> RatInterval:
    """Enclosure of A − B over λ ∈ x for every admissible pair of tails."""
    a, b = _ab_enclosures(x)
    return a - b


def prefixed_derivative_bound(lambda_domain: RatInterval | None = None, pieces: int = 64) -> Fraction:
    """sup |proj'| over λ in the domain and all words with either admissible 5-prefix."""
    dom = lambda_domain or DEFAULT_DOMAIN
    step = dom.width / pieces
    best = Fraction(0)
    for i in range(pieces):
        a, b = _ab_enclosures(RatInterval(dom.lo + i * step, dom.lo + (i + 1) * step))
        best = max(best, a.abs_max(), b.abs_max())
    return best


@dataclass
class TransversalityCert:
    lambda_domain: RatInterval
    lower: Fraction
    upper: Fraction
    delta: Fraction
    sub_claims: dict[str, CertResult] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0 < self.lower <= self.upper):
            raise CertificationFailed("transversality bounds out of order")
        if not (self.delta <= min(self.lower, 1 / self.upper) and self.delta < Fraction(1, 144)):
            raise CertificationFailed("delta violates its constraints")

    @property
    def delta_inv(self) -> Fraction:
        return 1 / self.delta

    def digest(self) -> str:
        env = envelopes()
        key = json.dumps(
            {
                "domain": self.lambda_domain.to_strs(),
                "envelopes": {k: v.to_json_obj() for k, v in sorted(env.items())},
            },
            sort_keys=True,
        )
        return hashlib.sha256(key.encode()).hexdigest()

    def to_json_obj(self, with_trees: bool = True) -> dict:
        obj = {
            "claim": "uniform derivative bounds for admissible word pairs",
            "domain": self.lambda_domain.to_strs(),
            "lower": frac_str(self.lower),
            "upper": frac_str(self.upper),
            "delta": frac_str(self.delta),
            "digest": self.digest(),
        }
        if with_trees:
            obj["sub_claims"] = {k: v.to_json_obj() for k, v in self.sub_claims.items()}
        return obj

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: dict) -> TransversalityCert:
        """Load a stored certificate; its bounds are re-certified, never trusted."""
        dom = RatInterval.from_strs(obj["domain"])
        cert = certify_transversality(dom)
        if obj.get("digest") not in (None, cert.digest()):
            raise CertificationFailed("stored transversality certificate digest does not match")
        return cert


def certify_transversality(lambda_domain: RatInterval | None = None, lower_floor: Fraction = Fraction(57, 1000),
                           numerator_floor: Fraction = Fraction(4, 5), max_depth: int = 40) -> TransversalityCert:
    """Certify lower ≤ (proj_k − proj_l)' ≤ upper uniformly over admissible tails."""
    dom = lambda_domain or DEFAULT_DOMAIN
    if dom.lo <= Fraction(1, 4) or dom.hi >= Fraction(1, 3):
        raise InvalidParameter("domain must lie strictly inside (1/4, 1/3)")
    env = envelopes()
    claims = {}
    claims["num_a_low"] = certify_positive(env["num_a_low"], dom, numerator_floor, max_depth,
                                           claim="A-envelope numerator > floor")
    claims["num_b_up"] = certify_positive(env["num_b_up"], dom, numerator_floor, max_depth,
                                          claim="B-envelope numerator > floor")
    claims["lower"] = certify_positive(env["diff"], dom, lower_floor, max_depth,
                                       claim="A-lower minus B-upper envelope >= floor")
    for name, res in claims.items():
        if not res.proved:
            raise CertificationFailed(f"transversality sub-claim {name} not proved: {res.status.value} on {res.witness}")
    lower = claims["lower"].lower
    if claims["num_a_low"].lower <= numerator_floor or claims["num_b_up"].lower <= numerator_floor:
        raise CertificationFailed("envelope numerators not strictly above the floor")

    # upper bound: the largest enclosure over a uniform partition, rounded up, then certified
    pieces = 64
    step = dom.width / pieces
    top = max(generic_difference_enclosure(RatInterval(dom.lo + i * step, dom.lo + (i + 1) * step)).hi
              for i in range(pieces))
    upper = round_up(top, 8)
    claims["upper"] = certify_by_subdivision(
        lambda x: upper - generic_difference_enclosure(x), dom, 0,
        f"A - B <= {upper} for all admissible tails", max_depth,
    )
    if not claims["upper"].proved:
        raise CertificationFailed("upper bound on the derivative difference not proved")
    delta = min(lower, 1 / upper, DELTA_CAP)
    return TransversalityCert(dom, lower, upper, delta, claims)


# ---------------------------------------------------------------------------
# derivative bounds for single words
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DerivativeBound:
    bound: Fraction
    closed_form: Fraction | None
    m: int | None
    far_by_offset: bool


def offset_envelope(m: int, x: RatInterval) -> RatInterval:
    """Bound on |proj'| valid for any word with leading offset m, over λ ∈ x.

    Writing proj = λ^m u/v with u, v = ±1 + (series with coefficients in
    {−1,0,1}), one gets |proj'| ≤ |m|λ^{m−1}/(1−2λ) + 2λ^m/((1−λ)(1−2λ)²).
    """
    return abs(m) * x ** (m - 1) / (1 - 2 * x) + 2 * x**m / ((1 - x) * (1 - 2 * x) ** 2)


def uniform_offset_derivative_bound(domain: RatInterval, m_min: int = -1, pieces: int = 64) -> Fraction:
    """sup over words with offset ≥ m_min of |proj'| on the domain.

    For m ≥ 1 both terms of the envelope are at most those of m = 1 (since
    mλ^{m−1} ≤ 1 and λ^m ≤ λ for λ ≤ 1/2), so m_min..1 are enough.
    """
    best = Fraction(0)
    width = domain.width / pieces
    for i in range(pieces):
        x = RatInterval(domain.lo + i * width, domain.lo + (i + 1) * width)
        for m in range(m_min, 2):
            best = max(best, offset_envelope(m, x).hi)
    return best


def derivative_bound(w: WordJ, lambda_domain: RatInterval, pieces: int = 16) -> DerivativeBound:
    """Certified bound on |d/dλ proj_w| over the domain by interval evaluation.

    The closed form 2|m|λ^{m−1}/((1−λ)(1−2λ)) is reported alongside; it is
    not used as a bound because it is not valid for m = 0.
    """
    dom = as_interval(lambda_domain)
    d = proj_ratfunc(w).derivative()
    m = leading_offset(w)
    best = Fraction(0)
    if dom.is_point:
        best = abs(d.eval_exact(dom.lo))
    else:
        width = dom.width / pieces
        for i in range(pieces):
            x = RatInterval(dom.lo + i * width, dom.lo + (i + 1) * width)
            best = max(best, d.eval_interval(x).abs_max())
    closed = None
    far = False
    if m is not None:
        closed = max(2 * abs(m) * lam ** (m - 1) / ((1 - lam) * (1 - 2 * lam)) for lam in (dom.lo, dom.hi))
        # 2^m < 1/3 means the point is too far from [0, 1/2] to matter
        far = 2**m * 3 < 1 if m < 0 else False
    return DerivativeBound(best, closed, m, far)


def base_words() -> tuple[WordJ, WordJ]:
    return K_PREFIX, L_PREFIX


def describe_pair(k: WordJ, l: WordJ) -> str:
    return f"k={format_word_j(k)} l={format_word_j(l)}"

