"""Entropy and neighbour-count estimates of the natural measure's dimension.

The natural measure μ puts mass 3**-n on every level-n cylinder.  It is
approximated by the atomic measures μ^m (mass 3**-m at each φ_w(0),
|w| = m) and measured on the dyadic partition D_n.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidParameter
from .numerics import ScalarLike, frac_str, to_scalar
from .separation import AtomSet, enumerate_atoms, lambda_gamma, log_count_average
from .symbolic_ifs import ParamPair


@dataclass(frozen=True)
class DyadicHistogram:
    scale: int
    bins: dict[int, Fraction]

    def masses(self) -> list[Fraction]:
        return [self.bins[k] for k in sorted(self.bins)]


def histogram(atoms: AtomSet, scale: int) -> DyadicHistogram:
    """Bin atom masses into the half-open cells [i 2^-n, (i+1) 2^-n)."""
    if scale < 0:
        raise InvalidParameter("scale must be nonnegative")
    total = 3**atoms.level
    idx = _bin_indices(atoms, scale)
    bins: dict[int, int] = {}
    for i, m in zip(idx, atoms.multiplicities):
        bins[int(i)] = bins.get(int(i), 0) + int(m)
    return DyadicHistogram(scale, {k: Fraction(v, total) for k, v in bins.items()})


def _bin_indices(atoms: AtomSet, scale: int) -> np.ndarray:
    # exact floor(v · 2^scale) with v = numerator / denominator >= 0
    nums = atoms.numerators
    if nums.dtype != object and int(nums.max(initial=0)) < 2 ** (62 - scale):
        return (nums << scale) // atoms.denominator
    return np.array([(int(v) << scale) // atoms.denominator for v in nums], dtype=object)


def shannon_entropy(h: DyadicHistogram) -> float:
    """−Σ m log m in nats."""
    out = 0.0
    for m in h.bins.values():
        if m:
            f = float(m)
            out -= f * math.log(f)
    return out


def entropy(atoms: AtomSet, scale: int) -> float:
    counts = _bin_counts(atoms, scale)
    p = counts / float(3**atoms.level)
    return float(-np.sum(p * np.log(p)))


def _bin_counts(atoms: AtomSet, scale: int) -> np.ndarray:
    idx = _bin_indices(atoms, scale)
    if idx.dtype == object:
        h = histogram(atoms, scale)
        return np.array([int(m * 3**atoms.level) for m in h.masses()], dtype=float)
    _, inv = np.unique(idx, return_inverse=True)
    return np.bincount(inv, weights=atoms.multiplicities.astype(float))


def similarity_dimension(lam: Fraction) -> float:
    return math.log(3) / -math.log(float(lam))


def diameter(p: ParamPair) -> Fraction:
    """Diameter of the attractor: the fixed points 0 and 1/(1−λ) of the outer maps are its extremes."""
    return 1 / (1 - p.lam)


def scale_index(p: ParamPair, n: int) -> int:
    """The r with λ^r·diam ≤ 2^-n < λ^(r−1)·diam."""
    if n < 0:
        raise InvalidParameter("n must be nonnegative")
    target = Fraction(1, 2**n)
    d = diameter(p)
    r = 0
    size = d
    while size > target:
        size *= p.lam
        r += 1
    return r


@dataclass(frozen=True)
class DimReport:
    lam: Fraction
    t: Fraction
    n: int
    q: int
    r_n: int
    dim_similarity: float
    lambda_n: float
    dim_entropy: float
    dim_combined: float
    dim_ball: float
    mode: str = "proof"

    def to_json_obj(self) -> dict:
        d = asdict(self)
        d["lambda"] = frac_str(d.pop("lam"))
        d["t"] = frac_str(self.t)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True, indent=2)


def dim_estimate(p: ParamPair, n: int, q: int = 2, mode: str = "proof") -> DimReport:
    """Entropy-route and neighbour-count-route dimension estimates at scale n.

    In ``"proof"`` mode the count uses radius 2^(−qn) on level-r(n) atoms;
    in ``"statement"`` mode it is Λ_{r(n)}(λ^q) with radius λ^(q·r(n)).
    """
    if q < 1:
        raise InvalidParameter("q must be at least 1")
    dim_s = similarity_dimension(p.lam)
    r = scale_index(p, n)
    atoms = enumerate_atoms(p, r)
    if mode == "proof":
        avg_log = log_count_average(atoms, Fraction(1, 2 ** (q * n)))
        lam_n = avg_log / r
    elif mode == "statement":
        lam_n = lambda_gamma(p, r, p.lam**q)
        avg_log = lam_n * r
    else:
        raise InvalidParameter(f"unknown mode {mode!r}")
    log_inv = -math.log(float(p.lam))
    if n == 0:
        dim_h, dim_ball = 0.0, 0.0
    else:
        dim_h = entropy(atoms, n) / (n * math.log(2))
        dim_ball = (r * math.log(3) - avg_log) / (n * math.log(2))
    return DimReport(p.lam, p.t, n, q, r, dim_s, lam_n, dim_h, dim_s - lam_n / log_inv, dim_ball, mode)


@dataclass(frozen=True)
class SandwichReport:
    n: int
    q: int
    r_n: int
    entropies: tuple[float, ...]
    spread: float
    fine_entropy: float
    ball_integral: float
    ball_gap: float
    spread_ok: bool
    ball_ok: bool

    @property
    def ok(self) -> bool:
        return self.spread_ok and self.ball_ok


def ball_integral(atoms: AtomSet, radius: ScalarLike) -> float:
    """−(1/3^m) Σ_words log μ^m(B(φ_w(0), radius))."""
    return atoms.level * math.log(3) - log_count_average(atoms, to_scalar(radius))


def entropy_sandwich_check(p: ParamPair, n: int, q: int = 2, extra_levels: int = 2,
                           spread_bound: float = 9.0, ball_bound: float = 2.0) -> SandwichReport:
    """Compare H(μ^{r(n)+k}, D_n) for k ≤ extra_levels, and the ball form against H(μ^{r(n)}, D_{qn})."""
    r = scale_index(p, n)
    ents = []
    for k in range(extra_levels + 1):
        lvl = r + k
        ents.append(0.0 if lvl == 0 else entropy(enumerate_atoms(p, lvl), n))
    spread = max(abs(e - ents[0]) for e in ents)
    if r == 0:
        return SandwichReport(n, q, r, tuple(ents), spread, 0.0, 0.0, 0.0, spread <= spread_bound, True)
    atoms = enumerate_atoms(p, r)
    fine = entropy(atoms, q * n)
    ball = ball_integral(atoms, Fraction(1, 2 ** (q * n)))
    gap = fine - ball
    # H(partition) >= ball integral holds exactly; allow float noise only
    ball_ok = -1e-9 <= gap <= ball_bound
    return SandwichReport(n, q, r, tuple(ents), spread, fine, ball, gap, spread <= spread_bound, ball_ok)
