"""Separation statistics of the level-n orbit points φ_w(0), |w| = n.

All 3**n points share the denominator ``s·q**(n−1)`` when λ = p/q and
t = r/s, so level n is enumerated as an integer array with the recurrence

    V_n(c w) = c·s·q**(n−1) + p·V_{n−1}(w),

in numpy int64 when the values fit and Python integers otherwise.  For
parameters whose denominators are huge, :func:`delta_n` can instead use a
float filter: doubles locate the few clusters of near-coincident points,
and only those are recomputed exactly.
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import BudgetExceeded, InvalidParameter
from .numerics import ScalarLike, decimal_str, frac_str, to_scalar
from .symbolic_ifs import ParamPair, Word3, format_word3, phi_at_zero

_DEFAULT_MAX_LEVEL = 14
_MAX_LEVEL = [None]


def enumeration_budget() -> int:
    """Largest level n allowed for an enumeration of 3**n points."""
    if _MAX_LEVEL[0] is not None:
        return _MAX_LEVEL[0]
    env = os.environ.get("CONDENSATION_LAB_BUDGET")
    if env:
        try:
            return int(env)
        except ValueError as exc:
            raise InvalidParameter(f"CONDENSATION_LAB_BUDGET must be an integer, got {env!r}") from exc
    return _DEFAULT_MAX_LEVEL


def set_enumeration_budget(max_level: int | None) -> None:
    _MAX_LEVEL[0] = None if max_level is None else int(max_level)


def _check_budget(n: int) -> None:
    if n < 0:
        raise InvalidParameter("level must be nonnegative")
    cap = enumeration_budget()
    if n > cap:
        raise BudgetExceeded(f"level {n} needs 3**{n} points; enumeration budget is level {cap}")


@dataclass(frozen=True)
class ScaledLevel:
    """All level-n orbit points as integers over a common denominator, in word order."""

    level: int
    numerators: np.ndarray
    denominator: int

    def value(self, index: int) -> Fraction:
        return Fraction(int(self.numerators[index]), self.denominator)


def scaled_level(p: ParamPair, n: int) -> ScaledLevel:
    _check_budget(n)
    if n == 0:
        return ScaledLevel(0, np.zeros(1, dtype=np.int64), 1)
    lp, lq = p.lam.numerator, p.lam.denominator
    tr, ts = p.t.numerator, p.t.denominator
    denom = ts * lq ** (n - 1)
    small = 4 * denom < 2**62
    dtype = np.int64 if small else object
    vals = np.array([0, tr, ts], dtype=dtype)
    qpow = 1
    for _ in range(1, n):
        qpow *= lq
        scaled = vals * lp
        vals = np.concatenate([scaled, scaled + tr * qpow, scaled + ts * qpow])
    return ScaledLevel(n, vals, denom)


def word_from_index(index: int, n: int) -> Word3:
    digits = []
    for _ in range(n):
        digits.append(index % 3 + 1)
        index //= 3
    return tuple(reversed(digits))


def index_from_word(w: Word3) -> int:
    idx = 0
    for s in w:
        idx = 3 * idx + (s - 1)
    return idx


# ---------------------------------------------------------------------------
# atom sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AtomSet:
    """Distinct level-n points with multiplicities, sorted increasingly.

    ``numerators / denominator`` are the exact values.
    """

    level: int
    numerators: np.ndarray
    multiplicities: np.ndarray
    denominator: int

    @property
    def points(self) -> list[tuple[Fraction, int]]:
        return [(Fraction(int(v), self.denominator), int(m)) for v, m in zip(self.numerators, self.multiplicities)]

    def values(self) -> list[Fraction]:
        return [Fraction(int(v), self.denominator) for v in self.numerators]

    def __len__(self) -> int:
        return len(self.numerators)

    def total_mass(self) -> int:
        return int(np.sum(self.multiplicities))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["value", "value_decimal", "multiplicity"])
        for v, m in self.points:
            w.writerow([frac_str(v), decimal_str(v), m])
        return buf.getvalue()


def enumerate_atoms(p: ParamPair, n: int) -> AtomSet:
    if n < 1:
        raise InvalidParameter("enumerate_atoms needs n >= 1")
    lvl = scaled_level(p, n)
    vals, counts = np.unique(lvl.numerators, return_counts=True)
    return AtomSet(n, vals, counts.astype(np.int64), lvl.denominator)


# ---------------------------------------------------------------------------
# minimum gaps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapResult:
    level: int
    delta: Fraction
    pair: tuple[Word3, Word3]
    method: str
    exact_checks: int = 0


def _order_pair(a: Word3, b: Word3) -> tuple[Word3, Word3]:
    return (a, b) if a >= b else (b, a)


def _gap_exact(p: ParamPair, n: int) -> GapResult:
    lvl = scaled_level(p, n)
    order = np.argsort(lvl.numerators, kind="stable")
    sv = lvl.numerators[order]
    diffs = np.diff(sv)
    k = int(np.argmin(diffs))
    i, j = word_from_index(int(order[k]), n), word_from_index(int(order[k + 1]), n)
    return GapResult(n, Fraction(int(diffs[k]), lvl.denominator), _order_pair(i, j), "exact", len(sv))


def _float_level(p: ParamPair, n: int) -> np.ndarray:
    lam, t = float(p.lam), float(p.t)
    vals = np.array([0.0, t, 1.0])
    for _ in range(1, n):
        scaled = vals * lam
        vals = np.concatenate([scaled, scaled + t, scaled + 1.0])
    return vals


def float_error_bound(n: int) -> float:
    """Rigorous bound on |float value − exact value| for the recurrence above.

    Each step v ← c + λv in double precision adds at most about five unit
    roundoffs (inputs rounded, one product, one sum; |v| < 3/2) and damps the
    previous error by λ < 1/3, so the error stays below 8·2**-53.  The bound
    returned is larger by a factor of 32·(n+1).
    """
    return (n + 1) * 2.0**-45


def _gap_filtered(p: ParamPair, n: int) -> GapResult:
    approx = _float_level(p, n)
    order = np.argsort(approx, kind="stable")
    sv = approx[order]
    d = np.diff(sv)
    err = float_error_bound(n)
    # the true minimising pair lies within approximate distance min(d) + 4 err,
    # and every point between them in float order is chained by gaps <= that
    thresh = float(d.min()) + 4 * err
    close = d <= thresh
    # clusters are maximal runs of close neighbours; label every member
    edge = np.flatnonzero(close)
    member = np.zeros(len(sv), dtype=bool)
    member[edge] = True
    member[edge + 1] = True
    starts_new = np.ones(len(sv), dtype=bool)
    starts_new[1:] = ~close
    cluster = np.cumsum(starts_new)
    idx = order[member]
    cid = cluster[member]
    exact, denom = _scaled_values(p, n, idx)
    ranked = sorted(zip(cid.tolist(), exact, idx.tolist()))
    best = None
    best_pair = None
    for (ca, va, ia), (cb, vb, ib) in zip(ranked, ranked[1:]):
        if ca == cb and (best is None or vb - va < best):
            best, best_pair = vb - va, (ia, ib)
    assert best is not None and best_pair is not None
    pair = _order_pair(word_from_index(best_pair[0], n), word_from_index(best_pair[1], n))
    return GapResult(n, Fraction(best, denom), pair, "filtered", len(ranked))


def _scaled_values(p: ParamPair, n: int, indices: np.ndarray) -> tuple[list[int], int]:
    """Exact numerators of φ_w(0) over t_den·λ_den^(n−1) for the words with these indices.

    Each numerator splits as lq^(n−h)·prefix(h) + lp^h·suffix(n−h), so two
    small tables of partial sums make every word a single big-integer addition.
    """
    lp, lq = p.lam.numerator, p.lam.denominator
    tr, ts = p.t.numerator, p.t.denominator
    coef = (0, tr, ts)
    h = n // 2
    pre = [a * lq ** (n - h) for a in _partial_numerators(coef, lp, lq, h)]
    suf = [b * lp**h for b in _partial_numerators(coef, lp, lq, n - h)]
    split = 3 ** (n - h)
    out = [pre[i // split] + suf[i % split] for i in np.asarray(indices, dtype=np.int64).tolist()]
    return out, ts * lq ** (n - 1)


def _partial_numerators(coef: tuple[int, int, int], lp: int, lq: int, length: int) -> list[int]:
    # Σ_k coef[w_k]·lp^k·lq^(length−1−k) for every word of this length, in index order
    vals = [0]
    for j in range(length):
        # prepending a symbol: new = coef·lq^j + lp·old
        lead = lq**j
        vals = [c * lead + lp * v for c in coef for v in vals]
    return vals


def min_gap(p: ParamPair, n: int, method: str = "auto") -> GapResult:
    """Δ_n with a minimising word pair.

    ``method`` is ``"exact"`` (integer enumeration), ``"filtered"`` (float
    filter with exact confirmation) or ``"auto"``, which picks exact when the
    scaled integers fit in int64.
    """
    if n < 1:
        raise InvalidParameter("delta_n needs n >= 1")
    _check_budget(n)
    if n == 1:
        pts = sorted((phi_at_zero((s,), p), (s,)) for s in (1, 2, 3))
        g = min((b[0] - a[0], _order_pair(a[1], b[1])) for a, b in zip(pts, pts[1:]))
        return GapResult(1, g[0], g[1], "exact", 3)
    if method == "auto":
        denom = p.t.denominator * p.lam.denominator ** (n - 1)
        method = "exact" if 4 * denom < 2**62 else "filtered"
    if method == "exact":
        return _gap_exact(p, n)
    if method == "filtered":
        return _gap_filtered(p, n)
    raise InvalidParameter(f"unknown method {method!r}")


def delta_n(p: ParamPair, n: int, method: str = "auto") -> Fraction:
    return min_gap(p, n, method).delta


def lambda_gamma(p: ParamPair, n: int, gamma: ScalarLike) -> float:
    """Λ_n(γ): average over words of log #{j : |φ_i(0) − φ_j(0)| ≤ γ**n}, divided by n."""
    gamma = to_scalar(gamma)
    if not 0 < gamma <= p.lam:
        raise InvalidParameter("gamma must lie in (0, lambda]")
    return log_count_average(enumerate_atoms(p, n), gamma**n) / n


def neighbour_counts(atoms: AtomSet, radius: ScalarLike) -> np.ndarray:
    """For each distinct atom, the number of words within ``radius`` (inclusive)."""
    radius = to_scalar(radius)
    r = (radius * atoms.denominator).__floor__()
    vals = atoms.numerators
    cum = np.concatenate([[0], np.cumsum(atoms.multiplicities)])
    if vals.dtype == object:
        seq = list(vals)
        lo = np.array([bisect.bisect_left(seq, v - r) for v in seq])
        hi = np.array([bisect.bisect_right(seq, v + r) for v in seq])
    else:
        if r > 2**62:
            r = 2**62
        lo = np.searchsorted(vals, vals - np.int64(r), side="left")
        hi = np.searchsorted(vals, vals + np.int64(r), side="right")
    return cum[hi] - cum[lo]


def log_count_average(atoms: AtomSet, radius: ScalarLike) -> float:
    """(1/3**n) Σ_words log #{neighbours within radius}."""
    counts = neighbour_counts(atoms, radius)
    mult = atoms.multiplicities.astype(float)
    return float(np.sum(mult * np.log(counts.astype(float))) / float(3**atoms.level))


# ---------------------------------------------------------------------------
# exact overlaps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OverlapReport:
    found: bool
    level: int | None
    pair: tuple[Word3, Word3] | None
    min_gap: Fraction | None
    max_n: int
    gaps: tuple[Fraction, ...] = ()

    def to_json_obj(self) -> dict:
        return {
            "found": self.found,
            "level": self.level,
            "pair": None if self.pair is None else [format_word3(w) for w in self.pair],
            "min_gap": None if self.min_gap is None else frac_str(self.min_gap),
            "max_n": self.max_n,
        }


def detect_exact_overlap(p: ParamPair, max_n: int, method: str = "auto") -> OverlapReport:
    """First level n <= max_n at which two distinct words share φ_w(0).

    For the homogeneous family equal images of 0 mean equal maps, so this
    decides exact overlaps up to depth ``max_n``.
    """
    gaps = []
    for n in range(1, max_n + 1):
        g = min_gap(p, n, method)
        gaps.append(g.delta)
        if g.delta == 0:
            return OverlapReport(True, n, g.pair, Fraction(0), max_n, tuple(gaps))
    return OverlapReport(False, None, None, min(gaps) if gaps else None, max_n, tuple(gaps))


def separation_summary(p: ParamPair, n: int, gamma: ScalarLike | None = None) -> dict:
    g = min_gap(p, n)
    out = {
        "n": n,
        "delta_n": frac_str(g.delta),
        "delta_n_decimal": decimal_str(g.delta),
        "lambda_n_gamma": None,
        "overlap": g.delta == 0,
        "pair": [format_word3(w) for w in g.pair],
    }
    if gamma is not None:
        out["lambda_n_gamma"] = lambda_gamma(p, n, gamma)
    return out


def summary_json(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def delta_table_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "delta_n", "delta_n_decimal", "log_delta_over_n", "flag"])
    for r in rows:
        w.writerow([r["n"], r["delta_n"], r["delta_n_decimal"], r["log_delta_over_n"], r["flag"]])
    return buf.getvalue()


def log_over_n(delta: Fraction, n: int) -> float:
    if delta == 0:
        return -math.inf
    return (math.log(delta.numerator) - math.log(delta.denominator)) / n

