from fractions import Fraction as F
from itertools import product

import pytest
from hypothesis import assume, given, strategies as st

from bridge import first_symbol_case, shift_identities, shifted_case
from condensation_lab.errors import InvalidParameter, LengthMismatch, NoSecondCoordinate
from condensation_lab.numerics import IntPoly, RatFunc, RatInterval
from condensation_lab.symbolic_ifs import (
    INFINITE,
    J_ALPHABET,
    ParamPair,
    beta,
    beta_inv,
    common_prefix_len,
    format_word3,
    format_word_j,
    leading_offset,
    pad,
    phi_at_zero,
    proj_bounds,
    proj_ratfunc,
    proj_value,
    s_orbit_point,
    shift,
    word3,
    word_j,
)

P1 = ParamPair(F(3, 10), F(1, 5))
P_OVERLAP = ParamPair(F(3, 10), F(3, 10))
K5 = word_j("0 1,1 1,0 -1,0 -1,1 0")
L5 = word_j("0 1,1 0,0 1,0 1,-1 0")


def phi_oracle(w, p):
    # compose the maps literally, innermost last symbol first
    x = F(0)
    for s in reversed(w):
        x = p.lam * x + (F(0), p.t, F(1))[s - 1]
    return x


def test_param_pair_domain():
    with pytest.raises(InvalidParameter):
        ParamPair(F(1, 3), F(1, 10))
    with pytest.raises(InvalidParameter):
        ParamPair(F(3, 10), F(3, 7))  # t must stay below λ/(1−λ)


def test_phi_examples():
    assert phi_at_zero(word3("2"), P1) == P1.t
    assert phi_at_zero(word3("31"), P1) == 1
    assert phi_at_zero(word3("21"), P_OVERLAP) == phi_at_zero(word3("13"), P_OVERLAP) == F(3, 10)


@given(st.lists(st.integers(1, 3), max_size=12))
def test_phi_matches_composition(w):
    w = tuple(w)
    assert phi_at_zero(w, P1) == phi_oracle(w, P1)


def test_beta_examples():
    assert beta(word3("2"), word3("1")) == ((0, 1),)
    assert beta(word3("213"), word3("132")) == ((0, 1), (1, 0), (-1, -1))
    assert beta(word3("1"), word3("1")) == ((0, 0),)
    with pytest.raises(LengthMismatch):
        beta(word3("12"), word3("1"))


def test_beta_inverse_examples():
    assert beta_inv(((0, 1),)) == (word3("2"), word3("1"))
    assert beta_inv(((0, 0), (1, 1))) == (word3("12"), word3("13"))
    assert beta_inv(()) == ((), ())


def test_beta_is_bijective_off_the_diagonal():
    images = {beta((i,), (j,))[0] for i, j in product((1, 2, 3), repeat=2) if i != j}
    assert images == set(J_ALPHABET) - {(0, 0)}
    assert len(images) == 6


@given(st.lists(st.sampled_from(J_ALPHABET), max_size=10))
def test_beta_round_trip(w):
    w = tuple(w)
    assert beta(*beta_inv(w)) == w


def test_orbit_point_examples():
    assert s_orbit_point(((0, 1),), F(2, 7)) == (0, 1)
    assert s_orbit_point(((0, 1), (1, 0)), F(3, 10)) == (F(3, 10), 1)
    assert s_orbit_point(((0, 0),) * 6, F(3, 10)) == (0, 0)


def test_proj_ratfunc_examples():
    assert proj_ratfunc(K5) == RatFunc(IntPoly((0, 1, 0, 0, 1)), IntPoly((1, 1, -1, -1)))
    assert proj_ratfunc(L5) == RatFunc(IntPoly((0, 1, 0, 0, -1)), IntPoly((1, 0, 1, 1)))
    assert proj_ratfunc(((0, 1),)) == RatFunc(IntPoly())
    with pytest.raises(NoSecondCoordinate):
        proj_ratfunc(((1, 0), (-1, 0)))


@given(st.lists(st.sampled_from(J_ALPHABET), min_size=1, max_size=9), st.integers(0, 5))
def test_padding_preserves_proj(w, extra):
    w = tuple(w)
    assume(any(b for _, b in w))
    assert proj_ratfunc(pad(w, len(w) + extra)) == proj_ratfunc(w)


def test_proj_value_on_the_axis_is_infinite():
    assert proj_value(((1, 0),), F(3, 10)) is INFINITE


def test_proj_bounds_examples():
    lam = F(3, 10)
    b = proj_bounds(((0, 1), (1, 0)), lam)
    assert b.m == 1
    assert b.abs_band == RatInterval(lam * (1 - 2 * lam), lam / (1 - 2 * lam))
    assert b.abs_band.contains(F(3, 10)) and b.enclosure == RatInterval.point(F(3, 10))
    b0 = proj_bounds(((1, 1),), lam)
    assert b0.m == 0 and b0.abs_band.contains(1) and b0.offset_derivative_bound == 0
    bz = proj_bounds(((0, 1), (0, 0)), lam)
    assert bz.m is None and bz.enclosure == RatInterval.point(0)


@given(st.lists(st.sampled_from(J_ALPHABET), min_size=1, max_size=10),
       st.fractions(min_value=F(26, 100), max_value=F(33, 100), max_denominator=1000))
def test_proj_lies_in_leading_band(w, lam):
    w = tuple(w)
    assume(any(b for _, b in w))
    m = leading_offset(w)
    v = proj_value(w, lam)
    if m is None:
        assert v == 0
        return
    assert lam**m * (1 - 2 * lam) <= abs(v) <= lam**m / (1 - 2 * lam)


def test_word_formats():
    assert format_word3(word3("213")) == "213"
    assert format_word_j(word_j("0 1,1 0,-1 -1")) == "0 1,1 0,-1 -1"
    assert shift(word3("2131"), 2) == word3("31")
    assert common_prefix_len(word3("2131"), word3("2132")) == 3


# --- the bridge between orbit gaps and projections --------------------------------

words = st.integers(1, 10).flatmap(lambda n: st.tuples(
    st.lists(st.integers(1, 3), min_size=n, max_size=n), st.lists(st.integers(1, 3), min_size=n, max_size=n)))
params = st.tuples(st.fractions(min_value=F(1, 100), max_value=F(32, 100), max_denominator=500),
                   st.fractions(min_value=F(1, 100), max_value=F(99, 100), max_denominator=500))


def _pair(pt):
    lam, s = pt
    t = s * lam / (1 - lam)
    return ParamPair(lam, t)


@given(words, params, st.fractions(min_value=F(1, 10**6), max_value=F(49, 100), max_denominator=10**6))
def test_bridge_first_symbols(ij, pt, eps):
    i, j = map(tuple, ij)
    assume(i[0] != j[0])
    fwd, rev = first_symbol_case(i, j, _pair(pt), eps)
    assert fwd and rev


@given(words, params, st.fractions(min_value=F(1, 100), max_value=F(99, 100), max_denominator=1000))
def test_bridge_shifted(ij, pt, frac):
    i, j = map(tuple, ij)
    assume(i != j)
    p = _pair(pt)
    eps = frac * p.lam ** common_prefix_len(i, j) / 2
    fwd, rev = shifted_case(i, j, p, eps)
    assert fwd and rev
    assert shift_identities(i, j, p)


def test_bridge_near_miss_pair_is_non_vacuous():
    # the overlap pair of t = λ, with λ left fixed and t nudged
    p = ParamPair(F(3, 10), F(3, 10) + F(1, 10**6))
    i, j = word3("21"), word3("13")
    eps = F(2, 10**6)
    assert abs(phi_at_zero(i, p) - phi_at_zero(j, p)) < eps
    assert first_symbol_case(i, j, p, eps) == (True, True)
