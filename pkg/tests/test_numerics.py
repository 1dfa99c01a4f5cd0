import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from condensation_lab.errors import BitBudgetExceeded, InvalidParameter, NoSignChange
from condensation_lab.numerics import (
    CertStatus,
    IntPoly,
    RatFunc,
    RatInterval,
    certify_positive,
    cross_difference,
    decimal_str,
    divides,
    eval_poly,
    exact_quotient,
    isolate_root,
    rf_derivative,
    round_down,
    round_up,
    simplest_rational_in,
    to_scalar,
)

LAM = IntPoly((0, 1))
BASE_QUAD = IntPoly((-1, 3, 1))  # λ² + 3λ − 1
CUBIC = IntPoly((-1, 2, 4, 1))  # λ³ + 4λ² + 2λ − 1
ROOT = (math.sqrt(13) - 3) / 2
DOMAIN = RatInterval(F(1, 4), F(1, 3))

small_int = st.integers(-20, 20)
rationals = st.fractions(min_value=-3, max_value=3, max_denominator=1000)


@st.composite
def intervals(draw):
    a, b = draw(rationals), draw(rationals)
    return RatInterval(min(a, b), max(a, b))


@st.composite
def points_in(draw, iv):
    s = draw(st.fractions(min_value=0, max_value=1, max_denominator=500))
    return iv.lo + s * (iv.hi - iv.lo)


# --- scalars -----------------------------------------------------------------


def test_scalars_are_canonical_and_exact():
    x = to_scalar("-6/4")
    assert (x.numerator, x.denominator) == (-3, 2)
    assert to_scalar("1/3") + to_scalar("1/6") == F(1, 2)


def test_floats_are_rejected():
    with pytest.raises(InvalidParameter):
        to_scalar(0.3)


def test_decimal_rendering_rounds_correctly():
    assert decimal_str(F(1, 3)) == "3.3333333333333333e-1"
    assert decimal_str(F(-2, 3), 3) == "-6.67e-1"
    assert decimal_str(F(0)) == "0"


def test_dyadic_rounding_brackets():
    x = F(1, 3)
    assert round_down(x, 10) <= x <= round_up(x, 10)
    assert round_up(x, 10) - round_down(x, 10) == F(1, 1024)


def _simplest_oracle(lo, hi):
    q = 1
    while True:
        n = math.ceil(lo * q)
        if F(n, q) <= hi:
            return F(n, q)
        q += 1


@given(st.fractions(min_value=F(1, 100), max_value=5, max_denominator=300),
       st.fractions(min_value=0, max_value=F(1, 2), max_denominator=300))
def test_simplest_rational_matches_search(lo, span):
    hi = lo + span
    assert simplest_rational_in(lo, hi) == _simplest_oracle(lo, hi)


# --- intervals and polynomials ---------------------------------------------------


def test_eval_poly_examples():
    assert eval_poly(BASE_QUAD, RatInterval.point(F(3, 10))) == RatInterval.point(F(-1, 100))
    assert eval_poly(IntPoly(), DOMAIN) == RatInterval.point(0)


def test_eval_poly_contains_zero_at_shared_root():
    # a width-1e-20 enclosure of the root of λ²+3λ−1 built from its exact bounds
    enc = isolate_root(BASE_QUAD, DOMAIN, F(1, 10**20))
    assert enc.width <= F(1, 10**20)
    assert eval_poly(CUBIC, enc).contains(0)


@given(st.lists(small_int, min_size=1, max_size=7), intervals(), st.data())
def test_inclusion_isotonicity(coeffs, iv, data):
    p = IntPoly(tuple(coeffs))
    x0 = data.draw(points_in(iv))
    assert eval_poly(p, iv).contains(p.eval_exact(x0))


@given(intervals(), intervals(), st.data())
def test_interval_products_contain_pointwise(a, b, data):
    x, y = data.draw(points_in(a)), data.draw(points_in(b))
    assert (a * b).contains(x * y)
    assert (a - b).contains(x - y)
    assert (a + b).contains(x + y)


def test_outward_rounding_in_horner_keeps_inclusion():
    x = RatInterval(F(3, 10), F(3, 10) + F(1, 2**300))
    p = IntPoly(tuple(range(-10, 30)))
    enc = p.eval_interval(x)
    for v in (x.lo, x.hi, x.mid):
        assert enc.contains(p.eval_exact(v))


def test_bit_budget_is_a_hard_error():
    from condensation_lab.numerics import check_bits, get_bit_budget, set_bit_budget

    old = get_bit_budget()
    try:
        set_bit_budget(64)
        with pytest.raises(BitBudgetExceeded):
            check_bits(F(1, 2**100))
    finally:
        set_bit_budget(old)


# --- rational functions -----------------------------------------------------------


def test_ratfunc_canonical_equality():
    a = RatFunc(IntPoly((0, 2)), IntPoly((2, 2)))
    b = RatFunc(IntPoly((0, -1)), IntPoly((-1, -1)))
    assert a == b
    assert a.den.leading > 0


def test_rf_derivative_examples():
    assert rf_derivative(RatFunc(LAM)) == RatFunc.const(1)
    assert rf_derivative(RatFunc.const(F(7, 3))) == RatFunc.const(0)


def test_rf_derivative_matches_finite_difference():
    f = RatFunc(IntPoly((0, 1, 0, 0, 1)), IntPoly((1, 1, -1, -1)))
    d = float(rf_derivative(f).eval_exact(F(3, 10)))
    h = 1e-6
    fd = (float(f.eval_exact(F(3, 10) + F(h))) - float(f.eval_exact(F(3, 10) - F(h)))) / (2 * h)
    assert abs(d - fd) / abs(fd) < 1e-6


def test_cross_difference_of_base_words_factors():
    from condensation_lab.symbolic_ifs import coordinate_cross_difference, word_j

    k = word_j("0 1,1 1,0 -1,0 -1,1 0")
    l = word_j("0 1,1 0,0 1,0 1,-1 0")
    # oracle: hand expansion of (λ+λ⁴)(1+λ²+λ³) − (λ−λ⁴)(1+λ−λ²−λ³) = −λ² + 2λ³ + 4λ⁴ + λ⁵
    raw = coordinate_cross_difference(k, l)
    assert raw == IntPoly((0, 0, -1, 2, 4, 1))
    assert raw == IntPoly((0, 0, 1)) * IntPoly((1, 1)) * BASE_QUAD
    assert exact_quotient(raw, BASE_QUAD) == IntPoly((0, 0, 1, 1))
    # the canonical proj of k cancels the shared factor 1 + λ and normalises the sign
    f = RatFunc(IntPoly((0, 1, 0, 0, 1)), IntPoly((1, 1, -1, -1)))
    g = RatFunc(IntPoly((0, 1, 0, 0, -1)), IntPoly((1, 0, 1, 1)))
    cd = cross_difference(f, g)
    assert cd == IntPoly((0, 0, -1)) * BASE_QUAD
    assert divides(BASE_QUAD, cd)


def test_cross_difference_trivial_cases():
    f = RatFunc(IntPoly((1, 2)), IntPoly((3, 0, 1)))
    assert cross_difference(f, f).is_zero()
    assert cross_difference(RatFunc(LAM), RatFunc(IntPoly((1, 1)))) == IntPoly((-1,))


@given(st.lists(small_int, min_size=1, max_size=4), st.lists(small_int, min_size=1, max_size=4),
       st.lists(small_int, min_size=1, max_size=4), st.lists(small_int, min_size=1, max_size=4))
def test_cross_difference_antisymmetric(a, b, c, d):
    b = b if any(b) else [1]
    d = d if any(d) else [1]
    f = RatFunc(IntPoly(tuple(a)), IntPoly(tuple(b)))
    g = RatFunc(IntPoly(tuple(c)), IntPoly(tuple(d)))
    assert cross_difference(f, g) == -cross_difference(g, f)


# --- roots and certificates ---------------------------------------------------------


def test_isolate_root_base_quadratic():
    enc = isolate_root(BASE_QUAD, DOMAIN, F(1, 10**12))
    assert enc.width <= F(1, 10**12)
    assert float(enc.lo) <= ROOT <= float(enc.hi)
    # exact containment: the quadratic changes sign across the enclosure
    assert BASE_QUAD.sign_at(enc.lo) < 0 < BASE_QUAD.sign_at(enc.hi)


def test_isolate_root_linear_and_shared_root():
    enc = isolate_root(IntPoly((-1, 2)), RatInterval(F(0), F(1)), F(1, 1000))
    assert enc.contains(F(1, 2))
    a = isolate_root(CUBIC, DOMAIN, F(1, 10**12))
    b = isolate_root(BASE_QUAD, DOMAIN, F(1, 10**12))
    assert a.intersect(b) is not None
    assert CUBIC.sign_at(a.lo) * CUBIC.sign_at(a.hi) <= 0


def test_isolate_root_without_sign_change():
    with pytest.raises(NoSignChange):
        isolate_root(IntPoly((1, 1)), DOMAIN, F(1, 100))


@given(st.integers(1, 50), st.integers(51, 200))
def test_isolate_root_sign_change_property(p, q):
    r = F(p, q)
    poly = IntPoly((-p, q))  # root p/q in (0, 1)
    enc = isolate_root(poly, RatInterval(F(0), F(1)), F(1, 10**6))
    assert enc.contains(r)


def test_certify_positive_examples():
    lower = RatFunc(IntPoly((2,)), IntPoly((1, 0, -2, -2))) - 2
    upper = 3 - RatFunc(IntPoly((2,)), IntPoly((1, -1, 1, -2)))
    assert certify_positive(lower, DOMAIN, 0).proved
    assert certify_positive(upper, DOMAIN, 0).proved
    res = certify_positive(RatFunc(IntPoly((-1, 1))), DOMAIN, 0)
    assert res.status is CertStatus.REFUTED
    assert res.nodes == 1


def test_certify_positive_soundness_by_sampling():
    f = RatFunc(IntPoly((1, -3, 1)), IntPoly((2, 1)))  # (1 − 3λ + λ²)/(2 + λ) > 0 for λ < 0.38
    res = certify_positive(f, DOMAIN, F(0))
    assert res.proved
    for k in range(10**4 + 1):
        lam = DOMAIN.lo + F(k, 10**4) * DOMAIN.width
        assert f.eval_exact(lam) >= 0


def test_certificate_json_shape():
    res = certify_positive(RatFunc(IntPoly((1,))), DOMAIN, 0)
    obj = res.to_json_obj()
    assert {"claim", "domain", "floor", "tree", "status"} <= set(obj)
    assert obj["status"] == "PROVED"
