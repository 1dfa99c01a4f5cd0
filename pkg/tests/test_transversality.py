import random
from fractions import Fraction as F

import pytest

from condensation_lab.errors import InvalidParameter
from condensation_lab.numerics import RatInterval
from condensation_lab.symbolic_ifs import K_PREFIX, L_PREFIX, proj_ratfunc, word_j
from condensation_lab.transversality import (
    DEFAULT_DOMAIN,
    TransversalityCert,
    ab_split,
    certify_transversality,
    derivative_bound,
    prefixed_derivative_bound,
    tails,
)

TAIL = ((-1, -1), (-1, 0), (0, -1), (0, 0), (0, 1), (1, 0), (1, 1))


@pytest.fixture(scope="module")
def cert():
    return certify_transversality()


def test_certificate_constants(cert):
    assert cert.lower >= F(57, 1000)
    assert cert.sub_claims["num_a_low"].lower > F(4, 5)
    assert cert.sub_claims["num_b_up"].lower > F(4, 5)
    assert 0 < cert.lower <= cert.upper
    assert cert.delta == min(cert.lower, 1 / cert.upper, F(1, 145))
    assert cert.delta < F(1, 144)


def test_point_difference_within_bounds(cert):
    a, b = ab_split(K_PREFIX, L_PREFIX)
    v = a.eval_exact(F(3, 10)) - b.eval_exact(F(3, 10))
    assert cert.lower <= v <= cert.upper


def test_length_five_split_matches_finite_difference():
    a, b = ab_split(K_PREFIX, L_PREFIX)
    f = proj_ratfunc(K_PREFIX) - proj_ratfunc(L_PREFIX)
    h = F(1, 10**7)
    fd = (f.eval_exact(F(3, 10) + h) - f.eval_exact(F(3, 10) - h)) / (2 * h)
    assert abs(float(a.eval_exact(F(3, 10)) - b.eval_exact(F(3, 10)) - fd)) < 1e-6
    assert all(p.is_zero() for p in tails(K_PREFIX, L_PREFIX).values())


def test_tail_coefficients():
    k = K_PREFIX + ((1, 0), (-1, -1))
    t = tails(k, L_PREFIX)
    assert t["a"].coeffs == (0, 0, 0, 0, 0, 1, -1)
    assert t["b"].coeffs == (0, 0, 0, 0, 0, 0, -1)
    assert t["c"].is_zero() and t["d"].is_zero()


def test_wrong_prefix_rejected():
    with pytest.raises(InvalidParameter):
        ab_split(L_PREFIX, K_PREFIX)


def test_soundness_over_random_tails(cert):
    rng = random.Random(2024)
    for _ in range(1000):
        k = K_PREFIX + tuple(rng.choice(TAIL) for _ in range(rng.randint(0, 7)))
        l = L_PREFIX + tuple(rng.choice(TAIL) for _ in range(rng.randint(0, 7)))
        lam = DEFAULT_DOMAIN.lo + F(rng.randint(0, 10**6), 10**6) * DEFAULT_DOMAIN.width
        a, b = ab_split(k, l)
        v = a.eval_exact(lam) - b.eval_exact(lam)
        assert cert.lower <= v <= cert.upper


def test_prefixed_derivative_bound_dominates_samples():
    bound = prefixed_derivative_bound()
    rng = random.Random(5)
    for _ in range(200):
        w = rng.choice((K_PREFIX, L_PREFIX)) + tuple(rng.choice(TAIL) for _ in range(rng.randint(0, 6)))
        lam = DEFAULT_DOMAIN.lo + F(rng.randint(0, 1000), 1000) * DEFAULT_DOMAIN.width
        assert abs(proj_ratfunc(w).derivative().eval_exact(lam)) <= bound


def test_derivative_bound_examples():
    dom = RatInterval(F(29, 100), F(31, 100))
    b0 = derivative_bound(word_j("1 1,0 1"), dom)
    assert b0.m == 0 and b0.closed_form == 0 and b0.bound > 0
    bk = derivative_bound(K_PREFIX, dom)
    f = proj_ratfunc(K_PREFIX)
    h = F(1, 10**6)
    for i in range(20):
        lam = dom.lo + F(i, 19) * dom.width
        lam = min(max(lam, dom.lo + h), dom.hi - h)
        slope = abs((f.eval_exact(lam + h) - f.eval_exact(lam - h)) / (2 * h))
        assert slope <= bk.bound
    # an offset of −2 keeps proj above 2 on the domain, far from [0, 1/2]
    far = derivative_bound(word_j("0 1,0 0,1 0"), dom)
    assert far.m == 2 and not far.far_by_offset
    near = derivative_bound(word_j("1 0,0 0,0 1"), dom)
    assert near.m == -2 and near.far_by_offset


def test_round_trip_json(cert):
    obj = cert.to_json_obj()
    again = TransversalityCert.from_json_obj(obj)
    assert again.lower == cert.lower and again.digest() == cert.digest()


def test_domain_must_be_inside():
    with pytest.raises(InvalidParameter):
        certify_transversality(RatInterval(F(1, 4), F(3, 10)))
