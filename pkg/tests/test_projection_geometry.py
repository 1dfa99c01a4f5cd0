import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from condensation_lab.errors import PreconditionViolated
from condensation_lab.numerics import IntPoly, RatFunc, RatInterval, rf_derivative
from condensation_lab.projection_geometry import (
    ADMISSIBLE_3_PREFIXES,
    CHILD_ORDER,
    HullPoint,
    check_covering,
    child_intervals,
    hull_projection_interval,
    hull_vertices,
    in_hull,
    projected_cylinder_interval,
    projint_box,
    union_equals_parent,
    verify_projint_numeric,
)
from condensation_lab.symbolic_ifs import J_ALPHABET, proj_ratfunc, s_orbit_point, word_j

LAM = F(3, 10)


def test_hull_vertices_are_the_extreme_fixed_points():
    r = 1 / (1 - LAM)
    assert set(hull_vertices(LAM)) == {(i * r, j * r) for i, j in J_ALPHABET} - {(0, 0)}
    # the seventh fixed point is the centre, inside the hull
    assert in_hull(F(0), F(0), LAM)


def test_projection_interval_examples():
    iv = hull_projection_interval(HullPoint(F(3, 10), F(1)), LAM, 2)
    assert iv == RatInterval(F(6, 35), F(3, 7))
    edge = LAM**3 / (1 - LAM)
    assert hull_projection_interval(HullPoint(edge, F(1)), LAM, 3).lo == 0
    wide = hull_projection_interval(HullPoint(F(3, 10), F(1)), LAM, 2).width
    narrow = hull_projection_interval(HullPoint(F(3, 10), F(1)), LAM, 20).width
    assert narrow < wide * LAM**17


def test_projection_interval_preconditions():
    with pytest.raises(PreconditionViolated, match="a > 0"):
        hull_projection_interval(HullPoint(F(-1, 10), F(1)), LAM, 2)
    with pytest.raises(PreconditionViolated, match="b >"):
        hull_projection_interval(HullPoint(F(1, 10), F(1, 10)), LAM, 2)
    with pytest.raises(PreconditionViolated, match="λ\\^n"):
        hull_projection_interval(HullPoint(F(1, 100), F(1)), LAM, 1)


def test_projection_interval_inclusion_by_sampling():
    rng = random.Random(7)
    pt = HullPoint(F(3, 10), F(1))
    n = 2
    iv = hull_projection_interval(pt, LAM, n)
    verts = hull_vertices(LAM)
    for _ in range(200):
        w = [F(rng.randint(0, 50)) for _ in verts]
        s = sum(w) or F(1)
        x = pt.a + LAM**n * sum(wi * v[0] for wi, v in zip(w, verts)) / s
        y = pt.b + LAM**n * sum(wi * v[1] for wi, v in zip(w, verts)) / s
        assert iv.contains(x / y)


def test_projection_along_the_hull_edge_is_monotone():
    # s ↦ (a − s c)/(b + (1 − s) c) with c = λⁿ/(1−λ) has a derivative of constant sign
    a, b, c = F(3, 10), F(1), LAM**2 / (1 - LAM)
    s = RatFunc(IntPoly((0, 1)))
    f = (a - c * s) / (b + c - c * s)
    d = rf_derivative(f)
    assert d.num.degree == 0  # the numerator is a constant, so the sign never changes


def test_covering_example_box_over_open_domain():
    dom = RatInterval(F(1, 4) + F(1, 10**6), F(1, 3) - F(1, 10**6))
    assert check_covering(projint_box, dom, 3).proved
    assert check_covering(projint_box(LAM), RatInterval.point(LAM), 3).proved


def test_covering_failure_is_located():
    cert = check_covering(HullPoint(F(1, 1000), F(1)), RatInterval.point(LAM), 3)
    assert not cert.proved
    assert {"l2", "l5"} & set(cert.failed)


@settings(max_examples=200, deadline=None)
@given(st.fractions(min_value=F(26, 100), max_value=F(33, 100), max_denominator=10**4))
def test_covering_soundness_at_rational_points(lam):
    box = projint_box(lam)
    assert check_covering(box, RatInterval.point(lam), 3).proved
    for a, b in box.corners():
        assert union_equals_parent(a, b, lam, 3)


def test_children_follow_the_listed_order():
    kids = child_intervals(F(3, 10), F(1), LAM, 3)
    assert len(kids) == len(CHILD_ORDER) == 7
    mids = [k.mid for k in kids]
    assert mids == sorted(mids)


def test_cylinder_interval_example():
    k = word_j("0 1,1 1,0 -1")
    rep = projected_cylinder_interval(k, LAM, depth=2)
    assert rep.ok
    assert 2 * LAM**3 <= rep.length <= 3 * LAM**3
    assert F(54, 1000) <= rep.length <= F(81, 1000)
    assert rep.center == proj_ratfunc(k).eval_exact(LAM)
    a, b = s_orbit_point(k, LAM)
    assert rep.length == 2 * LAM**3 / (b * (1 - LAM))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(ADMISSIBLE_3_PREFIXES), st.lists(st.sampled_from(J_ALPHABET), max_size=4),
       st.fractions(min_value=F(1, 4) + F(1, 100), max_value=F(1, 3) - F(1, 100), max_denominator=1000))
def test_cylinder_claims_at_random_points(prefix, tail, lam):
    k = tuple(prefix) + tuple(tail)
    rep = projected_cylinder_interval(k, lam, depth=1)
    assert rep.ok
    assert 2 * lam ** len(k) <= rep.length <= 3 * lam ** len(k)


def test_cylinder_preconditions():
    with pytest.raises(PreconditionViolated):
        projected_cylinder_interval(word_j("0 1,0 0,0 0"), LAM)
    with pytest.raises(PreconditionViolated):
        projected_cylinder_interval(word_j("0 1,1 1,0 -1"), F(1, 2))


def test_projint_claims():
    cert = verify_projint_numeric()
    assert cert.proved
    assert verify_projint_numeric(RatInterval.point(F(3, 10))).proved
    tight = verify_projint_numeric(floors={"min_display_first": F(1, 5)})
    # exploratory: the outcome is recorded either way
    assert tight.results["min_display_first"].status.value in ("PROVED", "REFUTED", "INCONCLUSIVE")
