import itertools
from fractions import Fraction as F

import pytest

from condensation_lab.construction import (
    base_root,
    build_tree,
    construct,
    eq_other_gap,
    eta_builtin,
    eta_from_table,
    gap_lower_bound,
    global_certificates,
    greedy_descend,
    greedy_descend_detail,
    initial_node,
    load_eta_table,
    parse_eta,
    search_k,
    two_interval_step,
    two_interval_step_detail,
)
from condensation_lab.errors import BudgetExceeded, InvalidParameter, PreconditionViolated
from condensation_lab.numerics import IntPoly, RatInterval, simplest_rational_in
from condensation_lab.symbolic_ifs import J_ALPHABET, K_PREFIX, L_PREFIX, pad, proj_ratfunc, s_orbit_point


@pytest.fixture(scope="module")
def certs():
    return global_certificates()


@pytest.fixture(scope="module")
def nsq():
    return eta_builtin("nsq")


@pytest.fixture(scope="module")
def depth_one(nsq, certs):
    return construct(nsq, 1, 12, certs)


def _proj(word, lam):
    x = sum(a * lam**k for k, (a, _) in enumerate(word))
    y = sum(b * lam**k for k, (_, b) in enumerate(word))
    return None if y == 0 else x / y


# --- eta sequences ---------------------------------------------------------


@pytest.mark.parametrize("name,rho", [("nsq", F(1, 8)), ("nn", F(1, 4)), ("nlogn", F(1, 2))])
def test_builtin_ratio_and_decay(name, rho):
    eta = eta_builtin(name)
    assert eta.tail_ratio == rho
    assert eta.spot_check(30)
    for n in range(1, 30):
        assert 0 < eta(n + 1) < eta(n)
        assert eta(n + 1) <= rho * eta(n)


def test_tail_constant_bounds_partial_sums(nsq):
    for n in range(1, 8):
        tail = sum(nsq(k) for k in range(n, n + 25))
        assert tail <= nsq.tail_constant * nsq(n)


def test_eta_rejects_index_zero_and_unknown_name(nsq):
    with pytest.raises(InvalidParameter):
        nsq(0)
    with pytest.raises(InvalidParameter):
        eta_builtin("fast")


def test_table_eta(tmp_path):
    path = tmp_path / "eta.csv"
    path.write_text("n,eta\n1,1/2\n2,1/8\n3,1/64\n", encoding="utf-8")
    eta = load_eta_table(str(path), "1/4")
    assert eta(3) == F(1, 64)
    with pytest.raises(BudgetExceeded):
        eta(4)
    with pytest.raises(InvalidParameter):
        eta_from_table(["1/2", "1/3"], "1/2")
    with pytest.raises(InvalidParameter):
        parse_eta(f"table:{path}")
    assert parse_eta(f"table:{path}", "1/4").max_index == 3


# --- the base pair and the root ---------------------------------------------


def test_base_root_factor_and_sign():
    br = base_root()
    assert br.enclosure.width <= F(1, 10**12)
    assert br.cross_difference == br.quotient * IntPoly((-1, 3, 1))
    q = IntPoly((-1, 3, 1))
    assert q.eval_exact(br.enclosure.lo) < 0 < q.eval_exact(br.enclosure.hi)
    # (√13 − 3)/2 lies inside iff 13 sits between the squares of 2x + 3
    assert (2 * br.enclosure.lo + 3) ** 2 < 13 < (2 * br.enclosure.hi + 3) ** 2


def test_search_k_matches_direct_scan(nsq, certs):
    enc = base_root().enclosure
    K, _ = search_k(nsq, certs.delta, enc)
    factor = F(3, 2) / certs.delta

    def good(k):
        half = nsq(k) / 2
        return (2 * F(1, 4**k) > factor * nsq(k)) and F(1, 4) < enc.lo - half and enc.hi + half < F(1, 3)

    # nsq ratios fall below 1/4 from k = 1, so a window of 40 settles the tail
    scan = next(k for k in range(1, 40) if all(good(j) for j in range(k, 40)))
    assert K == scan


def test_initial_node_conditions(nsq, certs):
    root = initial_node(nsq, certs)
    assert root.ok
    assert root.interval.width == nsq(root.length)
    assert tuple(root.k_word[:5]) == K_PREFIX
    assert proj_ratfunc(root.k_word) == proj_ratfunc(K_PREFIX)
    assert root.interval.lo > F(1, 4) and root.interval.hi < F(1, 3)


def test_padding_preserves_projection():
    for n in range(6, 12):
        assert proj_ratfunc(pad(K_PREFIX, n)) == proj_ratfunc(K_PREFIX)


# --- the two-interval step --------------------------------------------------


def test_two_interval_step_near_base_root(certs):
    root = base_root(F(1, 10**14)).enclosure
    centre = simplest_rational_in(root.lo, root.hi)
    eps, eta = F(1, 10**6), F(1, 10**8)
    d = two_interval_step_detail(K_PREFIX, L_PREFIX, centre, eps, eta, certs.trans)
    left, right = d.left, d.right
    assert left.width == eta and right.width == eta
    assert left.hi < right.lo
    assert left.hi < root.hi and right.lo > root.lo
    dinv = 1 / certs.delta
    window = RatInterval(centre - 3 * dinv * eps, centre + 3 * dinv * eps)
    assert window.contains(left) and window.contains(right)
    fk, fl = proj_ratfunc(K_PREFIX), proj_ratfunc(L_PREFIX)
    for x in (left.lo, left.hi, right.lo, right.hi):
        gap = abs(fk.eval_exact(x) - fl.eval_exact(x))
        assert certs.delta * eta / 2 < gap < F(3, 2) * dinv * eta
    assert two_interval_step(L_PREFIX, K_PREFIX, centre, eps, eta, certs.trans) == (left, right)


def test_two_interval_step_preconditions(certs):
    with pytest.raises(PreconditionViolated):
        two_interval_step(K_PREFIX, K_PREFIX, F(3, 10), F(1, 10**6), F(1, 10**8), certs.trans)
    with pytest.raises(PreconditionViolated):
        two_interval_step(K_PREFIX, L_PREFIX, F(3, 10), F(1, 10**6), F(1), certs.trans)


# --- greedy descent ---------------------------------------------------------


def test_greedy_descend_towards_centre():
    lam = F(3, 10)
    x, y = s_orbit_point(L_PREFIX, lam)
    target = x / y
    tol = F(1, 10**6)
    res = greedy_descend_detail(L_PREFIX, target, lam, 3, tol)
    a, b = res.extensions
    assert a != b
    assert len(a) >= 3 and len(b) >= 3
    for ext, dist in zip((a, b), res.distances):
        v = _proj(L_PREFIX + ext, lam)
        assert abs(v - target) == dist < tol
    assert greedy_descend(L_PREFIX, target, lam, 3, tol) == (a, b)


def test_greedy_descend_rejects_exterior_target():
    with pytest.raises(PreconditionViolated):
        greedy_descend(L_PREFIX, F(5), F(3, 10), 2, F(1, 100))


# --- the minimum-gap bound --------------------------------------------------


def _brute_gap(lam, max_len):
    vals = set()
    for n in range(1, max_len + 1):
        for w in itertools.product(J_ALPHABET, repeat=n):
            v = _proj(w, lam)
            if v is not None:
                vals.add(v)
    s = sorted(vals)
    return min(b - a for a, b in zip(s, s[1:]))


@pytest.mark.parametrize("max_len", [1, 2, 5])
def test_gap_lower_bound_against_brute_force(max_len):
    lam = F(3, 10)
    brute = _brute_gap(lam, max_len)
    bound = gap_lower_bound(lam, max_len)
    assert 0 < bound <= brute
    assert eq_other_gap(lam, max_len).value == brute


def test_gap_lower_bound_explicit_constant():
    c = F(4, 10) ** 2 / F(7, 10) ** 2
    assert gap_lower_bound(F(3, 10), 5) == c / 10**8
    with pytest.raises(InvalidParameter):
        gap_lower_bound(F(1, 2), 3)


# --- one induction step and assembled parameters ----------------------------


def test_depth_one_tree(depth_one, nsq):
    tree, _ = depth_one
    assert tree.ok
    root = tree.nodes[""]
    kids = tree.level(1)
    assert len(kids) == 2
    for c in kids:
        assert c.ok
        assert root.interval.contains(c.interval)
        assert c.interval.width == nsq(c.length)
        assert c.length > root.length
        # location: 0 ≤ proj ≤ λ/(1−λ) at both endpoints of the child interval
        f = proj_ratfunc(c.k_word)
        for x in (c.interval.lo, c.interval.hi):
            assert 0 <= f.eval_exact(x) <= x / (1 - x)
    assert not kids[0].interval.intersects(kids[1].interval)
    assert all(c["ok"] for c in tree.level_checks)


def test_depth_one_bundles(depth_one):
    tree, bundles = depth_one
    assert len(bundles) == 2
    for b in bundles:
        assert b.ok
        assert b.t_box.lo > 0 and b.t_box.hi < b.lambda_box.lo / (1 - b.lambda_box.lo)
        assert [r["n"] for r in b.table] == list(range(1, 13))
        assert all(r["delta_n_positive"] and r["below_eta_prime"] for r in b.table)
        assert all(c["ok"] for c in b.contradiction)
        for row in b.bridge:
            assert tuple(row["first_symbols"]) == (2, 1)


def test_depth_one_is_deterministic(depth_one, nsq, certs):
    tree, _ = depth_one
    again = build_tree(nsq, 1, certs)
    assert again.to_json() == tree.to_json()


def test_depth_cap():
    with pytest.raises(BudgetExceeded):
        build_tree(eta_builtin("nsq"), 50)
