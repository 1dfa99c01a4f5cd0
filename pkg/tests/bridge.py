"""Exact checkers for the bridge between orbit gaps and planar projections, shared by tests."""

from fractions import Fraction as F

from condensation_lab.symbolic_ifs import ParamPair, beta, common_prefix_len, phi_at_zero, proj_value, shift, INFINITE


def first_symbol_case(i, j, p: ParamPair, eps: F) -> tuple[bool, bool]:
    """(forward holds, reverse holds) for a pair with different first symbols."""
    dist = abs(phi_at_zero(i, p) - phi_at_zero(j, p))
    pv = proj_value(beta(i, j), p.lam)
    off = None if pv is INFINITE else abs(p.t - pv)
    forward = not (dist < eps) or (off is not None and off < 2 * eps)
    reverse = off is None or not (off < eps) or dist < 2 * eps
    return forward, reverse


def shifted_case(i, j, p: ParamPair, eps: F) -> tuple[bool, bool]:
    """Both implications for a pair with a common beginning of length c, eps < λ^c / 2."""
    c = common_prefix_len(i, j)
    scale = p.lam**c
    dist = abs(phi_at_zero(i, p) - phi_at_zero(j, p))
    pv = proj_value(beta(i, j), p.lam)
    off = None if pv is INFINITE else abs(p.t - pv)
    forward = not (dist < eps) or (off is not None and off < 2 * eps / scale)
    reverse = off is None or not (off < eps / scale) or dist < 2 * eps
    return forward, reverse


def shift_identities(i, j, p: ParamPair) -> bool:
    c = common_prefix_len(i, j)
    si, sj = shift(i, c), shift(j, c)
    lhs = phi_at_zero(i, p) - phi_at_zero(j, p)
    rhs = p.lam**c * (phi_at_zero(si, p) - phi_at_zero(sj, p))
    return lhs == rhs and proj_value(beta(i, j), p.lam) == proj_value(beta(si, sj), p.lam)
