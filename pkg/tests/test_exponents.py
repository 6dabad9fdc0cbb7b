from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from fractime._errors import ExponentError
from fractime.exponents import (INF, ExponentConfig, admissible, as_exponent, as_rational, convex_hull,
                                in_convex_polygon, inhom_exponents, lambda_ab, lambda_alpha, quadrangle_Q,
                                r_star, recip, s_gamma, s_gamma_alpha, sigma_alpha)

F = Fraction


def test_admissible_examples():
    v = admissible(ExponentConfig(1, 2, 1, 8, 4))
    assert v.status == "boundary" and v.margin == 0
    assert admissible(ExponentConfig(1, 2, F(1, 2), 4, 4)).status == "boundary"
    assert admissible(ExponentConfig(1, 2, F(1, 2), 2, 4)).status == "fail"
    assert admissible(ExponentConfig(1, 2, F(1, 2), 8, 4)).status == "strict"


def test_excluded_triple():
    with pytest.raises(ExponentError, match="excluded triple"):
        ExponentConfig(2, 2, 1, 2, "inf")


def test_thresholds():
    assert s_gamma(ExponentConfig(1, 2, 1, 8, 4)) == 0
    assert s_gamma_alpha(ExponentConfig(1, 2, F(1, 2), 4, 4)) == 0
    for d in (1, 2, 3):
        for g in (F(1), F(2), F(3, 2)):
            assert s_gamma(ExponentConfig(d, g, 1, INF, 2)) == 0


def test_wave_branch():
    cfg = ExponentConfig(2, 1, F(1, 2), 4, 4)
    assert cfg.branch == "wave"
    assert admissible(cfg).margin == F(1, 2) * F(1, 4) - F(1, 8)


def test_parsing():
    assert as_rational("1/3") == F(1, 3) and as_rational(0.25) == F(1, 4)
    assert as_exponent("inf") is INF and recip(INF) == 0
    with pytest.raises(ExponentError):
        ExponentConfig(1, 2, F(3, 2), 4, 4)
    with pytest.raises(ExponentError):
        ExponentConfig(1, 2, 1, 1, 4)


def test_inhom_vertices_d3():
    e = inhom_exponents(3, 2, 1, 4, 4, 4, 4)
    assert e.vertices["A"] == (F(1, 2), F(1, 6))
    assert e.vertices["C"] == (F(1, 4), F(1, 12))


def test_r_star_and_lambda():
    assert r_star(3, 1) == 6
    with pytest.raises(ExponentError):
        r_star(1, F(1, 2))
    assert lambda_ab(1, 2, 2) == 0 and lambda_ab(2, INF, INF) == 1


exps = st.sampled_from([F(2), F(3), F(4), F(6), F(8), INF])
alphas = st.sampled_from([F(1, 4), F(1, 2), F(3, 4), F(1)])


@given(st.integers(1, 3), alphas, exps, exps, exps, exps)
def test_lambda_vanishes_with_sigma_at_gamma_two(d, alpha, rt, r, qt, q):
    # lambda = sigma/2 + (gamma/2 - 1)(alpha/qt + alpha/q)
    sig = sigma_alpha(d, 2, alpha, rt, r, qt, q)
    lam = lambda_alpha(d, alpha, rt, r, qt, q)
    assert lam == sig / 2
    for g in (F(3), F(5, 2)):
        sg = sigma_alpha(d, g, alpha, rt, r, qt, q)
        assert lambda_alpha(d, alpha, rt, r, qt, q) == sg / 2 + (g / 2 - 1) * alpha * (recip(qt) + recip(q))


@given(st.integers(1, 3), alphas, exps, exps)
def test_admissible_matches_threshold_identity(d, alpha, q, r):
    # at gamma = 2 the measure-form threshold is twice the admissibility margin
    cfg = ExponentConfig(d, 2, alpha, q, r) if not (F(d) / alpha == 2 and q == 2 and r is INF) else None
    if cfg is None:
        return
    margin = F(d, 2) * (F(1, 2) - recip(r)) - alpha * recip(q)
    assert admissible(cfg).margin == margin
    assert s_gamma_alpha(cfg) == 2 * margin


@given(st.integers(1, 3), alphas)
def test_quadrangle_contains_diagonal_and_is_symmetric(d, alpha):
    Q = quadrangle_Q(d, alpha)
    assert in_convex_polygon((F(1, 2), F(1, 2)), Q) and in_convex_polygon((F(0), F(0)), Q)
    for p in Q:
        assert in_convex_polygon((p[1], p[0]), Q)


def test_convex_hull_square():
    pts = [(0, 0), (1, 0), (1, 1), (0, 1), (F(1, 2), F(1, 2)), (F(1, 2), 0)]
    hull = convex_hull(pts)
    assert len(hull) == 4
    assert in_convex_polygon((F(1, 2), F(1, 2)), hull) and not in_convex_polygon((2, 2), hull)


def test_inhom_labels():
    assert inhom_exponents(1, 2, F(1, 2), 4, 4, 4, 4).sigma == 0
    e = inhom_exponents(1, 2, F(1, 2), 4, 4, INF, INF)
    assert e.sigma == F(1, 2)
    assert inhom_exponents(1, 2, F(1, 2), 4, 4, 4, 4).to_json()["sigma"] == "0"
