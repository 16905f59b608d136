from __future__ import annotations

import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covbound.covdeg import HypothesisViolated
from covbound.separation import (
    PrecisionExhausted,
    closed_form_derivation_holds,
    closed_form_threshold,
    complete_intersection_gonality_bound,
    degree_inequality_holds,
    degree_threshold,
    gonality_lower_bound,
    root_bounds,
    separation_count,
)

from oracles import separation_inequality_oracle

EPSILONS = st.sampled_from([F(1, 2), F(1, 3), F(1, 4), F(2, 7), F(1, 10), F(3, 5)])


@settings(max_examples=300, deadline=None)
@given(st.fractions(min_value=0, max_value=10**9), st.integers(1, 6), st.integers(4, 80))
def test_root_bounds_bracket(x, j, bits):
    lo, hi = root_bounds(x, j, bits)
    assert lo <= hi <= lo + F(1, 2**bits)
    assert lo**j <= x <= hi**j


def test_root_bounds_exact_cases():
    assert root_bounds(F(9, 4), 2, 10) == (F(3, 2), F(3, 2))
    assert root_bounds(F(27), 3, 10) == (3, 3)
    assert root_bounds(F(5), 1, 3) == (5, 5)
    with pytest.raises(ValueError):
        root_bounds(F(-1), 2, 10)


def test_pinned_threshold():
    rep = degree_threshold(2, F(1, 2), 1)
    assert (rep.d0_scan, rep.d0_closed) == (12, 17)
    assert not degree_inequality_holds(2, F(1, 2), 1, 11)
    assert all(degree_inequality_holds(2, F(1, 2), 1, d) for d in range(12, 18))
    assert rep.closed_form_sound
    assert rep.to_dict()["epsilon"] == "1/2"


def test_threshold_without_constant():
    rep = degree_threshold(2, F(1, 2), 0)
    assert rep.d0_scan == 9 and rep.d0_closed == 17
    # x = 4 is a perfect square: 4 + 2*2 = 8 is not < 8
    assert not degree_inequality_holds(2, F(1, 2), 0, 8)


def test_closed_form_value():
    assert closed_form_threshold(2, F(1, 2), 1) == 17
    assert closed_form_threshold(3, F(1, 2), 1) == 49
    assert closed_form_threshold(2, F(1, 4), 100) == 1601


def test_closed_form_undershoots_for_small_epsilon():
    # the per-term condition for j = 2 needs d > 4 / (eps^2 (1 - eps)), the
    # closed form only supplies 2 / (eps^2 (1 - eps))
    rep = degree_threshold(2, F(1, 4), 0)
    assert rep.d0_closed == 44
    assert not degree_inequality_holds(2, F(1, 4), 0, 44)
    assert rep.d0_scan == 49
    assert not rep.closed_form_sound
    assert not rep.tail_verified
    assert not closed_form_derivation_holds(2, F(1, 4), 0, 44)


def test_derivation_check_is_literal():
    assert not degree_threshold(2, F(1, 2), 1).tail_verified  # (17/8)^2 < 17/2
    assert closed_form_derivation_holds(2, F(1, 2), 1, 40)


@pytest.mark.parametrize(
    "n, eps, c, scan",
    [(3, F(1, 2), 0, 31), (3, F(1, 2), 1, 34), (4, F(1, 4), 0, 230), (2, F(1, 10), 1, 380)],
)
def test_threshold_is_least(n, eps, c, scan):
    rep = degree_threshold(n, eps, c)
    assert rep.d0_scan == scan
    assert degree_inequality_holds(n, eps, c, scan)
    assert not degree_inequality_holds(n, eps, c, scan - 1)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 4), EPSILONS, st.fractions(min_value=0, max_value=50), st.integers(1, 10**7))
def test_inequality_matches_oracle(n, eps, c, d):
    got = degree_inequality_holds(n, eps, c, d)
    assert got == separation_inequality_oracle(n, eps, F(c), d)
    # a true verdict survives a start at doubled precision
    assert degree_inequality_holds(n, eps, c, d, start_bits=64) == got


def test_inequality_eventually_holds():
    rng = random.Random(3)
    for n, eps, c in [(2, F(1, 3), 5), (3, F(1, 10), 0), (4, F(1, 2), 1)]:
        d0 = degree_threshold(n, eps, c).d0_scan
        for _ in range(50):
            d = int(math.exp(rng.uniform(math.log(d0), math.log(10**15))))
            assert degree_inequality_holds(n, eps, c, d)


def test_inequality_rejects_bad_input():
    with pytest.raises(ValueError):
        degree_inequality_holds(2, 1, 0, 10)
    with pytest.raises(ValueError):
        degree_inequality_holds(2, 0, 0, 10)
    with pytest.raises(ValueError):
        degree_inequality_holds(2, F(1, 2), -1, 10)
    with pytest.raises(PrecisionExhausted):
        # sqrt(135/4) lies in [11/2, 6] at one bit, which cannot settle 45 - 135/4 against 2*sqrt
        degree_inequality_holds(2, F(1, 4), 0, 45, start_bits=1, max_bits=1)
    assert not degree_inequality_holds(2, F(1, 4), 0, 45, start_bits=1)


def test_separation_pin():
    s = separation_count(2, 4, F(1, 4), 100, F(1, 10**6), 0)
    assert s.m == 300 and s.feasible
    assert s.total < 100
    assert gonality_lower_bound(2, 4, F(1, 4), 100, F(1, 10**6), 0) == 301


def test_schedule_entries_are_upper_bounds():
    s = separation_count(3, 7, F(1, 5), 500, F(1, 1000), 2)
    assert s.m == math.floor(F(4, 5) * 7 * 500)
    for j, a in enumerate(s.a, start=1):
        assert ((a - s.delta) / j) ** j >= F(s.m, 7)
    assert s.total == sum(s.a) + 2
    assert s.feasible == (s.total < s.d)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 4), st.integers(1, 30), EPSILONS, st.integers(1, 5000))
def test_schedule_feasible_when_inequality_holds(n, alpha, eps, d):
    delta, c = F(1, 10**6), F(1)
    s = separation_count(n, alpha, eps, d, delta, c)
    if degree_inequality_holds(n, eps, c + n * delta, d):
        assert s.feasible
    if s.feasible:
        assert s.total < d
        assert gonality_lower_bound(n, alpha, eps, d, delta, c) == s.m + 1
    else:
        assert gonality_lower_bound(n, alpha, eps, d, delta, c) == 0


def test_infeasible_schedule():
    s = separation_count(3, 90, F(1, 4), 100, F(1, 10**6), 0)
    assert not s.feasible
    assert gonality_lower_bound(3, 90, F(1, 4), 100, F(1, 10**6), 0) == 0


def test_gonality_for_complete_intersections():
    g = complete_intersection_gonality_bound(1, [100, 5], F(1, 4), F(1, 10**6), 0)
    assert (g.bound, g.alpha) == (301, 4)
    assert g.schedule.n == 2
    assert g.ratio == F(301, 500)
    assert complete_intersection_gonality_bound(2, [100, 10], F(1, 4), F(1, 10**6), 0).bound == 0
    assert complete_intersection_gonality_bound(2, [200, 10], F(1, 4), F(1, 10**6), 0).bound == 1201
    single = complete_intersection_gonality_bound(1, [50], F(1, 2), F(1, 10**6), 0)
    assert single.alpha == 1 and single.bound == 26
    with pytest.raises(HypothesisViolated):
        complete_intersection_gonality_bound(2, [100, 2], F(1, 4))
    with pytest.raises(ValueError):
        complete_intersection_gonality_bound(0, [100], F(1, 4))


def test_gonality_ratio_approaches_one_minus_eps():
    g = complete_intersection_gonality_bound(1, [10**6, 50], F(1, 10), F(1, 10**6), 1)
    assert g.bound > 0
    assert F(9, 10) * F(49, 50) - F(1, 1000) < g.ratio <= F(9, 10)
