from __future__ import annotations

import dataclasses
import itertools
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covbound.covdeg import (
    CURVE_EXACT,
    EXACT_BY_ARRAY,
    FANO_FLOOR,
    SPLIT,
    BoundCertificate,
    BudgetExhausted,
    CoveringDegreeEngine,
    HypothesisViolated,
    MultiDegreeProblem,
    any_curve_lower_bound,
    best_certified_bound,
    certificate_from_dag,
    certificate_to_dag,
    compute_k,
    exact_covdeg,
    exactness_threshold,
    explicit_lower_bound,
    memo_from_nodes,
    memo_to_nodes,
    verify_certificate,
)
from covbound.paulsen import UnsupportedDimension

from oracles import cd_recursive

P = MultiDegreeProblem.of


def test_problem_is_canonical():
    p = P(2, [3, 5, 4])
    assert p.degrees == (5, 4, 3) and p.r == 3
    assert p == MultiDegreeProblem(2, 3, (4, 3, 5))
    assert p.key == "2|5,4,3"
    assert MultiDegreeProblem.from_key(p.key) == p
    assert MultiDegreeProblem.from_key("3|") == P(3, [])
    with pytest.raises(ValueError):
        MultiDegreeProblem(2, 2, (3,))
    with pytest.raises(ValueError):
        P(2, [0])


def test_pinned_quartic_surface():
    cert = best_certified_bound(P(2, [4]))
    assert cert.value == 3
    assert (cert.rule, cert.params) == (SPLIT, (3, 1))
    first, second, third = cert.children
    assert (first.value, second.value, third.value) == (2, 1, 3)
    assert third.problem == P(1, [3, 1]) and third.rule == CURVE_EXACT
    assert verify_certificate(cert)


@pytest.mark.parametrize(
    "n, degrees, value",
    [(1, [3, 4], 12), (2, [2], 1), (2, [3], 2), (2, [5, 5], 17), (3, [5], 3), (3, [6, 6], 18), (2, [], 1)],
)
def test_small_values(n, degrees, value):
    assert best_certified_bound(P(n, degrees)).value == value


def test_matches_recursive_oracle():
    engine = CoveringDegreeEngine()
    for n in (1, 2, 3, 4):
        for r in (1, 2, 3):
            top = 8 if r < 3 else 5
            for degrees in itertools.combinations_with_replacement(range(1, top + 1), r):
                cert = engine.bound(P(n, degrees))
                assert cert.value == cd_recursive(n, degrees), (n, degrees)


def test_fresh_and_shared_engines_agree():
    shared = CoveringDegreeEngine()
    for degrees in [(7, 5), (6, 6), (9,), (4, 4, 3)]:
        p = P(3, degrees)
        warm = shared.bound(p)
        cold = CoveringDegreeEngine().bound(p)
        assert certificate_to_dag(warm) == certificate_to_dag(cold)


def test_dimension_zero_rejected():
    with pytest.raises(HypothesisViolated):
        best_certified_bound(P(0, [3]))


def test_explicit_formulas():
    assert explicit_lower_bound(P(2, [5, 5])) == 16
    assert any_curve_lower_bound(P(2, [5, 5])) == 4
    with pytest.raises(HypothesisViolated):
        explicit_lower_bound(P(3, [2]))
    with pytest.raises(HypothesisViolated):
        any_curve_lower_bound(P(2, [3]))


def _tampered(cert: BoundCertificate, **changes) -> BoundCertificate:
    return dataclasses.replace(cert, **changes)


def test_verify_rejects_tampering():
    cert = best_certified_bound(P(2, [4]))
    assert not verify_certificate(_tampered(cert, value=4))
    assert not verify_certificate(_tampered(cert, value=13))  # above the product
    assert not verify_certificate(_tampered(cert, params=(2, 2)))
    assert not verify_certificate(_tampered(cert, rule="Magic"))
    bad_child = _tampered(cert.children[2], value=4)
    verdict = verify_certificate(_tampered(cert, children=(cert.children[0], cert.children[1], bad_child)))
    assert not verdict
    assert verdict.path == (2,)
    assert "1|3,1" in verdict.reason
    leaf_with_kids = BoundCertificate(P(1, [3]), 3, CURVE_EXACT, children=(cert,))
    assert not verify_certificate(leaf_with_kids)


def test_verify_rejects_wrong_split_children():
    cert = best_certified_bound(P(2, [5]))
    a, b, c = cert.children
    assert not verify_certificate(_tampered(cert, children=(b, a, c)))
    assert not verify_certificate(_tampered(cert, children=(a, b)))
    assert not verify_certificate(_tampered(cert, children=(c, b, a)))


def test_budget_exhaustion_is_sound_and_leaves_memo_alone():
    engine = CoveringDegreeEngine()
    p = P(3, [30, 30])
    with pytest.raises(BudgetExhausted) as info:
        engine.bound(p, budget=50)
    partial = info.value.certificate
    assert partial.value == 4
    assert verify_certificate(partial)
    assert engine.memo == {}
    full = engine.bound(p)
    assert full.value >= partial.value
    assert verify_certificate(full)


def test_dag_round_trip():
    cert = best_certified_bound(P(3, [7, 6]))
    dag = certificate_to_dag(cert)
    text = json.dumps(dag, sort_keys=True)
    again = certificate_from_dag(json.loads(text))
    assert certificate_to_dag(again) == dag
    assert again.value == cert.value
    assert verify_certificate(again)
    # shared subproblems are emitted once
    assert len(dag["nodes"]) == len(list(cert.nodes()))


def test_dag_rejects_garbage():
    dag = certificate_to_dag(best_certified_bound(P(2, [4])))
    dag["nodes"]["2|3"]["children"] = ["2|9"]
    with pytest.raises((KeyError, ValueError)):
        certificate_from_dag(dag)


def test_memo_round_trip_rechecks_nodes():
    engine = CoveringDegreeEngine()
    engine.bound(P(2, [6, 5]))
    nodes = memo_to_nodes(engine.memo)
    memo = memo_from_nodes(nodes)
    assert {p.key: c.value for p, c in memo.items()} == {p.key: c.value for p, c in engine.memo.items()}
    nodes["2|6,5"]["value"] += 1
    with pytest.raises(ValueError):
        memo_from_nodes(nodes)


def test_fano_floor_is_opt_in():
    strict = CoveringDegreeEngine().bound(P(2, [3]))
    assert strict.rule == SPLIT
    fano = CoveringDegreeEngine(assume_fano_floor=True).bound(P(2, [3]))
    assert fano.rule == FANO_FLOOR and fano.value == 2
    assert verify_certificate(fano, allow_fano=True)
    assert not verify_certificate(fano)
    with pytest.raises(ValueError):
        best_certified_bound(P(2, [3]), assume_fano_floor=True, engine=CoveringDegreeEngine())


def test_fano_engine_matches_oracle():
    engine = CoveringDegreeEngine(assume_fano_floor=True)
    for n in (2, 3):
        for degrees in itertools.combinations_with_replacement(range(1, 8), 2):
            assert engine.bound(P(n, degrees)).value == cd_recursive(n, degrees, True)


@pytest.mark.parametrize("n, r", [(2, 1), (3, 1), (3, 2), (4, 1), (5, 3), (10, 2)])
def test_compute_k_is_least(n, r):
    k = compute_k(n, r)
    assert k >= max(6, n)
    assert 2 * (k - n + 2) ** (r + 1) >= k ** (r + 1)
    if k > max(6, n):
        assert 2 * (k - 1 - n + 2) ** (r + 1) < (k - 1) ** (r + 1)


def test_exactness_threshold_dimension_3():
    th = exactness_threshold(3, 1)
    assert th.k == compute_k(3, 1) == 6
    assert th.generators == ((46189, 765049),)
    assert th.N == 46188 * 765048 == 35336037024
    with pytest.raises(UnsupportedDimension):
        exactness_threshold(2, 1)


def test_exact_at_threshold():
    N = exactness_threshold(3, 1).N
    p = P(3, [N])
    assert exact_covdeg(p) == N
    assert exact_covdeg(P(3, [N, 1])) == N
    assert exact_covdeg(P(3, [N - 1])) is None
    cert = best_certified_bound(p)
    assert cert.rule == EXACT_BY_ARRAY and cert.value == N
    assert verify_certificate(cert)
    dag = certificate_to_dag(cert)
    assert verify_certificate(certificate_from_dag(json.loads(json.dumps(dag))))


def test_exact_regimes_without_array():
    assert exact_covdeg(P(1, [3, 4])) == 12
    assert exact_covdeg(P(4, [1, 1])) == 1
    assert exact_covdeg(P(2, [50])) is None


def test_array_leaf_rejects_swapped_witness():
    N = exactness_threshold(3, 1).N
    cert = best_certified_bound(P(3, [N]))
    other = best_certified_bound(P(3, [N + 1]))
    assert not verify_certificate(dataclasses.replace(cert, witness=other.witness))
    assert not verify_certificate(dataclasses.replace(cert, witness=None))


problems = st.builds(
    lambda n, ds: P(n, ds),
    st.integers(1, 3),
    st.lists(st.integers(1, 9), min_size=1, max_size=2),
)


@settings(max_examples=150, deadline=None)
@given(problems)
def test_bound_properties(p):
    cert = best_certified_bound(p)
    assert 1 <= cert.value <= p.product
    assert verify_certificate(cert)
    assert cert.value == cd_recursive(p.n, p.degrees)
    if all(d >= p.n for d in p.degrees):
        assert explicit_lower_bound(p) <= cert.value


@settings(max_examples=60, deadline=None)
@given(problems, st.randoms(use_true_random=False))
def test_degree_order_is_irrelevant(p, rnd):
    degrees = list(p.degrees)
    rnd.shuffle(degrees)
    a = best_certified_bound(P(p.n, degrees))
    b = best_certified_bound(p)
    assert certificate_to_dag(a) == certificate_to_dag(b)
