from __future__ import annotations

import dataclasses
import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covbound.arith import factorize, is_prime, next_prime_above
from covbound.paulsen import (
    DegreeTooSmall,
    UnsupportedDimension,
    admissibility_lhs,
    build_coprime_array,
    build_sn_element,
    check_coprime_array,
    coprime_sequence_in_sn,
    is_admissible,
)

from oracles import admissible_by_definition


def test_5005_is_admissible_in_dimension_3():
    rep = is_admissible(3, 5005)
    assert rep.q == 13
    assert rep.lhs == 2 * 13**3 + 3 * 13**2 + 54 == 4955
    assert rep.coprime_to_n_factorial
    assert rep.admissible and bool(rep)


def test_not_coprime_to_factorial():
    rep = is_admissible(3, 10)
    assert not rep.coprime_to_n_factorial
    assert not rep


@pytest.mark.parametrize("p", [5, 7, 101, 46183, 999983])
def test_primes_are_never_admissible(p):
    assert not is_admissible(3, p)


def test_dimension_gate():
    with pytest.raises(UnsupportedDimension):
        is_admissible(2, 5005)
    with pytest.raises(UnsupportedDimension):
        build_sn_element(2)
    with pytest.raises(UnsupportedDimension):
        coprime_sequence_in_sn(2, 1)


@pytest.mark.parametrize("n", [3, 4, 5, 6])
def test_lhs_formula(n):
    c2 = math.comb(n, 2)
    for q in (1, 7, 13, 10**9 + 7):
        expected = (c2 - 1) * q**n + (math.factorial(n) - c2) * q ** (n - 1) + (2**n + 1) * math.factorial(n)
        assert admissibility_lhs(n, q) == expected


@settings(max_examples=300, deadline=None)
@given(st.integers(3, 5), st.integers(1, 3 * 10**6))
def test_admissibility_matches_definition(n, d):
    assert is_admissible(n, d).admissible == admissible_by_definition(n, d)


def test_admissibility_accepts_factorization():
    fac = factorize(5005)
    assert is_admissible(3, fac) == is_admissible(3, 5005)


def _scan(n, start_after, forbidden=frozenset(), floor=1):
    """Independent rerun of the run-length scan."""
    p, run = start_after, []
    while True:
        p += 1
        while not is_prime(p) or p in forbidden:
            p += 1
        run.append(p)
        d = math.prod(run)
        if d >= floor and admissible_by_definition(n, d):
            return d, run


def test_first_sn_element_in_dimension_3():
    d, fac = build_sn_element(3)
    assert d == 46189 == 11 * 13 * 17 * 19
    assert fac.primes == (11, 13, 17, 19)
    # the shorter run fails the inequality
    assert admissibility_lhs(3, 17) == 10747 > 11 * 13 * 17


def test_sn_element_with_forbidden_primes():
    d, fac = build_sn_element(3, 1, {11, 13, 17, 19})
    assert fac.primes[0] == 23
    assert (d, list(fac.primes)) == _scan(3, 8, frozenset({11, 13, 17, 19}))


@pytest.mark.parametrize("n", [3, 4, 5])
def test_sn_element_matches_independent_scan(n):
    d, fac = build_sn_element(n)
    assert (d, list(fac.primes)) == _scan(n, 2**n)
    assert fac.primes[0] == next_prime_above(2**n)


def test_sn_element_respects_floor():
    d, _ = build_sn_element(3, floor=10**6)
    assert d >= 10**6
    assert is_admissible(3, d)


def test_coprime_sequence():
    assert [d for d, _ in coprime_sequence_in_sn(3, 1, 1)] == [46189]
    assert coprime_sequence_in_sn(3, 0, 1) == []
    seq = [d for d, _ in coprime_sequence_in_sn(3, 6, 1000)]
    assert seq[0] == 46189
    for i, a in enumerate(seq):
        assert a >= 1000 and is_admissible(3, a)
        for b in seq[i + 1 :]:
            assert math.gcd(a, b) == 1


def test_admissibility_only_improves_with_small_new_prime():
    d = 46189  # q = 19
    before = is_admissible(3, d)
    for p in (5, 7):
        after = is_admissible(3, d * p)
        assert after.lhs == before.lhs
        assert after.d > before.d
        assert after.admissible


def test_array_for_twice_the_generator():
    cert = build_coprime_array(3, 1, [2 * 46189])
    assert list(cert.entries(0)) == [46189, 46189]
    assert check_coprime_array(cert) == []


def test_array_below_threshold():
    with pytest.raises(DegreeTooSmall) as info:
        build_coprime_array(3, 1, [100, 100])
    assert info.value.column == 0
    seq = [d for d, _ in coprime_sequence_in_sn(3, 4, 1)]
    assert info.value.threshold == max((seq[0] - 1) * (seq[1] - 1), (seq[2] - 1) * (seq[3] - 1))


def test_arrays_above_threshold_pass_checker():
    rng = random.Random(7)
    seq = [d for d, _ in coprime_sequence_in_sn(3, 4, 6)]
    threshold = max((seq[0] - 1) * (seq[1] - 1), (seq[2] - 1) * (seq[3] - 1))
    for _ in range(25):
        degrees = [threshold + rng.randrange(10**9) for _ in range(2)]
        cert = build_coprime_array(3, 6, degrees)
        assert check_coprime_array(cert) == []
        for j, d in enumerate(degrees):
            assert sum(v * mult for v, mult in cert.columns[j]) == d


def test_checker_catches_tampering():
    cert = build_coprime_array(3, 6, [10**14, 10**14 + 1])
    assert check_coprime_array(cert) == []
    bad_sum = dataclasses.replace(cert, degrees=(cert.degrees[0] + 1, cert.degrees[1]))
    assert any("sums to" in p for p in check_coprime_array(bad_sum))
    (v0, m0), *rest0 = cert.columns[0]
    shared = dataclasses.replace(cert, columns=(cert.columns[0], ((v0, m0),) + cert.columns[1][1:]))
    assert any("share a factor" in p for p in check_coprime_array(shared))
    prime_entry = dataclasses.replace(cert, columns=(((cert.degrees[0], 1),),) + cert.columns[1:], factorizations=())
    problems = check_coprime_array(prime_entry)
    assert problems  # 10^14 is even, so not admissible
    high_floor = dataclasses.replace(cert, k=10**30)
    assert any("below the floor" in p for p in check_coprime_array(high_floor))


def test_array_round_trip():
    cert = build_coprime_array(3, 6, [10**14, 10**14 + 1])
    again = type(cert).from_dict(cert.to_dict())
    assert again == cert
