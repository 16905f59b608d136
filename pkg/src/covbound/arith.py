"""Exact integer number theory used by the bound engine.

Everything here works on Python ints, so there is no overflow anywhere:
degree products and admissible degrees routinely exceed 64 bits.
"""

from __future__ import annotations

import bisect
import math
import random
from dataclasses import dataclass

__all__ = [
    "CoinRepresentation",
    "Factorization",
    "FactoringBudgetExceeded",
    "NotRepresentable",
    "coin_represent",
    "factorize",
    "is_prime",
    "largest_prime_power_divisor",
    "next_prime_above",
    "primality",
    "small_primes",
]

TRIAL_DIVISION_LIMIT = 10**6
# factorize() only trial-divides this far; past it a primality test and rho are cheaper
FACTOR_TRIAL_LIMIT = 2**12
DEFAULT_RHO_BUDGET = 2_000_000

# Bases 2..41 make Miller-Rabin exact below 3.3e24, which covers 2^64.
_DETERMINISTIC_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
_DETERMINISTIC_LIMIT = 3_317_044_064_679_887_385_961_981
_PROBABLE_ROUNDS = 40
_PROBABLE_SEED = 0x5EED


class FactoringBudgetExceeded(ArithmeticError):
    """Pollard rho ran out of iterations; supply a pre-factored value instead."""

    def __init__(self, value: int, budget: int):
        super().__init__(f"could not split {value} within {budget} rho iterations")
        self.value = value
        self.budget = budget


class NotRepresentable(ValueError):
    pass


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]
    # True when some factor above 2^64 was only shown to be a probable prime.
    probable: bool = False

    def __post_init__(self):
        if self.value < 1:
            raise ValueError("factorization of a non-positive integer")
        if math.prod(p**e for p, e in self.factors) != self.value:
            raise ValueError(f"factors do not multiply to {self.value}")
        primes = [p for p, _ in self.factors]
        if primes != sorted(set(primes)) or any(e < 1 for _, e in self.factors):
            raise ValueError("factors must have increasing primes and positive exponents")

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    def to_dict(self) -> dict:
        return {"value": self.value, "factors": [list(f) for f in self.factors], "probable": self.probable}

    @classmethod
    def from_dict(cls, data: dict) -> Factorization:
        return cls(int(data["value"]), tuple((int(p), int(e)) for p, e in data["factors"]), bool(data.get("probable", False)))


@dataclass(frozen=True)
class CoinRepresentation:
    g: int
    g_prime: int
    target: int
    x: int
    y: int

    def __post_init__(self):
        if self.g * self.x + self.g_prime * self.y != self.target:
            raise ValueError("representation does not sum to target")
        if self.x < 0 or self.y < 0:
            raise ValueError("coefficients must be nonnegative")


_sieve_cache: list[int] = []


def small_primes(limit: int = TRIAL_DIVISION_LIMIT) -> list[int]:
    """Primes up to ``limit`` (sieved once at the trial-division limit and sliced)."""
    if not _sieve_cache:
        n = TRIAL_DIVISION_LIMIT
        sieve = bytearray([1]) * (n + 1)
        sieve[0] = sieve[1] = 0
        for i in range(2, math.isqrt(n) + 1):
            if sieve[i]:
                sieve[i * i :: i] = bytearray(len(range(i * i, n + 1, i)))
        _sieve_cache.extend(i for i, flag in enumerate(sieve) if flag)
    if limit >= TRIAL_DIVISION_LIMIT:
        return _sieve_cache
    return _sieve_cache[: bisect.bisect_right(_sieve_cache, limit)]


def _strong_probable_prime(m: int, a: int) -> bool:
    d, s = m - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    x = pow(a, d, m)
    if x == 1 or x == m - 1:
        return True
    for _ in range(s - 1):
        x = x * x % m
        if x == m - 1:
            return True
    return False


def primality(m: int) -> str:
    """Classify ``m`` as ``"prime"``, ``"probable prime"`` or ``"composite"``.

    The verdict is exact below 3.3e24 (in particular for all 64-bit values).
    Above that a fixed-seed randomized Miller-Rabin run is used and a pass is
    reported as ``"probable prime"``.
    """
    if m < 2:
        return "composite"
    for p in _DETERMINISTIC_BASES:
        if m % p == 0:
            return "prime" if m == p else "composite"
    if m < _DETERMINISTIC_LIMIT:
        ok = all(_strong_probable_prime(m, a) for a in _DETERMINISTIC_BASES)
        return "prime" if ok else "composite"
    rng = random.Random(_PROBABLE_SEED)
    for _ in range(_PROBABLE_ROUNDS):
        if not _strong_probable_prime(m, rng.randrange(2, m - 1)):
            return "composite"
    return "probable prime"


def is_prime(m: int) -> bool:
    if m < 1:
        raise ValueError("is_prime expects a positive integer")
    return primality(m) != "composite"


def _pollard_brent(m: int, budget: int, seed: int = 1) -> int | None:
    """Return a nontrivial factor of composite odd ``m`` or None if the budget runs out."""
    rng = random.Random(seed)
    spent = 0
    while spent < budget:
        y, c, block = rng.randrange(1, m), rng.randrange(1, m), 128
        g, r, q = 1, 1, 1
        x = ys = y
        while g == 1 and spent < budget:
            x = y
            for _ in range(r):
                y = (y * y + c) % m
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(block, r - k)):
                    y = (y * y + c) % m
                    q = q * abs(x - y) % m
                g = math.gcd(q, m)
                k += block
            spent += r
            r *= 2
        if g == m:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % m
                g = math.gcd(abs(x - ys), m)
        if 1 < g < m:
            return g
    return None


def factorize(m: int, budget: int = DEFAULT_RHO_BUDGET) -> Factorization:
    """Complete prime factorization of ``m``.

    Trial division by primes below ``FACTOR_TRIAL_LIMIT``, then Pollard-Brent
    splitting of the cofactor.  ``budget`` caps the rho iterations spent on each split; exceeding it raises
    :class:`FactoringBudgetExceeded`.
    """
    if m < 1:
        raise ValueError("factorize expects a positive integer")
    counts: dict[int, int] = {}
    rest = m
    for p in small_primes(FACTOR_TRIAL_LIMIT):
        if p * p > rest:
            break
        if rest % p == 0:
            e = 0
            while rest % p == 0:
                rest //= p
                e += 1
            counts[p] = e
    probable = False
    if rest > 1:
        stack = [rest]
        spent_budget = budget
        while stack:
            f = stack.pop()
            verdict = primality(f)
            if verdict != "composite":
                probable |= verdict == "probable prime"
                counts[f] = counts.get(f, 0) + 1
                continue
            root = math.isqrt(f)
            if root * root == f:
                stack.extend((root, root))
                continue
            d = _pollard_brent(f, spent_budget)
            if d is None:
                raise FactoringBudgetExceeded(m, budget)
            stack.extend((d, f // d))
    return Factorization(m, tuple(sorted(counts.items())), probable)


def largest_prime_power_divisor(m: int | Factorization) -> int:
    fac = m if isinstance(m, Factorization) else factorize(m)
    return max((p**e for p, e in fac.factors), default=1)


def coin_represent(g: int, g_prime: int, target: int) -> CoinRepresentation:
    """Write ``target = g*x + g_prime*y`` with ``x, y >= 0``, smallest ``y`` first.

    Always succeeds once ``target >= (g-1)(g_prime-1)``; below that it succeeds
    exactly when a representation exists.
    """
    if g < 1 or g_prime < 1 or target < 0:
        raise ValueError("coin_represent expects positive generators and a nonnegative target")
    if math.gcd(g, g_prime) != 1:
        raise ValueError(f"generators {g} and {g_prime} are not coprime")
    # y is pinned modulo g; the least residue gives the least y and hence the least x.
    y = target * pow(g_prime, -1, g) % g if g > 1 else 0
    if g_prime * y > target:
        raise NotRepresentable(f"{target} is not a nonnegative combination of {g} and {g_prime}")
    return CoinRepresentation(g, g_prime, target, (target - g_prime * y) // g, y)


def next_prime_above(x: int) -> int:
    if x < 1:
        raise ValueError("next_prime_above expects a positive integer")
    p = x + 1
    while not is_prime(p):
        p += 1
    assert p <= 2 * x, f"Bertrand bound violated above {x}"
    return p

