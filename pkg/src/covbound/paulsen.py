"""Divisibility-forcing admissible degrees and pairwise-coprime degree arrays.

A degree ``d`` is admissible for dimension ``n >= 3`` when it is coprime to
``n!`` and its largest prime-power divisor ``q`` satisfies

    (C(n,2) - 1) q^n + (n! - C(n,2)) q^(n-1) + (2^n + 1) n!  <=  d.

Such degrees force every curve on a very general hypersurface of degree ``d``
to have degree divisible by ``d``.  Products of runs of consecutive primes
above ``2^n`` become admissible once the run is long enough, which is how the
generators below are built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .arith import Factorization, NotRepresentable, coin_represent, factorize, is_prime, next_prime_above

__all__ = [
    "AdmissibilityReport",
    "CoprimeArrayCertificate",
    "DegreeTooSmall",
    "UnsupportedDimension",
    "admissibility_lhs",
    "build_coprime_array",
    "build_sn_element",
    "check_coprime_array",
    "coprime_sequence_in_sn",
    "is_admissible",
]


class UnsupportedDimension(ValueError):
    pass


class DegreeTooSmall(ValueError):
    def __init__(self, column: int, threshold: int):
        super().__init__(f"degree in column {column} is not representable; all degrees >= {threshold} are")
        self.column = column
        self.threshold = threshold


def admissibility_lhs(n: int, q: int) -> int:
    c2 = n * (n - 1) // 2
    fact = math.factorial(n)
    return (c2 - 1) * q**n + (fact - c2) * q ** (n - 1) + (2**n + 1) * fact


@dataclass(frozen=True)
class AdmissibilityReport:
    n: int
    d: int
    q: int
    lhs: int
    coprime_to_n_factorial: bool
    admissible: bool

    def __bool__(self) -> bool:
        return self.admissible


def is_admissible(n: int, d: int | Factorization) -> AdmissibilityReport:
    if n < 3:
        raise UnsupportedDimension(f"admissibility needs n >= 3, got {n}")
    fac = d if isinstance(d, Factorization) else factorize(d)
    q = max((p**e for p, e in fac.factors), default=1)
    lhs = admissibility_lhs(n, q)
    # n! has exactly the primes <= n, so coprimality is a statement about the smallest prime.
    coprime = all(p > n for p in fac.primes)
    return AdmissibilityReport(n, fac.value, q, lhs, coprime, coprime and lhs <= fac.value)


def build_sn_element(n: int, floor: int = 1, forbidden_primes=frozenset()) -> tuple[int, Factorization]:
    """Smallest-length product of consecutive primes above ``2^n`` that is admissible.

    Primes in ``forbidden_primes`` are skipped.  The run is extended one prime
    at a time until the product is admissible and at least ``floor``.
    """
    if n < 3:
        raise UnsupportedDimension(f"admissibility needs n >= 3, got {n}")
    forbidden = frozenset(forbidden_primes)
    p = 2**n
    run: list[int] = []
    d = 1
    while True:
        p = next_prime_above(p)
        if p in forbidden:
            continue
        run.append(p)
        d *= p
        # squarefree with increasing primes: q is the last prime of the run
        if d >= floor and admissibility_lhs(n, p) <= d:
            fac = Factorization(d, tuple((x, 1) for x in run))
            assert is_admissible(n, fac).admissible
            return d, fac


@lru_cache(maxsize=256)
def _coprime_sequence(n: int, count: int, floor: int) -> tuple[tuple[int, Factorization], ...]:
    out = []
    used: set[int] = set()
    for _ in range(count):
        d, fac = build_sn_element(n, floor, frozenset(used))
        used.update(fac.primes)
        out.append((d, fac))
    return tuple(out)


def coprime_sequence_in_sn(n: int, count: int, floor: int = 1) -> list[tuple[int, Factorization]]:
    if n < 3:
        raise UnsupportedDimension(f"admissibility needs n >= 3, got {n}")
    if count < 0:
        raise ValueError("count must be nonnegative")
    return list(_coprime_sequence(n, count, floor))


@dataclass(frozen=True)
class CoprimeArrayCertificate:
    """Array of admissible entries summing column-wise to the degrees.

    Columns are stored run-length encoded as ``((entry, multiplicity), ...)``
    because a column for a degree near the threshold holds millions of copies
    of the same two generators.
    """

    n: int
    k: int
    degrees: tuple[int, ...]
    columns: tuple[tuple[tuple[int, int], ...], ...]
    generators: tuple[tuple[int, int], ...]
    factorizations: tuple[Factorization, ...] = ()

    @property
    def r(self) -> int:
        return len(self.degrees)

    def entries(self, j: int):
        for value, mult in self.columns[j]:
            for _ in range(mult):
                yield value

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "r": self.r,
            "degrees": list(self.degrees),
            "columns": [[list(run) for run in col] for col in self.columns],
            "generators": [list(pair) for pair in self.generators],
            "factorizations": [f.to_dict() for f in self.factorizations],
        }

    @classmethod
    def from_dict(cls, data: dict) -> CoprimeArrayCertificate:
        return cls(
            n=int(data["n"]),
            k=int(data["k"]),
            degrees=tuple(int(d) for d in data["degrees"]),
            columns=tuple(tuple((int(v), int(m)) for v, m in col) for col in data["columns"]),
            generators=tuple((int(a), int(b)) for a, b in data["generators"]),
            factorizations=tuple(Factorization.from_dict(f) for f in data.get("factorizations", [])),
        )


def check_coprime_array(cert: CoprimeArrayCertificate) -> list[str]:
    """Re-verify every array invariant from scratch; returns the list of failures.

    Admissibility is re-derived here from the factorization and the explicit
    inequality rather than through :func:`is_admissible`.
    """
    problems = []
    if len(cert.columns) != len(cert.degrees):
        return [f"{len(cert.columns)} columns for {len(cert.degrees)} degrees"]
    known = {f.value: f for f in cert.factorizations}
    distinct: list[set[int]] = []
    for j, (col, d) in enumerate(zip(cert.columns, cert.degrees)):
        if not col:
            problems.append(f"column {j} is empty")
        if any(mult < 1 for _, mult in col):
            problems.append(f"column {j} has a non-positive multiplicity")
        total = sum(v * mult for v, mult in col)
        if total != d:
            problems.append(f"column {j} sums to {total}, expected {d}")
        distinct.append({v for v, _ in col})
    for j, values in enumerate(distinct):
        for v in values:
            if v < cert.k:
                problems.append(f"entry {v} in column {j} is below the floor {cert.k}")
            fac = known.get(v)
            if fac is None:
                fac = factorize(v)
            elif math.prod(p**e for p, e in fac.factors) != v or not all(is_prime(p) for p in fac.primes):
                problems.append(f"stored factorization of {v} is wrong")
                continue
            q = max(p**e for p, e in fac.factors) if fac.factors else 1
            c2 = cert.n * (cert.n - 1) // 2
            nf = math.factorial(cert.n)
            bound = (c2 - 1) * q**cert.n + (nf - c2) * q ** (cert.n - 1) + (2**cert.n + 1) * nf
            if cert.n < 3 or math.gcd(v, nf) != 1 or bound > v:
                problems.append(f"entry {v} in column {j} is not admissible for n={cert.n}")
    for j in range(len(distinct)):
        for jj in range(j + 1, len(distinct)):
            for a in distinct[j]:
                for b in distinct[jj]:
                    if math.gcd(a, b) != 1:
                        problems.append(f"entries {a} (column {j}) and {b} (column {jj}) share a factor")
    return problems


def build_coprime_array(n: int, k: int, degrees) -> CoprimeArrayCertificate:
    """Split each degree into admissible parts, coprime across columns.

    Column ``j`` uses the generator pair ``(g_j, g'_j)`` taken from a run of
    ``2r`` pairwise-coprime admissible values, each at least ``k``.
    Raises :class:`DegreeTooSmall` when a degree is not a nonnegative
    combination of its pair; every degree ``>= max_j (g_j-1)(g'_j-1)`` is.
    """
    degrees = tuple(int(d) for d in degrees)
    seq = coprime_sequence_in_sn(n, 2 * len(degrees), k)
    pairs = tuple((seq[2 * j][0], seq[2 * j + 1][0]) for j in range(len(degrees)))
    threshold = max(((g - 1) * (h - 1) for g, h in pairs), default=0)
    columns = []
    for j, (d, (g, h)) in enumerate(zip(degrees, pairs)):
        try:
            rep = coin_represent(g, h, d)
        except NotRepresentable:
            raise DegreeTooSmall(j, threshold) from None
        columns.append(tuple((v, m) for v, m in ((g, rep.x), (h, rep.y)) if m > 0))
    cert = CoprimeArrayCertificate(n, k, degrees, tuple(columns), pairs, tuple(fac for _, fac in seq))
    problems = check_coprime_array(cert)
    if problems:
        raise RuntimeError(f"constructed array failed its own check: {problems[0]}")
    return cert
