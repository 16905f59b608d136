"""Certified lower bounds for the covering degree of complete intersections.

``cd(n; d_1, ..., d_r)`` denotes the covering degree of a general complete
intersection of dimension ``n`` and multidegree ``d``.  The engine maximizes
over the following derivation rules, memoized on the canonical problem:

* ``CurveExact``      n = 1: cd = d_1 ... d_r
* ``AmbientSpace``    r = 0: cd = 1
* ``DropOne``         a degree equal to 1 can be removed
* ``DropDim``         a degree equal to n can be removed (cd only goes down)
* ``Split(a, b)``     d = a + b: cd >= min(cd(..a..) + cd(..b..), cd(n-1; ..a, b..))
* ``ProductFloor``    cd >= 1
* ``FanoFloor``       sum d_i = n + r: cd >= 2 (opt-in)
* ``ExactByCoprimeArray``  n >= 3 and every degree past the exactness threshold

Every result is a :class:`BoundCertificate`, a DAG of rule applications that
:func:`verify_certificate` re-checks without touching the engine.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

from .arith import Factorization
from .paulsen import (
    CoprimeArrayCertificate,
    DegreeTooSmall,
    UnsupportedDimension,
    build_coprime_array,
    check_coprime_array,
    coprime_sequence_in_sn,
)

__all__ = [
    "BoundCertificate",
    "BudgetExhausted",
    "CoveringDegreeEngine",
    "ExactnessThreshold",
    "HypothesisViolated",
    "MultiDegreeProblem",
    "Verdict",
    "any_curve_lower_bound",
    "best_certified_bound",
    "certificate_from_dag",
    "certificate_to_dag",
    "memo_from_nodes",
    "memo_to_nodes",
    "compute_k",
    "exact_covdeg",
    "exactness_threshold",
    "explicit_lower_bound",
    "verify_certificate",
]

DEFAULT_BUDGET = 1_000_000

CURVE_EXACT = "CurveExact"
AMBIENT_SPACE = "AmbientSpace"
DROP_ONE = "DropOne"
DROP_DIM = "DropDim"
SPLIT = "Split"
PRODUCT_FLOOR = "ProductFloor"
FANO_FLOOR = "FanoFloor"
EXACT_BY_ARRAY = "ExactByCoprimeArray"
RULES = (CURVE_EXACT, AMBIENT_SPACE, DROP_ONE, DROP_DIM, SPLIT, PRODUCT_FLOOR, FANO_FLOOR, EXACT_BY_ARRAY)


class HypothesisViolated(ValueError):
    pass


@dataclass(frozen=True)
class MultiDegreeProblem:
    n: int
    r: int
    degrees: tuple[int, ...]

    def __post_init__(self):
        degrees = tuple(sorted((int(d) for d in self.degrees), reverse=True))
        if len(degrees) != self.r:
            raise ValueError(f"codimension {self.r} does not match {len(degrees)} degrees")
        if self.n < 0:
            raise ValueError("dimension must be nonnegative")
        if any(d < 1 for d in degrees):
            raise ValueError("degrees must be positive integers")
        object.__setattr__(self, "degrees", degrees)

    @classmethod
    def of(cls, n: int, degrees) -> MultiDegreeProblem:
        degrees = tuple(degrees)
        return cls(n, len(degrees), degrees)

    @property
    def product(self) -> int:
        return math.prod(self.degrees)

    @property
    def key(self) -> str:
        return f"{self.n}|{','.join(map(str, self.degrees))}"

    @classmethod
    def from_key(cls, key: str) -> MultiDegreeProblem:
        n, _, rest = key.partition("|")
        return cls.of(int(n), [int(d) for d in rest.split(",") if d])

    def without(self, d: int) -> MultiDegreeProblem:
        degrees = list(self.degrees)
        degrees.remove(d)
        return MultiDegreeProblem(self.n, self.r - 1, tuple(degrees))

    def replaced(self, d: int, *parts: int, n: int | None = None) -> MultiDegreeProblem:
        degrees = list(self.degrees)
        degrees.remove(d)
        degrees.extend(parts)
        return MultiDegreeProblem(self.n if n is None else n, len(degrees), tuple(degrees))

    def to_dict(self) -> dict:
        return {"n": self.n, "r": self.r, "degrees": list(self.degrees)}


@dataclass(frozen=True, eq=False)
class BoundCertificate:
    problem: MultiDegreeProblem
    value: int
    rule: str
    params: tuple[int, ...] = ()
    children: tuple[BoundCertificate, ...] = ()
    notes: str = ""
    witness: CoprimeArrayCertificate | None = field(default=None, repr=False)

    @cached_property
    def depth(self) -> int:
        return 1 + max(c.depth for c in self.children) if self.children else 0

    @property
    def label(self) -> str:
        return f"{self.rule}({','.join(map(str, self.params))})" if self.params else self.rule

    def nodes(self):
        """Distinct nodes of the DAG, root first, children in order."""
        seen: set[int] = set()
        stack = [self]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            yield node
            stack.extend(reversed(node.children))


class BudgetExhausted(RuntimeError):
    """The memo cap was hit; ``certificate`` is still a sound (weaker) bound."""

    def __init__(self, certificate: BoundCertificate, budget: int):
        super().__init__(f"memo budget of {budget} entries exhausted; partial bound {certificate.value}")
        self.certificate = certificate
        self.budget = budget


def explicit_lower_bound(p: MultiDegreeProblem) -> int:
    """Closed-form product bound prod(d_i - n + 1), valid when every d_i >= n >= 1."""
    if p.n < 1 or any(d < p.n for d in p.degrees):
        raise HypothesisViolated(f"explicit bound needs all degrees >= n = {p.n}")
    return math.prod(d - p.n + 1 for d in p.degrees)


def any_curve_lower_bound(p: MultiDegreeProblem) -> int:
    """Lower bound prod(d_i - 2n + 1) on the degree of every curve, for d_i >= 2n.

    This is the covering-degree product evaluated in dimension 2n: a general
    complete intersection of dimension n contains no curve below the covering
    degree of the 2n-dimensional one with the same degrees.
    """
    if p.n < 1 or any(d < 2 * p.n for d in p.degrees):
        raise HypothesisViolated(f"any-curve bound needs all degrees >= 2n = {2 * p.n}")
    return math.prod(d - 2 * p.n + 1 for d in p.degrees)


def _half_condition(n: int, r: int, k: int) -> bool:
    # 2 (k - n + 2)^(r+1) >= k^(r+1)
    return k >= n - 2 and 2 * (k - n + 2) ** (r + 1) >= k ** (r + 1)


def compute_k(n: int, r: int) -> int:
    """Least k >= max(6, n) with ((k - n + 2)/k)^(r+1) >= 1/2.

    Past this floor the dimension-dropping branch of every split is at least
    half the product of its degrees, which makes the bound superadditive.
    """
    if n < 2 or r < 1:
        raise ValueError("compute_k needs n >= 2 and r >= 1")
    lo = max(6, n)
    if _half_condition(n, r, lo):
        return lo
    hi = lo * 2
    while not _half_condition(n, r, hi):
        hi *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _half_condition(n, r, mid):
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(frozen=True)
class ExactnessThreshold:
    n: int
    r: int
    k: int
    N: int
    generators: tuple[tuple[int, int], ...]
    factorizations: tuple[Factorization, ...]


@lru_cache(maxsize=64)
def exactness_threshold(n: int, r: int) -> ExactnessThreshold:
    """Degree threshold past which the covering degree equals the product of degrees."""
    if n < 3:
        raise UnsupportedDimension(f"exactness threshold needs n >= 3, got {n}")
    if r < 1:
        return ExactnessThreshold(n, r, max(6, n), 1, (), ())
    k = compute_k(n, r)
    seq = coprime_sequence_in_sn(n, 2 * r, k)
    pairs = tuple((seq[2 * j][0], seq[2 * j + 1][0]) for j in range(r))
    N = max((g - 1) * (h - 1) for g, h in pairs)
    return ExactnessThreshold(n, r, k, N, pairs, tuple(fac for _, fac in seq))


def _exact_array(p: MultiDegreeProblem) -> CoprimeArrayCertificate | None:
    # every generator exceeds 2^n, so the threshold is at least 4^n
    if p.n < 3 or p.r < 1 or p.degrees[-1] < 4**p.n:
        return None
    th = exactness_threshold(p.n, p.r)
    if p.degrees[-1] < th.N:
        return None
    try:
        return build_coprime_array(p.n, th.k, p.degrees)
    except DegreeTooSmall:
        return None


def exact_covdeg(p: MultiDegreeProblem) -> int | None:
    """The covering degree when one of the exact regimes applies, else None."""
    degrees = [d for d in p.degrees if d != 1]
    q = MultiDegreeProblem.of(p.n, degrees)
    if q.r == 0 or q.n == 1:
        return q.product
    if _exact_array(q) is not None:
        return q.product
    return None


class CoveringDegreeEngine:
    """Memoizing search for the best bound derivable from the rule set.

    The memo persists across calls on the same engine; a call that runs out
    of budget leaves it untouched so later results never depend on it.
    """

    def __init__(self, assume_fano_floor: bool = False):
        self.assume_fano_floor = assume_fano_floor
        self.memo: dict[MultiDegreeProblem, BoundCertificate] = {}

    def _terminal(self, p: MultiDegreeProblem) -> BoundCertificate | None:
        if p.r == 0:
            return BoundCertificate(p, 1, AMBIENT_SPACE)
        if p.n == 1:
            return BoundCertificate(p, p.product, CURVE_EXACT)
        array = _exact_array(p)
        if array is not None:
            return BoundCertificate(p, p.product, EXACT_BY_ARRAY, witness=array, notes=f"k={array.k}")
        return None

    @staticmethod
    def _moves(p: MultiDegreeProblem):
        """Candidate rule applications in exploration order: (rule, params, children)."""
        if 1 in p.degrees:
            yield DROP_ONE, (1,), (p.without(1),)
        if p.n in p.degrees:
            yield DROP_DIM, (p.n,), (p.without(p.n),)
        for d in sorted(set(p.degrees), reverse=True):
            for b in range(1, d // 2 + 1):
                a = d - b
                yield SPLIT, (a, b), (p.replaced(d, a), p.replaced(d, b), p.replaced(d, a, b, n=p.n - 1))

    def _combine(self, p: MultiDegreeProblem, lookup) -> BoundCertificate:
        best = None  # (value, depth, cert-args)
        for rule, params, kids in self._moves(p):
            certs = tuple(lookup(c) for c in kids)
            if rule == SPLIT:
                value = min(certs[0].value + certs[1].value, certs[2].value)
            else:
                value = certs[0].value
            depth = 1 + max(c.depth for c in certs)
            if best is None or value > best[0] or (value == best[0] and depth < best[1]):
                best = (value, depth, (rule, params, certs))
        if self.assume_fano_floor and sum(p.degrees) == p.n + p.r:
            if best is None or 2 > best[0] or (2 == best[0] and 0 < best[1]):
                best = (2, 0, (FANO_FLOOR, (), ()))
        if best is None or 1 > best[0] or (1 == best[0] and 0 < best[1]):
            best = (1, 0, (PRODUCT_FLOOR, (), ()))
        value, _, (rule, params, certs) = best
        return BoundCertificate(p, value, rule, params, certs)

    def bound(self, p: MultiDegreeProblem, budget: int = DEFAULT_BUDGET) -> BoundCertificate:
        if p.n < 1:
            raise HypothesisViolated("dimension must be at least 1")
        memo = self.memo
        local: dict[MultiDegreeProblem, BoundCertificate] = {}

        def lookup(q):
            return memo.get(q) or local.get(q)

        def store(q, cert):
            assert cert.value <= q.product, f"soundness cap violated at {q.key}"
            local[q] = cert

        exhausted = False
        stack = [p]
        while stack:
            q = stack[-1]
            if lookup(q) is not None:
                stack.pop()
                continue
            leaf = self._terminal(q)
            if leaf is not None:
                store(q, leaf)
                stack.pop()
                continue
            missing = [c for _, _, kids in self._moves(q) for c in kids if lookup(c) is None]
            if missing and len(local) < budget:
                stack.extend(dict.fromkeys(missing))
                continue
            for c in missing:
                if lookup(c) is None:
                    exhausted = True
                    store(c, self._terminal(c) or BoundCertificate(c, 1, PRODUCT_FLOOR, notes="budget"))
            store(q, self._combine(q, lookup))
            stack.pop()
        cert = lookup(p)
        if exhausted:
            raise BudgetExhausted(cert, budget)
        memo.update(local)
        return cert


def best_certified_bound(
    p: MultiDegreeProblem,
    budget: int = DEFAULT_BUDGET,
    assume_fano_floor: bool = False,
    engine: CoveringDegreeEngine | None = None,
) -> BoundCertificate:
    if engine is None:
        engine = CoveringDegreeEngine(assume_fano_floor)
    elif engine.assume_fano_floor != assume_fano_floor:
        raise ValueError("engine was built with a different Fano-floor setting")
    return engine.bound(p, budget)


@dataclass(frozen=True)
class Verdict:
    ok: bool
    path: tuple[int, ...] = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _check_node(node: BoundCertificate, allow_fano: bool) -> str | None:
    p = node.problem
    degrees = list(p.degrees)
    kids = node.children
    product = math.prod(degrees)
    if node.value < 1:
        return "value must be positive"
    if node.value > product:
        return f"value {node.value} exceeds the product of degrees {product}"

    def child_matches(child, n, expected):
        return child.problem.n == n and sorted(child.problem.degrees) == sorted(expected)

    def minus(d):
        rest = list(degrees)
        rest.remove(d)
        return rest

    rule = node.rule
    if rule in (CURVE_EXACT, AMBIENT_SPACE, PRODUCT_FLOOR, FANO_FLOOR, EXACT_BY_ARRAY) and kids:
        return f"{rule} is a leaf rule"
    if rule == CURVE_EXACT:
        if p.n != 1 or node.value != product:
            return "CurveExact needs n = 1 and value = product"
    elif rule == AMBIENT_SPACE:
        if degrees or node.value != 1:
            return "AmbientSpace needs r = 0 and value 1"
    elif rule == PRODUCT_FLOOR:
        if node.value != 1:
            return "ProductFloor certifies only 1"
    elif rule == FANO_FLOOR:
        if not allow_fano:
            return "FanoFloor used but not allowed"
        if sum(degrees) != p.n + len(degrees) or node.value != 2:
            return "FanoFloor needs sum of degrees = n + r and value 2"
    elif rule in (DROP_ONE, DROP_DIM):
        target = 1 if rule == DROP_ONE else p.n
        if target not in degrees:
            return f"{rule} needs a degree equal to {target}"
        if len(kids) != 1 or not child_matches(kids[0], p.n, minus(target)):
            return f"{rule} child must drop exactly one degree {target}"
        if node.value != kids[0].value:
            return f"{rule} value must equal its child's"
    elif rule == SPLIT:
        if len(node.params) != 2 or min(node.params) < 1:
            return "Split needs two positive parts"
        a, b = node.params
        if a + b not in degrees:
            return f"no degree equals {a} + {b}"
        if p.n < 2 or len(kids) != 3:
            return "Split needs n >= 2 and three children"
        rest = minus(a + b)
        if not (
            child_matches(kids[0], p.n, rest + [a])
            and child_matches(kids[1], p.n, rest + [b])
            and child_matches(kids[2], p.n - 1, rest + [a, b])
        ):
            return "Split children do not match the split"
        if node.value != min(kids[0].value + kids[1].value, kids[2].value):
            return "Split value is not min(first + second, third)"
    elif rule == EXACT_BY_ARRAY:
        w = node.witness
        if w is None:
            return "ExactByCoprimeArray without an array"
        if p.n < 3 or w.n != p.n or sorted(w.degrees) != sorted(degrees):
            return "array does not match the problem"
        if w.k < max(6, p.n) or 2 * (w.k - p.n + 2) ** (len(degrees) + 1) < w.k ** (len(degrees) + 1):
            return f"entry floor {w.k} is too small for the superadditivity argument"
        problems = check_coprime_array(w)
        if problems:
            return f"array check failed: {problems[0]}"
        if node.value != product:
            return "ExactByCoprimeArray certifies exactly the product"
    else:
        return f"unknown rule {rule!r}"
    return None


def verify_certificate(cert: BoundCertificate, allow_fano: bool = False) -> Verdict:
    """Re-check every node's rule and arithmetic; report the first bad node's path."""
    seen: set[int] = set()
    stack: list[tuple[BoundCertificate, tuple[int, ...]]] = [(cert, ())]
    while stack:
        node, path = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        reason = _check_node(node, allow_fano)
        if reason is not None:
            return Verdict(False, path, f"{node.problem.key} [{node.label}]: {reason}")
        for i in reversed(range(len(node.children))):
            stack.append((node.children[i], path + (i,)))
    return Verdict(True)


def _node_entry(node: BoundCertificate) -> dict:
    entry = {
        "n": node.problem.n,
        "degrees": list(node.problem.degrees),
        "value": node.value,
        "rule": node.rule,
        "params": list(node.params),
        "children": [c.problem.key for c in node.children],
    }
    if node.notes:
        entry["notes"] = node.notes
    if node.witness is not None:
        entry["witness"] = node.witness.to_dict()
    return entry


def certificate_to_dag(cert: BoundCertificate) -> dict:
    """Flatten a certificate to ``{"root": key, "nodes": {key: node}}``.

    Nodes are keyed by their canonical problem; subtrees shared in memory are
    emitted once.
    """
    nodes = {}
    for node in cert.nodes():
        key = node.problem.key
        entry = _node_entry(node)
        if key in nodes and nodes[key] != entry:
            raise ValueError(f"two different certificates for {key}")
        nodes[key] = entry
    return {"root": cert.problem.key, "nodes": nodes}


def _build_nodes(nodes: dict, roots, built: dict[str, BoundCertificate]) -> None:
    for root in roots:
        stack = [root]
        on_stack = {root}
        while stack:
            key = stack[-1]
            if key in built:
                stack.pop()
                on_stack.discard(key)
                continue
            if key not in nodes:
                raise ValueError(f"certificate references missing node {key}")
            entry = nodes[key]
            pending = [c for c in entry["children"] if c not in built]
            if pending:
                if any(c in on_stack for c in pending):
                    raise ValueError(f"certificate has a cycle through {key}")
                stack.extend(pending)
                on_stack.update(pending)
                continue
            problem = MultiDegreeProblem.of(int(entry["n"]), entry["degrees"])
            if problem.key != key:
                raise ValueError(f"node {key} describes problem {problem.key}")
            witness = entry.get("witness")
            built[key] = BoundCertificate(
                problem=problem,
                value=int(entry["value"]),
                rule=str(entry["rule"]),
                params=tuple(int(x) for x in entry.get("params", [])),
                children=tuple(built[c] for c in entry["children"]),
                notes=str(entry.get("notes", "")),
                witness=CoprimeArrayCertificate.from_dict(witness) if witness else None,
            )
            stack.pop()
            on_stack.discard(key)


def certificate_from_dag(data: dict) -> BoundCertificate:
    built: dict[str, BoundCertificate] = {}
    _build_nodes(data["nodes"], [data["root"]], built)
    return built[data["root"]]


def memo_to_nodes(memo: dict[MultiDegreeProblem, BoundCertificate]) -> dict:
    return {p.key: _node_entry(c) for p, c in memo.items()}


def memo_from_nodes(nodes: dict, allow_fano: bool = False) -> dict[MultiDegreeProblem, BoundCertificate]:
    """Rebuild a memo table, re-checking every node; raises ValueError on any bad entry."""
    built: dict[str, BoundCertificate] = {}
    _build_nodes(nodes, sorted(nodes), built)
    memo = {}
    for cert in built.values():
        reason = _check_node(cert, allow_fano)
        if reason is not None:
            raise ValueError(f"{cert.problem.key}: {reason}")
        memo[cert.problem] = cert
    return memo
