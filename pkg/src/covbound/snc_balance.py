"""Integer constraints on stable maps into a simple normal crossings degeneration.

A :class:`LabeledDualGraph` is the dual graph of the limit curve decorated
with

* ``n``            the order of the degeneration,
* ``delta(e)``     a positive integer per edge (node),
* ``n_i(v)``       the sinking speed of vertex ``v`` into component ``i``,
* ``m_i(v, e)``    the vanishing order at the flag ``(v, e)``.

Constraint families checked here, by code name:

``support``     ``n_i(v) = 0`` exactly when ``v`` does not map into component ``i``
``total-speed`` ``sum_i n_i(v) = n``
``edge-jump``   across a non-loop edge ``n_i(v') = n_i(v) + m_i(v, e) delta(e)``
``flag-sum``    ``sum_i m_i(v, e) = 0`` at every flag
``delta``       ``delta(e) >= 1``
``regular``     at a regular flag, ``m_i(v, e) >= 0`` whenever ``n_i(v) = 0``

Loops are exempt from ``edge-jump``; the verdict records that the exemption
was used.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field, replace

__all__ = [
    "Edge",
    "LabeledDualGraph",
    "LabelingVerdict",
    "MalformedGraph",
    "MatchingInstance",
    "MatchingResult",
    "NeitherCase",
    "Vertex",
    "boundary_flags",
    "breaking_case",
    "check_labeling",
    "classify_kinds",
    "compositions",
    "enumerate_labelings",
    "matching_admissibility",
    "matching_instances",
    "multiplicity_matching",
]

KINDS = ("ghost", "Z", "X1", "X2")
# loop orders are not pinned by the edge equation; they are enumerated in [-n, n]
Flag = tuple[str, int]


class MalformedGraph(ValueError):
    pass


class NeitherCase(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    name: str
    maps_into: frozenset[int]
    kind: str | None = None


@dataclass(frozen=True)
class Edge:
    name: str
    ends: tuple[str, str]
    delta: int | None = None

    @property
    def is_loop(self) -> bool:
        return self.ends[0] == self.ends[1]


def _default_kind(components: tuple[int, ...], maps_into: frozenset[int]) -> str | None:
    if len(components) != 2:
        return None
    c1, c2 = components
    if maps_into == {c1}:
        return "X1"
    if maps_into == {c2}:
        return "X2"
    if maps_into == {c1, c2}:
        return "Z"
    return None


@dataclass(frozen=True, eq=True)
class LabeledDualGraph:
    components: tuple[int, ...]
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    n: int | None = None
    # vertex name -> speeds aligned with ``components``
    speeds: Mapping[str, tuple[int, ...]] = field(default_factory=dict)
    # (edge name, side) -> orders aligned with ``components``; side 0 is ends[0]
    orders: Mapping[Flag, tuple[int, ...]] = field(default_factory=dict)
    regular_flags: frozenset[Flag] = frozenset()

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps or len(set(comps)) != len(comps):
            raise MalformedGraph("components must be a nonempty list of distinct indices")
        object.__setattr__(self, "components", comps)
        names = [v.name for v in self.vertices]
        if len(set(names)) != len(names):
            raise MalformedGraph("duplicate vertex names")
        vertices = []
        for v in self.vertices:
            into = frozenset(v.maps_into)
            if not into or not into <= set(comps):
                raise MalformedGraph(f"vertex {v.name} maps into {sorted(into)}, not a nonempty subset of {list(comps)}")
            kind = v.kind if v.kind is not None else _default_kind(comps, into)
            if kind is not None and kind not in KINDS:
                raise MalformedGraph(f"vertex {v.name} has unknown kind {kind!r}")
            vertices.append(Vertex(v.name, into, kind))
        object.__setattr__(self, "vertices", tuple(vertices))
        edge_names = [e.name for e in self.edges]
        if len(set(edge_names)) != len(edge_names):
            raise MalformedGraph("duplicate edge names")
        for e in self.edges:
            if any(end not in names for end in e.ends):
                raise MalformedGraph(f"edge {e.name} has an unknown endpoint")
        for flag in self.regular_flags:
            if flag[0] not in edge_names or flag[1] not in (0, 1):
                raise MalformedGraph(f"regular flag {flag} does not name an edge side")
        object.__setattr__(self, "speeds", {k: tuple(v) for k, v in self.speeds.items()})
        object.__setattr__(self, "orders", {(k[0], int(k[1])): tuple(v) for k, v in self.orders.items()})
        object.__setattr__(self, "regular_flags", frozenset((f[0], int(f[1])) for f in self.regular_flags))

    def __hash__(self):
        return hash((self.components, self.vertices, self.edges, self.n, self.label_key()))

    def vertex(self, name: str) -> Vertex:
        for v in self.vertices:
            if v.name == name:
                return v
        raise KeyError(name)

    def edge(self, name: str) -> Edge:
        for e in self.edges:
            if e.name == name:
                return e
        raise KeyError(name)

    def flags(self):
        for e in self.edges:
            yield (e.name, 0), e.ends[0]
            yield (e.name, 1), e.ends[1]

    def skeleton(self) -> LabeledDualGraph:
        """The same graph with every label stripped."""
        return LabeledDualGraph(
            self.components,
            self.vertices,
            tuple(Edge(e.name, e.ends) for e in self.edges),
            regular_flags=self.regular_flags,
        )

    def label_key(self) -> tuple:
        """Canonical ordering key: speeds in vertex order, then per edge (delta, orders)."""
        return (
            tuple(self.speeds.get(v.name, ()) for v in self.vertices),
            tuple(
                (e.delta or 0, self.orders.get((e.name, 0), ()), self.orders.get((e.name, 1), ()))
                for e in self.edges
            ),
        )


@dataclass(frozen=True)
class LabelingVerdict:
    ok: bool
    condition: str | None = None
    where: str = ""
    message: str = ""
    loop_exempt: bool = False

    def __bool__(self) -> bool:
        return self.ok


def _require_labels(g: LabeledDualGraph) -> None:
    r = len(g.components)
    if g.n is None or g.n < 1:
        raise MalformedGraph("the degeneration order n must be a positive integer")
    for v in g.vertices:
        s = g.speeds.get(v.name)
        if s is None or len(s) != r:
            raise MalformedGraph(f"vertex {v.name} needs {r} speeds")
    for e in g.edges:
        if e.delta is None:
            raise MalformedGraph(f"edge {e.name} has no delta")
        for side in (0, 1):
            m = g.orders.get((e.name, side))
            if m is None or len(m) != r:
                raise MalformedGraph(f"flag ({e.name}, {side}) needs {r} orders")


def check_labeling(g: LabeledDualGraph) -> LabelingVerdict:
    """First violated constraint, or ok.  Raises :class:`MalformedGraph` for missing labels."""
    _require_labels(g)
    comps = g.components
    loops = any(e.is_loop for e in g.edges)

    def fail(condition, where, message):
        return LabelingVerdict(False, condition, where, message, loops)

    for e in g.edges:
        if e.delta < 1:
            return fail("delta", e.name, f"delta({e.name}) = {e.delta} is not positive")
    for v in g.vertices:
        total = sum(g.speeds[v.name])
        if total != g.n:
            return fail("total-speed", v.name, f"speeds at {v.name} sum to {total}, expected n = {g.n}")
    for v in g.vertices:
        s = g.speeds[v.name]
        for i, si in zip(comps, s):
            if si < 0:
                return fail("support", v.name, f"n_{i}({v.name}) = {si} is negative")
            if (si == 0) == (i in v.maps_into):
                state = "maps" if i in v.maps_into else "does not map"
                return fail("support", v.name, f"n_{i}({v.name}) = {si} but {v.name} {state} into component {i}")
    for e in g.edges:
        if e.is_loop:
            continue
        v, w = e.ends
        for side, (a, b) in enumerate(((v, w), (w, v))):
            m = g.orders[(e.name, side)]
            for idx, i in enumerate(comps):
                if g.speeds[b][idx] != g.speeds[a][idx] + m[idx] * e.delta:
                    return fail(
                        "edge-jump",
                        f"{e.name}:{side}",
                        f"n_{i}({b}) = {g.speeds[b][idx]} but n_{i}({a}) + m_{i}({a},{e.name}) delta = "
                        f"{g.speeds[a][idx]} + {m[idx]}*{e.delta}",
                    )
    for flag, v in g.flags():
        m = g.orders[flag]
        if sum(m) != 0:
            return fail("flag-sum", f"{flag[0]}:{flag[1]}", f"orders at flag ({v},{flag[0]}) sum to {sum(m)}, not 0")
    for flag, v in g.flags():
        if flag not in g.regular_flags:
            continue
        for idx, i in enumerate(comps):
            if g.speeds[v][idx] == 0 and g.orders[flag][idx] < 0:
                return fail(
                    "regular",
                    f"{flag[0]}:{flag[1]}",
                    f"regular flag ({v},{flag[0]}) has m_{i} = {g.orders[flag][idx]} < 0 with n_{i}({v}) = 0",
                )
    return LabelingVerdict(True, loop_exempt=loops)


def compositions(total: int, parts: int):
    """Positive compositions of ``total`` into ``parts`` parts, lexicographically."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in compositions(total - first, parts - 1):
            yield (first,) + rest


def _zero_sum_vectors(length: int, bound: int):
    for head in itertools.product(range(-bound, bound + 1), repeat=length - 1):
        last = -sum(head)
        if -bound <= last <= bound:
            yield head + (last,)


def _vertex_speed_options(g: LabeledDualGraph, v: Vertex, n: int) -> list[tuple[int, ...]]:
    slots = [i for i in g.components if i in v.maps_into]
    out = []
    for comp in compositions(n, len(slots)):
        values = dict(zip(slots, comp))
        out.append(tuple(values.get(i, 0) for i in g.components))
    return out


def _edge_options(g: LabeledDualGraph, e: Edge, speeds: Mapping[str, tuple[int, ...]], n: int, delta_max: int):
    """(delta, m side 0, m side 1) choices for one edge, in canonical order."""
    a, b = speeds[e.ends[0]], speeds[e.ends[1]]
    if not e.is_loop:
        diff = tuple(y - x for x, y in zip(a, b))
        out = []
        for delta in range(1, delta_max + 1):
            if all(x % delta == 0 for x in diff):
                m = tuple(x // delta for x in diff)
                out.append((delta, m, tuple(-x for x in m)))
        # nonloop flags satisfy the regularity filter automatically:
        # n_i(v) = 0 forces m_i(v,e) delta = n_i(w) >= 0
        return out
    per_side = []
    for side in (0, 1):
        opts = list(_zero_sum_vectors(len(g.components), n))
        if (e.name, side) in g.regular_flags:
            opts = [m for m in opts if all(mi >= 0 or ai > 0 for mi, ai in zip(m, a))]
        per_side.append(opts)
    return [(delta, m0, m1) for delta in range(1, delta_max + 1) for m0 in per_side[0] for m1 in per_side[1]]


def enumerate_labelings(skeleton: LabeledDualGraph, n: int, delta_max: int) -> list[LabeledDualGraph]:
    """Every labeling of ``skeleton`` with order ``n`` and ``delta(e) <= delta_max``.

    Speeds are positive compositions of ``n`` over the components each vertex
    maps into.  On a non-loop edge the orders follow from the speeds and
    ``delta``; loop orders are enumerated in ``[-n, n]`` with zero sum.
    Output is sorted by :meth:`LabeledDualGraph.label_key`.
    """
    if n < 1 or delta_max < 1:
        raise ValueError("need n >= 1 and delta_max >= 1")
    base = skeleton.skeleton()
    vertex_opts = [_vertex_speed_options(base, v, n) for v in base.vertices]
    out = []
    for choice in itertools.product(*vertex_opts):
        speeds = {v.name: s for v, s in zip(base.vertices, choice)}
        edge_opts = [_edge_options(base, e, speeds, n, delta_max) for e in base.edges]
        for labels in itertools.product(*edge_opts):
            edges = tuple(Edge(e.name, e.ends, delta) for e, (delta, _, _) in zip(base.edges, labels))
            orders = {}
            for e, (_, m0, m1) in zip(base.edges, labels):
                orders[(e.name, 0)] = m0
                orders[(e.name, 1)] = m1
            g = replace(base, edges=edges, n=n, speeds=speeds, orders=orders)
            assert check_labeling(g), "enumerator produced an invalid labeling"
            out.append(g)
    return out


@dataclass(frozen=True)
class MatchingInstance:
    """A contracted configuration in a two-component degeneration.

    ``F`` lists vertices contracted into the double locus.  Alternatively
    ``node_edge`` names a single edge joining an ``X1`` vertex to an ``X2``
    vertex, standing for a zero-dimensional ``F``.
    """

    graph: LabeledDualGraph
    F: frozenset[str] = frozenset()
    node_edge: str | None = None


@dataclass(frozen=True)
class MatchingResult:
    lhs: int
    rhs: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs

    def __iter__(self):
        return iter((self.lhs, self.rhs, self.equal))


def boundary_flags(g: LabeledDualGraph, F: Iterable[str]):
    """Flags ``(e, side)`` at vertices outside ``F`` on edges that touch ``F``."""
    F = frozenset(F)
    for e in g.edges:
        inside = [end in F for end in e.ends]
        if inside[0] != inside[1]:
            side = 0 if not inside[0] else 1
            yield (e.name, side), e.ends[side]


def _kind(g: LabeledDualGraph, name: str) -> str | None:
    return g.vertex(name).kind


def matching_admissibility(inst: MatchingInstance) -> list[str]:
    """Reasons ``inst`` is not an admissible contracted configuration (empty when it is).

    Besides the structural requirements, every vertex of ``F`` must be
    balanced: ``sum_e m_1(u, e) = 0`` over its non-loop flags.  This is the
    degree-zero condition of a contracted component, and it is what the
    matching identity actually rests on.
    """
    g = inst.graph
    if len(g.components) != 2:
        return ["matching needs exactly two components"]
    problems = []
    if inst.node_edge is not None:
        e = g.edge(inst.node_edge)
        kinds = {_kind(g, end) for end in e.ends}
        if e.is_loop or kinds != {"X1", "X2"}:
            problems.append(f"node edge {e.name} must join an X1 vertex to an X2 vertex")
        if inst.F:
            problems.append("give either F or a node edge, not both")
        return problems
    c1, c2 = g.components
    for u in sorted(inst.F):
        if g.vertex(u).maps_into != {c1, c2}:
            problems.append(f"{u} does not map into both components")
    for _, v in boundary_flags(g, inst.F):
        if _kind(g, v) not in ("X1", "X2"):
            problems.append(f"boundary vertex {v} is not of kind X1 or X2")
    if inst.F and not _connected(g, inst.F):
        problems.append("F is not connected")
    for u in sorted(inst.F):
        total = 0
        for flag, v in g.flags():
            if v == u and not g.edge(flag[0]).is_loop:
                if flag not in g.orders:
                    problems.append(f"flag ({u},{flag[0]}) has no orders")
                    total = None
                    break
                total += g.orders[flag][0]
        if total:
            problems.append(f"contracted vertex {u} is unbalanced: m_{c1} sums to {total}")
    return problems


def _connected(g: LabeledDualGraph, F: frozenset[str]) -> bool:
    start = min(F)
    seen = {start}
    frontier = [start]
    while frontier:
        u = frontier.pop()
        for e in g.edges:
            if u in e.ends:
                for w in e.ends:
                    if w in F and w not in seen:
                        seen.add(w)
                        frontier.append(w)
    return seen == set(F)


def multiplicity_matching(inst: MatchingInstance) -> MatchingResult:
    """Total contact order on each side of a contracted configuration.

    ``lhs`` sums ``m_2`` over boundary flags at ``X1`` vertices, ``rhs`` sums
    ``m_1`` over boundary flags at ``X2`` vertices.
    """
    g = inst.graph
    _require_labels(g)
    if len(g.components) != 2:
        raise MalformedGraph("matching needs exactly two components")
    if inst.node_edge is not None:
        e = g.edge(inst.node_edge)
        lhs = rhs = 0
        for side, end in enumerate(e.ends):
            kind = _kind(g, end)
            if kind == "X1":
                lhs += g.orders[(e.name, side)][1]
            elif kind == "X2":
                rhs += g.orders[(e.name, side)][0]
        return MatchingResult(lhs, rhs)
    lhs = rhs = 0
    for flag, v in boundary_flags(g, inst.F):
        kind = _kind(g, v)
        if kind == "X1":
            lhs += g.orders[flag][1]
        elif kind == "X2":
            rhs += g.orders[flag][0]
        else:
            raise MalformedGraph(f"boundary vertex {v} is of kind {kind}, expected X1 or X2")
    return MatchingResult(lhs, rhs)


def classify_kinds(kinds: Iterable[str]) -> str:
    kinds = set(kinds)
    if "Z" in kinds:
        return "A"
    if {"X1", "X2"} <= kinds:
        return "B"
    raise NeitherCase(f"incident kinds {sorted(kinds)} fit neither case")


def breaking_case(g: LabeledDualGraph, incident: Iterable[str]) -> str:
    """``A`` if a Z-type vertex passes through the marked point, ``B`` if both X1 and X2 do."""
    if len(g.components) != 2:
        raise MalformedGraph("breaking cases need exactly two components")
    return classify_kinds(_kind(g, v) for v in incident)


def matching_instances(g: LabeledDualGraph) -> list[MatchingInstance]:
    """The contracted configurations a labeling naturally carries.

    One instance per connected component of the vertices mapping into both
    components, plus one per edge joining an X1 vertex directly to an X2
    vertex.  Only meaningful with two components.
    """
    if len(g.components) != 2:
        return []
    both = frozenset(v.name for v in g.vertices if len(v.maps_into) == 2)
    out = []
    seen: set[str] = set()
    for v in g.vertices:
        if v.name not in both or v.name in seen:
            continue
        comp = {v.name}
        frontier = [v.name]
        while frontier:
            u = frontier.pop()
            for e in g.edges:
                if u in e.ends:
                    for w in e.ends:
                        if w in both and w not in comp:
                            comp.add(w)
                            frontier.append(w)
        seen |= comp
        out.append(MatchingInstance(g, frozenset(comp)))
    for e in g.edges:
        if {_kind(g, end) for end in e.ends} == {"X1", "X2"}:
            out.append(MatchingInstance(g, node_edge=e.name))
    return out
