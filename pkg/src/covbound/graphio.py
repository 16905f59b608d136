"""Reading and writing labeled dual graphs.

Text format, one directive per line (``#`` starts a comment)::

    components 1 2
    order 2
    vertex v 1            # name, components it maps into, optional kind
    vertex w 2
    vertex u 1,2 ghost
    edge e v w 1          # name, endpoints, optional delta
    speed v 2 0           # one speed per component
    orders e 0 -2 2       # edge, side (0 = first endpoint), one order per component
    regular e 0

Every directive except ``components`` is optional, so the same format
describes bare skeletons.  The JSON form carries the same fields.
"""

from __future__ import annotations

import json

from .snc_balance import Edge, LabeledDualGraph, MalformedGraph, Vertex

__all__ = ["GraphFormatError", "dumps_json", "dumps_text", "graph_from_dict", "graph_to_dict", "load_graph", "loads_json", "loads_text"]


class GraphFormatError(ValueError):
    pass


def _ints(tokens, lineno):
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise GraphFormatError(f"line {lineno}: expected integers, got {' '.join(tokens)}") from None


def loads_text(text: str) -> LabeledDualGraph:
    components = None
    n = None
    vertices: list[Vertex] = []
    edges: list[Edge] = []
    speeds = {}
    orders = {}
    regular = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, *rest = line.split()
        if word == "components":
            components = tuple(_ints(rest, lineno))
        elif word == "order":
            if len(rest) != 1:
                raise GraphFormatError(f"line {lineno}: order takes one integer")
            n = _ints(rest, lineno)[0]
        elif word == "vertex":
            if len(rest) not in (2, 3):
                raise GraphFormatError(f"line {lineno}: vertex NAME COMPONENTS [KIND]")
            into = frozenset(_ints(rest[1].split(","), lineno))
            vertices.append(Vertex(rest[0], into, rest[2] if len(rest) == 3 else None))
        elif word == "edge":
            if len(rest) not in (3, 4):
                raise GraphFormatError(f"line {lineno}: edge NAME V W [DELTA]")
            delta = _ints(rest[3:], lineno)[0] if len(rest) == 4 else None
            edges.append(Edge(rest[0], (rest[1], rest[2]), delta))
        elif word == "speed":
            if len(rest) < 2:
                raise GraphFormatError(f"line {lineno}: speed VERTEX VALUES...")
            speeds[rest[0]] = tuple(_ints(rest[1:], lineno))
        elif word == "orders":
            if len(rest) < 3:
                raise GraphFormatError(f"line {lineno}: orders EDGE SIDE VALUES...")
            side, *values = _ints(rest[1:], lineno)
            orders[(rest[0], side)] = tuple(values)
        elif word == "regular":
            if len(rest) != 2:
                raise GraphFormatError(f"line {lineno}: regular EDGE SIDE")
            regular.add((rest[0], _ints(rest[1:], lineno)[0]))
        else:
            raise GraphFormatError(f"line {lineno}: unknown directive {word!r}")
    if components is None:
        raise GraphFormatError("missing 'components' line")
    try:
        return LabeledDualGraph(components, tuple(vertices), tuple(edges), n, speeds, orders, frozenset(regular))
    except MalformedGraph as exc:
        raise GraphFormatError(str(exc)) from None


def dumps_text(g: LabeledDualGraph) -> str:
    lines = ["components " + " ".join(map(str, g.components))]
    if g.n is not None:
        lines.append(f"order {g.n}")
    for v in g.vertices:
        into = ",".join(str(i) for i in sorted(v.maps_into))
        lines.append(f"vertex {v.name} {into}" + (f" {v.kind}" if v.kind else ""))
    for e in g.edges:
        lines.append(f"edge {e.name} {e.ends[0]} {e.ends[1]}" + (f" {e.delta}" if e.delta is not None else ""))
    for v in g.vertices:
        if v.name in g.speeds:
            lines.append(f"speed {v.name} " + " ".join(map(str, g.speeds[v.name])))
    for e in g.edges:
        for side in (0, 1):
            if (e.name, side) in g.orders:
                lines.append(f"orders {e.name} {side} " + " ".join(map(str, g.orders[(e.name, side)])))
    for e in g.edges:
        for side in (0, 1):
            if (e.name, side) in g.regular_flags:
                lines.append(f"regular {e.name} {side}")
    return "\n".join(lines) + "\n"


def graph_to_dict(g: LabeledDualGraph) -> dict:
    return {
        "components": list(g.components),
        "n": g.n,
        "vertices": [{"name": v.name, "maps_into": sorted(v.maps_into), "kind": v.kind} for v in g.vertices],
        "edges": [{"name": e.name, "ends": list(e.ends), "delta": e.delta} for e in g.edges],
        "speeds": {v.name: list(g.speeds[v.name]) for v in g.vertices if v.name in g.speeds},
        "orders": [
            {"edge": e.name, "side": side, "m": list(g.orders[(e.name, side)])}
            for e in g.edges
            for side in (0, 1)
            if (e.name, side) in g.orders
        ],
        "regular_flags": [[e.name, side] for e in g.edges for side in (0, 1) if (e.name, side) in g.regular_flags],
    }


def graph_from_dict(data: dict) -> LabeledDualGraph:
    try:
        return LabeledDualGraph(
            components=tuple(int(i) for i in data["components"]),
            vertices=tuple(Vertex(str(v["name"]), frozenset(int(i) for i in v["maps_into"]), v.get("kind")) for v in data.get("vertices", [])),
            edges=tuple(
                Edge(str(e["name"]), (str(e["ends"][0]), str(e["ends"][1])), None if e.get("delta") is None else int(e["delta"]))
                for e in data.get("edges", [])
            ),
            n=None if data.get("n") is None else int(data["n"]),
            speeds={str(k): tuple(int(x) for x in v) for k, v in data.get("speeds", {}).items()},
            orders={(str(o["edge"]), int(o["side"])): tuple(int(x) for x in o["m"]) for o in data.get("orders", [])},
            regular_flags=frozenset((str(f[0]), int(f[1])) for f in data.get("regular_flags", [])),
        )
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise GraphFormatError(f"bad graph document: {exc}") from None


def dumps_json(g: LabeledDualGraph) -> str:
    return json.dumps(graph_to_dict(g), sort_keys=True, indent=2) + "\n"


def loads_json(text: str) -> LabeledDualGraph:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise GraphFormatError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise GraphFormatError("graph document must be a JSON object")
    return graph_from_dict(data)


def load_graph(path: str) -> LabeledDualGraph:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    if path.endswith(".json") or text.lstrip().startswith("{"):
        return loads_json(text)
    return loads_text(text)
