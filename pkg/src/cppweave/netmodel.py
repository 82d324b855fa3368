"""Graph and path data model, topology file parsing, and disjoint path pairs.

Links are bidirectional spans: one link per unordered node pair, so
link-disjointness and span-disjointness coincide.
"""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

NodeId = str
LinkId = int


class TopologyError(ValueError):
    """Raised for malformed topology or demand documents."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        locus = []
        if line is not None:
            locus.append(f"line {line}")
        if field is not None:
            locus.append(f"field {field!r}")
        prefix = f"{', '.join(locus)}: " if locus else ""
        super().__init__(prefix + message)
        self.line = line
        self.field = field


class NoDisjointPair(Exception):
    """No pair of link-disjoint paths exists between two nodes."""

    def __init__(self, a: NodeId, b: NodeId, demand_id: int | None = None):
        who = f"demand {demand_id} " if demand_id is not None else ""
        super().__init__(f"{who}({a} <-> {b}): no two link-disjoint paths")
        self.a = a
        self.b = b
        self.demand_id = demand_id


@dataclass(frozen=True)
class Link:
    link_id: LinkId
    a: NodeId
    b: NodeId
    length: float

    @property
    def endpoints(self) -> frozenset[NodeId]:
        return frozenset((self.a, self.b))

    def other(self, node: NodeId) -> NodeId:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise KeyError(f"node {node} is not an endpoint of link {self.link_id}")


@dataclass(frozen=True)
class Demand:
    demand_id: int
    a: NodeId
    b: NodeId
    units: int = 1


class Topology:
    """Immutable undirected mesh with positive link lengths."""

    def __init__(self, nodes: Iterable[NodeId], links: Iterable[Link]):
        self._nodes = frozenset(nodes)
        by_id: dict[LinkId, Link] = {}
        by_pair: dict[frozenset[NodeId], LinkId] = {}
        for link in links:
            if link.link_id in by_id:
                raise TopologyError(f"duplicate link id {link.link_id}", field="link_id")
            if link.a == link.b:
                raise TopologyError(f"link {link.link_id} is a self-loop", field="endpoints")
            for n in (link.a, link.b):
                if n not in self._nodes:
                    raise TopologyError(f"link {link.link_id} references unknown node {n!r}", field="endpoints")
            if not link.length > 0:
                raise TopologyError(f"link {link.link_id} has non-positive length", field="length")
            if link.endpoints in by_pair:
                raise TopologyError(
                    f"links {by_pair[link.endpoints]} and {link.link_id} are parallel", field="endpoints"
                )
            by_id[link.link_id] = link
            by_pair[link.endpoints] = link.link_id
        self._links = dict(sorted(by_id.items()))
        self._by_pair = by_pair
        adj: dict[NodeId, list[tuple[LinkId, NodeId]]] = {n: [] for n in self._nodes}
        for link in self._links.values():
            adj[link.a].append((link.link_id, link.b))
            adj[link.b].append((link.link_id, link.a))
        self._adj = {n: tuple(sorted(v)) for n, v in adj.items()}

    @property
    def nodes(self) -> frozenset[NodeId]:
        return self._nodes

    @property
    def links(self) -> Mapping[LinkId, Link]:
        return self._links

    def link(self, link_id: LinkId) -> Link:
        return self._links[link_id]

    def length(self, link_id: LinkId) -> float:
        return self._links[link_id].length

    def link_between(self, a: NodeId, b: NodeId) -> LinkId | None:
        return self._by_pair.get(frozenset((a, b)))

    def neighbors(self, node: NodeId) -> tuple[tuple[LinkId, NodeId], ...]:
        """(link_id, neighbor) pairs sorted by link id."""
        return self._adj[node]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return self._nodes == other._nodes and self._links == other._links

    def __hash__(self) -> int:
        return hash((self._nodes, tuple(self._links.values())))

    def __repr__(self) -> str:
        return f"Topology({len(self._nodes)} nodes, {len(self._links)} links)"


@dataclass(frozen=True)
class Path:
    """A simple walk: ``nodes[k]`` and ``nodes[k + 1]`` are joined by ``links[k]``."""

    nodes: tuple[NodeId, ...]
    links: tuple[LinkId, ...]

    def __post_init__(self) -> None:
        if len(self.nodes) != len(self.links) + 1:
            raise ValueError("a path has exactly one more node than links")
        if len(set(self.links)) != len(self.links) or len(set(self.nodes)) != len(self.nodes):
            raise ValueError(f"path is not simple: {self.nodes}")

    @classmethod
    def from_nodes(cls, topology: Topology, nodes: Sequence[NodeId]) -> "Path":
        links = []
        for u, v in zip(nodes, nodes[1:]):
            lid = topology.link_between(u, v)
            if lid is None:
                raise ValueError(f"no link between {u} and {v}")
            links.append(lid)
        return cls(tuple(nodes), tuple(links))

    @property
    def source(self) -> NodeId:
        return self.nodes[0]

    @property
    def target(self) -> NodeId:
        return self.nodes[-1]

    @property
    def link_set(self) -> frozenset[LinkId]:
        return frozenset(self.links)

    def cost(self, topology: Topology, metric: str = "length") -> float:
        if metric == "hops":
            return float(len(self.links))
        return sum(topology.length(l) for l in self.links)

    def reversed(self) -> "Path":
        return Path(self.nodes[::-1], self.links[::-1])


@dataclass(frozen=True)
class PathPair:
    demand_id: int
    primary: Path
    protection: Path

    def __post_init__(self) -> None:
        ends_p = {self.primary.source, self.primary.target}
        ends_q = {self.protection.source, self.protection.target}
        if ends_p != ends_q:
            raise ValueError(f"demand {self.demand_id}: primary and protection have different end nodes")
        if not link_disjoint(self.primary, self.protection):
            raise ValueError(f"demand {self.demand_id}: primary and protection share a link")


def _link_ids(p: Path | Iterable[LinkId]) -> set[LinkId]:
    return set(p.links) if isinstance(p, Path) else set(p)


def link_disjoint(p: Path | Iterable[LinkId], q: Path | Iterable[LinkId]) -> bool:
    """True iff the two paths (or link-id collections) share no link."""
    return _link_ids(p).isdisjoint(_link_ids(q))


# ---------------------------------------------------------------- routing


def _weight(topology: Topology, link_id: LinkId, metric: str) -> float:
    if metric == "hops":
        return 1.0
    if metric == "length":
        return topology.length(link_id)
    raise ValueError(f"unknown metric {metric!r}")


def _dijkstra(
    nodes: Iterable[NodeId],
    arcs: Mapping[NodeId, list[tuple[NodeId, LinkId, float]]],
    source: NodeId,
) -> tuple[dict[NodeId, float], dict[NodeId, tuple[NodeId, LinkId]]]:
    dist = {n: float("inf") for n in nodes}
    pred: dict[NodeId, tuple[NodeId, LinkId]] = {}
    dist[source] = 0.0
    heap = [(0.0, source)]
    done: set[NodeId] = set()
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        for v, lid, w in arcs.get(u, ()):
            nd = d + w
            if nd < dist[v] - 1e-12:
                dist[v] = nd
                pred[v] = (u, lid)
                heapq.heappush(heap, (nd, v))
    return dist, pred


def disjoint_pair(topology: Topology, a: NodeId, b: NodeId, metric: str = "length") -> PathPair:
    """Minimum total cost pair of link-disjoint a-b paths (Suurballe).

    The cheaper path of the pair is returned as the primary. Raises
    :class:`NoDisjointPair` when a and b are not 2-link-connected.
    """
    if a == b:
        raise ValueError("end nodes must differ")
    for n in (a, b):
        if n not in topology.nodes:
            raise KeyError(n)

    arcs: dict[NodeId, list[tuple[NodeId, LinkId, float]]] = {n: [] for n in topology.nodes}
    for lid, link in topology.links.items():
        w = _weight(topology, lid, metric)
        arcs[link.a].append((link.b, lid, w))
        arcs[link.b].append((link.a, lid, w))

    dist, pred = _dijkstra(topology.nodes, arcs, a)
    if dist[b] == float("inf"):
        raise NoDisjointPair(a, b)

    # first shortest path as directed arcs (u, v, link)
    first: list[tuple[NodeId, NodeId, LinkId]] = []
    v = b
    while v != a:
        u, lid = pred[v]
        first.append((u, v, lid))
        v = u
    first.reverse()
    on_first = {(u, v): lid for u, v, lid in first}

    # residual graph with reduced costs: drop arcs of the first path in the
    # forward direction, reverse them at zero reduced cost
    residual: dict[NodeId, list[tuple[NodeId, LinkId, float]]] = {n: [] for n in topology.nodes}
    for u, out in arcs.items():
        if dist[u] == float("inf"):
            continue
        for v, lid, w in out:
            if dist[v] == float("inf"):
                continue
            if (u, v) in on_first and on_first[(u, v)] == lid:
                continue
            if (v, u) in on_first and on_first[(v, u)] == lid:
                residual[u].append((v, lid, 0.0))
                continue
            residual[u].append((v, lid, max(0.0, w + dist[u] - dist[v])))

    dist2, pred2 = _dijkstra(topology.nodes, residual, a)
    if dist2[b] == float("inf"):
        raise NoDisjointPair(a, b)
    second: list[tuple[NodeId, NodeId, LinkId]] = []
    v = b
    while v != a:
        u, lid = pred2[v]
        second.append((u, v, lid))
        v = u

    # cancel links traversed in opposite directions by the two paths
    flow: dict[LinkId, tuple[NodeId, NodeId]] = {lid: (u, v) for u, v, lid in first}
    for u, v, lid in second:
        if lid in flow and flow[lid] == (v, u):
            del flow[lid]
        else:
            flow[lid] = (u, v)

    out_arcs: dict[NodeId, list[tuple[LinkId, NodeId]]] = {}
    for lid, (u, v) in flow.items():
        out_arcs.setdefault(u, []).append((lid, v))
    for lst in out_arcs.values():
        lst.sort()

    paths = []
    for _ in range(2):
        nodes, links = [a], []
        cur = a
        while cur != b:
            lid, nxt = out_arcs[cur].pop(0)
            links.append(lid)
            nodes.append(nxt)
            cur = nxt
        paths.append(_loop_erase(nodes, links))

    paths.sort(key=lambda p: (p.cost(topology, metric), p.links))
    return PathPair(-1, paths[0], paths[1])


def _loop_erase(nodes: list[NodeId], links: list[LinkId]) -> Path:
    out_nodes = [nodes[0]]
    out_links: list[LinkId] = []
    for lid, n in zip(links, nodes[1:]):
        if n in out_nodes:
            k = out_nodes.index(n)
            del out_nodes[k + 1:]
            del out_links[k:]
        else:
            out_nodes.append(n)
            out_links.append(lid)
    return Path(tuple(out_nodes), tuple(out_links))


def loop_erase(nodes: Sequence[NodeId], links: Sequence[LinkId]) -> Path:
    """Chronological loop erasure of a walk, yielding a simple path."""
    return _loop_erase(list(nodes), list(links))


# ---------------------------------------------------------------- file formats


@dataclass
class NetworkDocument:
    nodes: list[NodeId] = field(default_factory=list)
    links: list[Link] = field(default_factory=list)
    demands: list[Demand] = field(default_factory=list)
    # source line of each record, keyed by ("link" | "demand", index)
    lines: dict[tuple[str, int], int] = field(default_factory=dict)


def _parse_number(tok: str, kind, line: int, name: str):
    try:
        return kind(tok)
    except ValueError:
        raise TopologyError(f"cannot parse {tok!r} as {kind.__name__}", line=line, field=name) from None


def _parse_text(text: str) -> NetworkDocument:
    doc = NetworkDocument()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        kw, args = parts[0], parts[1:]
        if kw == "node":
            if len(args) != 1:
                raise TopologyError("expected: node <name>", line=lineno)
            doc.nodes.append(args[0])
        elif kw == "link":
            if len(args) != 4:
                raise TopologyError("expected: link <id> <nodeA> <nodeB> <length>", line=lineno)
            doc.links.append(
                Link(
                    _parse_number(args[0], int, lineno, "id"),
                    args[1],
                    args[2],
                    _parse_number(args[3], float, lineno, "length"),
                )
            )
            doc.lines[("link", len(doc.links) - 1)] = lineno
        elif kw == "demand":
            if len(args) not in (3, 4):
                raise TopologyError("expected: demand <id> <nodeA> <nodeB> [units]", line=lineno)
            units = _parse_number(args[3], int, lineno, "units") if len(args) == 4 else 1
            doc.demands.append(Demand(_parse_number(args[0], int, lineno, "id"), args[1], args[2], units))
            doc.lines[("demand", len(doc.demands) - 1)] = lineno
        else:
            raise TopologyError(f"unknown keyword {kw!r}", line=lineno)
    return doc


def _parse_json(text: str) -> NetworkDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TopologyError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    doc = NetworkDocument()
    doc.nodes = [str(n) for n in data.get("nodes", [])]
    for k, rec in enumerate(data.get("links", [])):
        try:
            doc.links.append(Link(int(rec["id"]), str(rec["a"]), str(rec["b"]), float(rec["length"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"links[{k}]: {exc}", field="links") from None
    for k, rec in enumerate(data.get("demands", [])):
        try:
            doc.demands.append(Demand(int(rec["id"]), str(rec["a"]), str(rec["b"]), int(rec.get("units", 1))))
        except (KeyError, TypeError, ValueError) as exc:
            raise TopologyError(f"demands[{k}]: {exc}", field="demands") from None
    return doc


def parse_document(text: str, fmt: str = "text") -> NetworkDocument:
    """Parse a topology/demand document; ``fmt`` is ``"text"`` or ``"json"``."""
    if fmt == "json":
        return _parse_json(text)
    if fmt == "text":
        return _parse_text(text)
    raise ValueError(f"unknown format {fmt!r}")


def _topology_from_doc(doc: NetworkDocument) -> Topology:
    seen_nodes: set[NodeId] = set()
    for n in doc.nodes:
        if n in seen_nodes:
            raise TopologyError(f"duplicate node {n!r}", field="node")
        seen_nodes.add(n)
    seen: set[LinkId] = set()
    for k, link in enumerate(doc.links):
        line = doc.lines.get(("link", k))
        if link.link_id in seen:
            raise TopologyError(f"duplicate link id {link.link_id}", line=line, field="id")
        seen.add(link.link_id)
        for n, name in ((link.a, "nodeA"), (link.b, "nodeB")):
            if n not in seen_nodes:
                raise TopologyError(f"unknown node {n!r}", line=line, field=name)
        if link.a == link.b:
            raise TopologyError(f"self-loop at {link.a!r}", line=line, field="nodeB")
        if not link.length > 0:
            raise TopologyError(f"non-positive length {link.length}", line=line, field="length")
    try:
        return Topology(doc.nodes, doc.links)
    except TopologyError:
        raise
    except ValueError as exc:
        raise TopologyError(str(exc)) from None


def load_topology(text: str, fmt: str = "text") -> Topology:
    """Parse a topology document. Demand records, if present, are ignored."""
    return _topology_from_doc(parse_document(text, fmt))


def load_demands(text: str, topology: Topology, fmt: str = "text") -> list[Demand]:
    """Parse the demand records of a document and check them against ``topology``."""
    doc = parse_document(text, fmt)
    out: list[Demand] = []
    seen: set[int] = set()
    for k, d in enumerate(doc.demands):
        line = doc.lines.get(("demand", k))
        if d.demand_id in seen:
            raise TopologyError(f"duplicate demand id {d.demand_id}", line=line, field="id")
        seen.add(d.demand_id)
        if d.a == d.b:
            raise TopologyError(f"demand {d.demand_id} has identical end nodes", line=line, field="nodeB")
        for n, name in ((d.a, "nodeA"), (d.b, "nodeB")):
            if n not in topology.nodes:
                raise TopologyError(f"demand {d.demand_id}: unknown node {n!r}", line=line, field=name)
        if d.units < 1:
            raise TopologyError(f"demand {d.demand_id}: units must be positive", line=line, field="units")
        out.append(Demand(d.demand_id, d.a, d.b, d.units))
    return sorted(out, key=lambda d: d.demand_id)


def format_for(path: str) -> str:
    return "json" if str(path).lower().endswith(".json") else "text"


def _fmt_len(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


def serialize_topology(topology: Topology, demands: Sequence[Demand] = (), fmt: str = "text") -> str:
    """Inverse of :func:`load_topology` (and :func:`load_demands`)."""
    nodes = sorted(topology.nodes)
    if fmt == "json":
        data = {
            "nodes": nodes,
            "links": [
                {"id": l.link_id, "a": l.a, "b": l.b, "length": l.length} for l in topology.links.values()
            ],
            "demands": [{"id": d.demand_id, "a": d.a, "b": d.b, "units": d.units} for d in demands],
        }
        return json.dumps(data, indent=2, sort_keys=True) + "\n"
    lines = [f"node {n}" for n in nodes]
    lines += [f"link {l.link_id} {l.a} {l.b} {_fmt_len(l.length)}" for l in topology.links.values()]
    lines += [f"demand {d.demand_id} {d.a} {d.b} {d.units}" for d in demands]
    return "\n".join(lines) + "\n"


def build_topology(links: Iterable[tuple], nodes: Iterable[NodeId] = ()) -> Topology:
    """Convenience constructor from ``(id, a, b, length)`` tuples."""
    links = [Link(int(i), str(a), str(b), float(w)) for i, a, b, w in links]
    all_nodes = set(nodes)
    for l in links:
        all_nodes.update((l.a, l.b))
    return Topology(all_nodes, links)
