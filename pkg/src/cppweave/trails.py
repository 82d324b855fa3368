"""Decomposition of a cycle-free coding topology into linear 1+N coding trails.

A truck trail is grown edge-to-edge across each tree component. End nodes on
the trail, or hanging off it on a private path, become single entities.
Subtrees holding several end nodes become branch points, each of which
spawns a branch trail whose origin is the complement of the branch point's
expression. Branching recurses until every end node is placed singly.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .cycles import CodingGraph, ProtectionTree, Vertex
from .netmodel import LinkId, NodeId, Topology
from .parity import S, T

REAL = "real-on-trail"
DIRECT = "direct-attached"
BRANCH = "branch-point"


class MalformedTree(ValueError):
    pass


@dataclass(frozen=True, order=True)
class EndRef:
    """Reference to one end node; ``complemented`` marks a view through a branch point."""

    demand_id: int
    side: str
    complemented: bool = False

    def complement(self) -> "EndRef":
        return EndRef(self.demand_id, T if self.side == S else S, not self.complemented)

    @property
    def term(self) -> tuple[int, str]:
        return self.demand_id, self.side

    def __str__(self) -> str:
        return f"{self.side}{chr(39) if self.complemented else ''}{self.demand_id}"


class EndExpr(tuple):
    """XOR-merge of end-node references; both ends of one demand cancel."""

    def __new__(cls, refs: Iterable[EndRef] = ()):
        refs = list(refs)
        by_demand: dict[int, list[EndRef]] = {}
        for r in refs:
            by_demand.setdefault(r.demand_id, []).append(r)
        kept = []
        for d, rs in by_demand.items():
            sides = {r.side for r in rs}
            if sides == {S, T}:
                continue
            kept.append(rs[0])
        return super().__new__(cls, sorted(kept))

    @staticmethod
    def cancelled(refs: Iterable[EndRef]) -> tuple[int, ...]:
        by_demand: dict[int, set[str]] = {}
        for r in refs:
            by_demand.setdefault(r.demand_id, set()).add(r.side)
        return tuple(sorted(d for d, s in by_demand.items() if s == {S, T}))

    @property
    def terms(self) -> frozenset[tuple[int, str]]:
        return frozenset(r.term for r in self)

    def __str__(self) -> str:
        return " + ".join(str(r) for r in sorted(self, key=lambda r: (r.demand_id, r.side))) or "0"


def complement(expr: Iterable[EndRef]) -> EndExpr:
    """Swap S and T on every reference and toggle its complemented flag."""
    return EndExpr(r.complement() for r in expr)


@dataclass(frozen=True)
class TrailEntity:
    kind: str
    node: NodeId
    position: int
    represents: EndExpr
    via: tuple[LinkId, ...] = ()
    omitted: tuple[int, ...] = ()
    origin: bool = False

    @property
    def label(self) -> str:
        return str(self.represents)


@dataclass(frozen=True)
class Trail:
    trail_id: int
    level: int
    vertices: tuple[Vertex, ...]
    links: tuple[LinkId, ...]
    entities: tuple[TrailEntity, ...]
    parent: tuple[int, NodeId] | None = None
    origin_complement: EndExpr | None = None

    @property
    def nodes(self) -> tuple[NodeId, ...]:
        return tuple(v[0] for v in self.vertices)

    def all_links(self) -> frozenset[LinkId]:
        out = set(self.links)
        for e in self.entities:
            if e.kind == DIRECT:
                out.update(e.via)
        return frozenset(out)

    def single_refs(self) -> list[EndRef]:
        return [r for e in self.entities if e.kind in (REAL, DIRECT) for r in e.represents]


@dataclass(frozen=True)
class TrailHierarchy:
    group_id: int
    trails: tuple[Trail, ...]
    placement: Mapping[tuple[int, str], int] = field(default_factory=dict)

    def trail(self, trail_id: int) -> Trail:
        for t in self.trails:
            if t.trail_id == trail_id:
                return t
        raise KeyError(trail_id)

    @property
    def trucks(self) -> list[Trail]:
        return [t for t in self.trails if t.level == 0]

    def children(self, trail_id: int) -> list[Trail]:
        return [t for t in self.trails if t.parent is not None and t.parent[0] == trail_id]

    def to_dict(self) -> dict:
        return {
            "group": self.group_id,
            "trails": [
                {
                    "trail": t.trail_id,
                    "level": t.level,
                    "nodes": list(t.nodes),
                    "links": list(t.links),
                    "parent": list(t.parent) if t.parent else None,
                    "origin_complement": str(t.origin_complement) if t.origin_complement is not None else None,
                    "entities": [
                        {
                            "kind": e.kind,
                            "node": e.node,
                            "position": e.position,
                            "label": e.label,
                            "via": list(e.via),
                            "omitted": list(e.omitted),
                            "origin": e.origin,
                        }
                        for e in t.entities
                    ],
                }
                for t in self.trails
            ],
            "placement": {f"{s}{d}": tid for (d, s), tid in sorted(self.placement.items())},
        }


class _Builder:
    def __init__(self, tree: ProtectionTree, topology: Topology, seed: int):
        self.tree = tree
        self.topology = topology
        self.seed = seed
        self.rng = random.Random(seed)
        self.cg = CodingGraph(topology, tree.routes, tree.separation_points)
        if not self.cg.is_forest():
            raise MalformedTree(f"group {tree.group_id}: coding topology has a cycle")
        self.ends_at: dict[Vertex, list[EndRef]] = {}
        for d, r in sorted(tree.routes.items()):
            if not r.links:
                raise MalformedTree(f"demand {d} has an empty protection route")
            vs, vt = self.cg.end_vertices(d)
            self.ends_at.setdefault(vs, []).append(EndRef(d, S))
            self.ends_at.setdefault(vt, []).append(EndRef(d, T))
        self.trails: list[Trail] = []

    # -- choices

    def _pick(self, options: Sequence[tuple[LinkId, Vertex]]) -> tuple[LinkId, Vertex]:
        options = sorted(options)
        if self.seed == 0:
            return max(options, key=lambda o: (self.topology.length(o[0]), -o[0]))
        return self.rng.choice(options)

    def _extend(self, start: Vertex, came_by: LinkId) -> tuple[list[Vertex], list[LinkId]]:
        verts, links = [], []
        v, prev = start, came_by
        while True:
            options = [(l, w) for l, w in self.cg.adj[v] if l != prev]
            if not options:
                return verts, links
            l, w = self._pick(options)
            links.append(l)
            verts.append(w)
            v, prev = w, l

    # -- subtree queries

    def _subtree(self, root: Vertex, via: LinkId) -> tuple[list[EndRef], list[LinkId]]:
        """End refs and links on the far side of ``via`` seen from ``root``."""
        start = self.cg.other(via, root)
        refs, links = [], [via]
        stack = [(start, via)]
        while stack:
            v, prev = stack.pop()
            refs.extend(self.ends_at.get(v, []))
            for l, w in self.cg.adj[v]:
                if l != prev:
                    links.append(l)
                    stack.append((w, l))
        return sorted(refs), links

    def _path_links(self, root: Vertex, via: LinkId) -> tuple[LinkId, ...]:
        out = [via]
        v, prev = self.cg.other(via, root), via
        while True:
            nxt = [(l, w) for l, w in self.cg.adj[v] if l != prev]
            if not nxt:
                return tuple(out)
            if len(nxt) > 1:
                raise MalformedTree("direct attachment is not a path")
            prev, v = nxt[0]
            out.append(prev)

    # -- construction

    def build(self) -> TrailHierarchy:
        seen: set[LinkId] = set()
        for l0 in self.cg.links:
            if l0 in seen:
                continue
            comp = self._component(l0)
            seen |= comp
            if self.seed == 0:
                first = max(sorted(comp), key=lambda l: (self.topology.length(l), -l))
            else:
                first = self.rng.choice(sorted(comp))
            a, b = self.cg.ends[first]
            back_v, back_l = self._extend(a, first)
            fwd_v, fwd_l = self._extend(b, first)
            verts = back_v[::-1] + [a, b] + fwd_v
            links = back_l[::-1] + [first] + fwd_l
            self._make_trail(0, verts, links, parent=None, origin=None)
        placement: dict[tuple[int, str], int] = {}
        for t in self.trails:
            for r in t.single_refs():
                if r.term in placement:
                    raise MalformedTree(f"end node {r} placed twice")
                placement[r.term] = t.trail_id
        return TrailHierarchy(self.tree.group_id, tuple(self.trails), dict(sorted(placement.items())))

    def _component(self, l0: LinkId) -> set[LinkId]:
        a, _ = self.cg.ends[l0]
        out, stack, seen = set(), [a], {a}
        while stack:
            v = stack.pop()
            for l, w in self.cg.adj[v]:
                out.add(l)
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return out

    def _make_trail(
        self,
        level: int,
        verts: list[Vertex],
        links: list[LinkId],
        parent: tuple[int, NodeId] | None,
        origin: EndExpr | None,
    ) -> None:
        trail_id = len(self.trails)
        self.trails.append(None)  # reserve the id
        on_trail = set(links)
        entities: list[TrailEntity] = []
        branches: list[tuple[Vertex, LinkId, EndExpr]] = []
        if origin is not None:
            entities.append(TrailEntity(BRANCH, verts[0][0], 0, origin, (links[0],), origin=True))
        for pos, v in enumerate(verts):
            if origin is not None and pos == 0:
                continue
            for r in self.ends_at.get(v, []):
                entities.append(TrailEntity(REAL, v[0], pos, EndExpr([r])))
            for h, _w in self.cg.adj[v]:
                if h in on_trail:
                    continue
                refs, sub_links = self._subtree(v, h)
                if len(refs) == 1:
                    entities.append(TrailEntity(DIRECT, v[0], pos, EndExpr(refs), self._path_links(v, h)))
                elif len(refs) >= 2:
                    label = EndExpr(refs)
                    entities.append(
                        TrailEntity(BRANCH, v[0], pos, label, (h,), omitted=EndExpr.cancelled(refs))
                    )
                    branches.append((v, h, label))
                else:
                    raise MalformedTree(f"links {sorted(sub_links)} carry no end node")
        self.trails[trail_id] = Trail(
            trail_id, level, tuple(verts), tuple(links), tuple(entities), parent, origin
        )
        for v, h, label in branches:
            w = self.cg.other(h, v)
            more_v, more_l = self._extend(w, h)
            self._make_trail(
                level + 1,
                [v, w] + more_v,
                [h] + more_l,
                parent=(trail_id, v[0]),
                origin=complement(label),
            )


def build_trails(tree: ProtectionTree, topology: Topology, seed: int = 0) -> TrailHierarchy:
    """Turn a group's cycle-free coding topology into a hierarchy of coding trails.

    With ``seed == 0`` every free choice takes the longest link (lowest id on
    ties); any other seed draws the choices from a seeded generator.
    """
    return _Builder(tree, topology, seed).build()


def merge_adjacent(trail: Trail, keep: Iterable[tuple[int, str]] | None = None) -> Trail:
    """Fuse maximal runs of co-located entities whose individual signals are not needed.

    Entities at one trail node sit on zero-length links next to each other,
    so a run of them acts as one end node. ``keep`` lists the end nodes that
    must stay individually visible; by default these are the trail's singly
    placed end nodes, so only merged (branch-point) entities are fused. The
    origin entity is never fused.
    """
    keep = {r.term for r in trail.single_refs()} if keep is None else set(keep)
    out: list[TrailEntity] = []
    run: list[TrailEntity] = []

    def flush() -> None:
        if len(run) == 1:
            out.append(run[0])
        elif run:
            refs = [r for e in run for r in e.represents]
            omitted = tuple(sorted(set().union(*(e.omitted for e in run)) | set(EndExpr.cancelled(refs))))
            out.append(
                TrailEntity(
                    BRANCH,
                    run[0].node,
                    run[0].position,
                    EndExpr(refs),
                    tuple(l for e in run for l in e.via),
                    omitted,
                )
            )
        run.clear()

    for e in trail.entities:
        if e.origin or any(r.term in keep for r in e.represents):
            flush()
            out.append(e)
        else:
            if run and run[-1].position != e.position:
                flush()
            run.append(e)
    flush()
    return replace(trail, entities=tuple(out))
