"""Cycle detection and elimination on a coding group's protection topology.

The coding topology of a group is the union of its members' protection
routes. A node declared a *separation point* is split into one coding vertex
per class of incident links that some route joins through it; everywhere
else a physical node is a single coding vertex.
"""

from __future__ import annotations

import dataclasses
import heapq
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .netmodel import LinkId, NodeId, Path, PathPair, Topology, loop_erase
from .parity import SymbolExpr

STRICT = "strict"
RELAXED = "relaxed"

Vertex = tuple[NodeId, int]


@dataclass(frozen=True)
class Removal:
    link_id: LinkId
    saving: float


@dataclass(frozen=True)
class ProtectionTree:
    """Cycle-free coding topology of one group plus the elimination log."""

    group_id: int
    mode: str
    routes: Mapping[int, Path]
    width: int = 1
    removed_links: tuple[Removal, ...] = ()
    reroutes: Mapping[int, Path] = field(default_factory=dict)
    apsed: frozenset[int] = frozenset()
    separation_points: frozenset[NodeId] = frozenset()
    log: tuple[str, ...] = ()

    @property
    def members(self) -> frozenset[int]:
        return frozenset(self.routes)

    @property
    def tree_links(self) -> frozenset[LinkId]:
        return frozenset(itertools.chain.from_iterable(r.links for r in self.routes.values()))

    def cost(self, topology: Topology) -> float:
        return self.width * sum(topology.length(l) for l in self.tree_links)

    def savings(self) -> float:
        return sum(r.saving for r in self.removed_links)

    def link_symbols(self) -> dict[LinkId, SymbolExpr]:
        """No-failure signal on each tree link: XOR of the parities routed over it."""
        out: dict[LinkId, SymbolExpr] = {}
        for d, r in sorted(self.routes.items()):
            for l in r.links:
                out[l] = out.get(l, SymbolExpr()) ^ SymbolExpr.parity(d)
        return out

    def to_dict(self) -> dict:
        return {
            "group": self.group_id,
            "mode": self.mode,
            "tree_links": sorted(self.tree_links),
            "routes": {str(d): list(r.nodes) for d, r in sorted(self.routes.items())},
            "removed_links": [{"link": r.link_id, "saving": r.saving} for r in self.removed_links],
            "reroutes": {str(d): list(r.nodes) for d, r in sorted(self.reroutes.items())},
            "apsed": sorted(self.apsed),
            "separation_points": sorted(self.separation_points),
            "log": list(self.log),
        }


# ---------------------------------------------------------------- coding graph


class CodingGraph:
    """Links of a route set over coding vertices."""

    def __init__(self, topology: Topology, routes: Mapping[int, Path], splits: Iterable[NodeId] = ()):
        self.topology = topology
        self.routes = routes
        links = sorted(set(itertools.chain.from_iterable(r.links for r in routes.values())))
        self.links = links
        splits = set(splits)

        incident: dict[NodeId, list[LinkId]] = {}
        for l in links:
            link = topology.link(l)
            incident.setdefault(link.a, []).append(l)
            incident.setdefault(link.b, []).append(l)

        self._vertex: dict[tuple[NodeId, LinkId], Vertex] = {}
        for node, inc in incident.items():
            if node in splits:
                classes = link_classes(node, inc, routes.values())
            else:
                classes = [sorted(inc)]
            for k, cls in enumerate(classes):
                for l in cls:
                    self._vertex[(node, l)] = (node, k)

        self.ends: dict[LinkId, tuple[Vertex, Vertex]] = {}
        self.adj: dict[Vertex, list[tuple[LinkId, Vertex]]] = {}
        for l in links:
            link = topology.link(l)
            va, vb = self._vertex[(link.a, l)], self._vertex[(link.b, l)]
            self.ends[l] = (va, vb)
            self.adj.setdefault(va, []).append((l, vb))
            self.adj.setdefault(vb, []).append((l, va))
        for lst in self.adj.values():
            lst.sort()

    def vertex(self, node: NodeId, link_id: LinkId) -> Vertex:
        return self._vertex[(node, link_id)]

    def end_vertices(self, demand_id: int) -> tuple[Vertex, Vertex]:
        r = self.routes[demand_id]
        return self.vertex(r.source, r.links[0]), self.vertex(r.target, r.links[-1])

    @property
    def vertices(self) -> list[Vertex]:
        return sorted(self.adj)

    def cyclomatic(self) -> int:
        seen: set[Vertex] = set()
        comps = 0
        for v in self.adj:
            if v in seen:
                continue
            comps += 1
            stack = [v]
            seen.add(v)
            while stack:
                u = stack.pop()
                for _, w in self.adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
        return len(self.links) - len(self.adj) + comps

    def is_forest(self) -> bool:
        return self.cyclomatic() == 0

    def other(self, link_id: LinkId, v: Vertex) -> Vertex:
        a, b = self.ends[link_id]
        return b if v == a else a

    def smallest_cycle(self) -> tuple[list[LinkId], list[Vertex]] | None:
        """Minimum total-length cycle; ties broken by sorted link ids."""
        best = None
        for l in self.links:
            a, b = self.ends[l]
            found = self._shortest_path(a, b, skip=l)
            if found is None:
                continue
            dist, p_links, p_verts = found
            total = dist + self.topology.length(l)
            key = (round(total, 9), tuple(sorted(p_links + [l])))
            if best is None or key < best[0]:
                best = (key, p_links + [l], p_verts)
        if best is None:
            return None
        return best[1], best[2]

    def _shortest_path(self, a: Vertex, b: Vertex, skip: LinkId):
        dist = {a: 0.0}
        pred: dict[Vertex, tuple[Vertex, LinkId]] = {}
        heap = [(0.0, a)]
        done: set[Vertex] = set()
        while heap:
            d, u = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            if u == b:
                break
            for l, w in self.adj[u]:
                if l == skip:
                    continue
                nd = d + self.topology.length(l)
                if nd < dist.get(w, float("inf")) - 1e-12:
                    dist[w] = nd
                    pred[w] = (u, l)
                    heapq.heappush(heap, (nd, w))
        if b not in done:
            return None
        links, verts = [], [b]
        v = b
        while v != a:
            u, l = pred[v]
            links.append(l)
            verts.append(u)
            v = u
        return dist[b], links[::-1], verts[::-1]


def link_classes(node: NodeId, incident: Sequence[LinkId], routes: Iterable[Path]) -> list[list[LinkId]]:
    """Partition the links at ``node`` into classes joined by routes passing through it."""
    parent = {l: l for l in incident}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for r in routes:
        for k in range(1, len(r.nodes) - 1):
            if r.nodes[k] == node:
                a, b = find(r.links[k - 1]), find(r.links[k])
                if a != b and a in parent and b in parent:
                    parent[max(a, b)] = min(a, b)
    groups: dict[LinkId, list[LinkId]] = {}
    for l in incident:
        groups.setdefault(find(l), []).append(l)
    return sorted((sorted(g) for g in groups.values()), key=lambda g: g[0])


# ---------------------------------------------------------------- find_cycle


def find_cycle(topology: Topology, fragment: Iterable[LinkId]) -> list[LinkId] | None:
    """Some cycle of the sub-graph formed by ``fragment``, or None if it is a forest.

    Depth-first search started at the endpoints of the lowest link id, with
    neighbours visited in ascending link-id order.
    """
    fragment = sorted(set(fragment))
    adj: dict[NodeId, list[tuple[LinkId, NodeId]]] = {}
    for l in fragment:
        link = topology.link(l)
        adj.setdefault(link.a, []).append((l, link.b))
        adj.setdefault(link.b, []).append((l, link.a))
    for lst in adj.values():
        lst.sort()

    starts: list[NodeId] = []
    for l in fragment:
        link = topology.link(l)
        starts.extend(sorted((link.a, link.b)))

    visited: set[NodeId] = set()
    for root in starts:
        if root in visited:
            continue
        # iterative DFS keeping the tree path
        depth = {root: 0}
        path_nodes = [root]
        path_links: list[LinkId] = []
        iters = [iter(adj[root])]
        visited.add(root)
        while iters:
            parent_link = path_links[-1] if path_links else None
            for l, w in iters[-1]:
                if l == parent_link:
                    continue
                if w in depth:
                    k = depth[w]
                    return path_links[k:] + [l]
                depth[w] = len(path_nodes)
                visited.add(w)
                path_nodes.append(w)
                path_links.append(l)
                iters.append(iter(adj[w]))
                break
            else:
                iters.pop()
                del depth[path_nodes.pop()]
                if path_links:
                    path_links.pop()
    return None


# ---------------------------------------------------------------- elimination


def _orient(pair: PathPair, source: NodeId) -> Path:
    p = pair.protection
    return p if p.source == source else p.reversed()


def initial_tree(
    group_id: int,
    members: Iterable[int],
    pairs: Mapping[int, PathPair],
    mode: str,
    width: int = 1,
) -> ProtectionTree:
    """Coding topology before elimination: the members' protection paths as routed."""
    routes = {d: _orient(pairs[d], pairs[d].primary.source) for d in sorted(members)}
    return ProtectionTree(group_id, mode, routes, width)


def _substitute(route: Path, link_id: LinkId, detour: Sequence[NodeId], detour_links: Sequence[LinkId]) -> Path:
    """Replace ``link_id`` in ``route`` by the walk ``detour`` between its endpoints."""
    k = route.links.index(link_id)
    u, v = route.nodes[k], route.nodes[k + 1]
    if detour[0] == u and detour[-1] == v:
        dn, dl = list(detour), list(detour_links)
    else:
        dn, dl = list(detour[::-1]), list(detour_links[::-1])
    nodes = list(route.nodes[:k]) + dn + list(route.nodes[k + 2:])
    links = list(route.links[:k]) + dl + list(route.links[k + 1:])
    return loop_erase(nodes, links)


def _cycle_remainder(topology: Topology, cycle: Sequence[LinkId], removed: LinkId) -> tuple[list[NodeId], list[LinkId]]:
    """Walk around the ordered ring ``cycle`` from one end of ``removed`` to the other."""
    ring = list(cycle)
    j = ring.index(removed)
    walk = ring[j + 1:] + ring[:j]
    gone = topology.link(removed)
    first = topology.link(walk[0])
    start = gone.a if gone.a in (first.a, first.b) else gone.b
    nodes, cur = [start], start
    for l in walk:
        cur = topology.link(l).other(cur)
        nodes.append(cur)
    if cur != gone.other(start):
        raise ValueError("cycle links are not an ordered ring")
    return nodes, walk


def _remove_link(topology: Topology, routes: Mapping[int, Path], cycle: Sequence[LinkId], link_id: LinkId) -> dict[int, Path]:
    nodes, links = _cycle_remainder(topology, cycle, link_id)
    out = dict(routes)
    for d, r in routes.items():
        if link_id in r.links:
            out[d] = _substitute(r, link_id, nodes, links)
    return out


def _union_cost(topology: Topology, routes: Mapping[int, Path], width: int) -> float:
    links = set(itertools.chain.from_iterable(r.links for r in routes.values()))
    return width * sum(topology.length(l) for l in links)


def _by_length_desc(topology: Topology, links: Iterable[LinkId]) -> list[LinkId]:
    return sorted(links, key=lambda l: (-topology.length(l), l))


def cep_basic(tree: ProtectionTree, cycle: Sequence[LinkId], topology: Topology) -> ProtectionTree:
    """Empty the longest link of ``cycle`` and code its data over the rest of the cycle."""
    if not set(cycle) <= tree.tree_links:
        raise ValueError("cycle is not inside the group's coding topology")
    longest = _by_length_desc(topology, cycle)[0]
    before = tree.cost(topology)
    routes = _remove_link(topology, tree.routes, cycle, longest)
    saving = before - _union_cost(topology, routes, tree.width)
    return _commit(tree, routes, removal=Removal(longest, saving), note=f"removed link {longest}")


def _commit(
    tree: ProtectionTree,
    routes: Mapping[int, Path],
    removal: Removal | None = None,
    apsed: Iterable[int] = (),
    split: NodeId | None = None,
    note: str = "",
) -> ProtectionTree:
    changes = {"routes": dict(sorted(routes.items()))}
    if removal is not None:
        changes["removed_links"] = tree.removed_links + (removal,)
    if apsed:
        changes["apsed"] = tree.apsed | frozenset(apsed)
    if split is not None:
        changes["separation_points"] = tree.separation_points | {split}
    changes["log"] = tree.log + ((note,) if note else ())
    return dataclasses.replace(tree, **changes)


def _own_safe(pairs: Mapping[int, PathPair], routes: Mapping[int, Path], changed: Iterable[int]) -> list[int]:
    """Members whose route now overlaps their own primary path."""
    return [d for d in changed if not routes[d].link_set.isdisjoint(pairs[d].primary.link_set)]


def _separation_point(
    graph: CodingGraph, cycle_links: Sequence[LinkId], cycle_verts: Sequence[Vertex]
) -> NodeId | None:
    """A node on the cycle whose two on-cycle links carry no common data."""
    symbols = {l: SymbolExpr() for l in cycle_links}
    for d, r in graph.routes.items():
        for l in r.links:
            if l in symbols:
                symbols[l] = symbols[l] ^ SymbolExpr.parity(d)
    ring = list(cycle_links)
    n = len(ring)
    candidates = []
    for k, v in enumerate(cycle_verts):
        node = v[0]
        e_in, e_out = ring[(k - 1) % n], ring[k % n]
        if symbols[e_in].demands() & symbols[e_out].demands():
            continue
        inc = [l for l in graph.links if node in (graph.topology.link(l).a, graph.topology.link(l).b)]
        classes = link_classes(node, inc, graph.routes.values())
        cls_of = {l: i for i, c in enumerate(classes) for l in c}
        if cls_of[e_in] != cls_of[e_out]:
            candidates.append(node)
    return min(candidates) if candidates else None


def _detour(
    topology: Topology,
    pair: PathPair,
    source: NodeId,
    others: Mapping[int, Path],
    splits: Iterable[NodeId],
    max_candidates: int = 64,
) -> Path | None:
    """Cheapest route avoiding the member's own primary that adds no coding cycle."""
    used = set(itertools.chain.from_iterable(r.links for r in others.values()))
    base = CodingGraph(topology, others, splits).cyclomatic() if others else 0
    g = nx.Graph()
    own = pair.primary.link_set
    for lid, link in topology.links.items():
        if lid in own:
            continue
        g.add_edge(link.a, link.b, weight=0.0 if lid in used else link.length, lid=lid)
    target = pair.primary.target if pair.primary.source == source else pair.primary.source
    if source not in g or target not in g or not nx.has_path(g, source, target):
        return None
    for nodes in itertools.islice(nx.shortest_simple_paths(g, source, target, weight="weight"), max_candidates):
        cand = Path.from_nodes(topology, nodes)
        trial = dict(others)
        trial[-1] = cand
        if CodingGraph(topology, trial, splits).cyclomatic() <= base:
            return cand
    return None


def cep_extended(
    tree: ProtectionTree,
    pairs: Mapping[int, PathPair],
    topology: Topology,
    max_rounds: int | None = None,
) -> ProtectionTree:
    """Eliminate every cycle while keeping each member's route off its own primary.

    Per cycle, in order: remove the longest link; else the next longest that
    is safe; else keep the cycle if it has a separation point; else detour the
    conflicting members; else demote them to dedicated 1+1 protection.
    """
    if max_rounds is None:
        max_rounds = 4 * (len(topology.links) + len(tree.routes)) + 8
    for _ in range(max_rounds):
        graph = CodingGraph(topology, tree.routes, tree.separation_points)
        found = graph.smallest_cycle()
        if found is None:
            return tree
        cycle, verts = found
        before = tree.cost(topology)

        # steps 1-2: longest link first, then descending length
        conflicts_for_longest: list[int] | None = None
        done = False
        for link in _by_length_desc(topology, cycle):
            routes = _remove_link(topology, tree.routes, cycle, link)
            changed = [d for d, r in tree.routes.items() if link in r.links]
            bad = _own_safe(pairs, routes, changed)
            if conflicts_for_longest is None:
                conflicts_for_longest = bad
            if not bad:
                saving = before - _union_cost(topology, routes, tree.width)
                tree = _commit(tree, routes, removal=Removal(link, saving), note=f"removed link {link}")
                done = True
                break
        if done:
            continue

        # step 3: separation point
        node = _separation_point(graph, cycle, verts)
        if node is not None:
            tree = _commit(tree, tree.routes, split=node, note=f"separation point {node}")
            if not CodingGraph(topology, tree.routes, tree.separation_points).cyclomatic() < graph.cyclomatic():
                raise AssertionError("separation point did not break the cycle")
            continue

        # step 4: reroute conflicting members off the cycle
        longest = _by_length_desc(topology, cycle)[0]
        routes = _remove_link(topology, tree.routes, cycle, longest)
        conflicting = conflicts_for_longest or []
        others = {d: r for d, r in routes.items() if d not in conflicting}
        placed: dict[int, Path] = {}
        for d in conflicting:
            cand = _detour(topology, pairs[d], tree.routes[d].source, {**others, **placed}, tree.separation_points)
            if cand is None:
                break
            placed[d] = cand
        if len(placed) == len(conflicting):
            new_routes = {**others, **placed}
            after = CodingGraph(topology, new_routes, tree.separation_points).cyclomatic()
            if after < graph.cyclomatic():
                saving = before - _union_cost(topology, new_routes, tree.width)
                tree = _commit(
                    tree,
                    new_routes,
                    removal=Removal(longest, saving),
                    note=f"removed link {longest}; detoured {sorted(placed)}",
                )
                tree = dataclasses.replace(tree, reroutes={**tree.reroutes, **placed})
                continue

        # step 5: dedicated protection for the conflicting members
        tree = _commit(
            tree,
            {d: r for d, r in tree.routes.items() if d not in conflicting},
            apsed=conflicting,
            note=f"1+1 APS for {sorted(conflicting)}",
        )

    # round budget exhausted: demote everyone still on a cycle
    graph = CodingGraph(topology, tree.routes, tree.separation_points)
    stuck = set()
    while (found := graph.smallest_cycle()) is not None:
        cyc = set(found[0])
        stuck |= {d for d, r in tree.routes.items() if cyc & r.link_set}
        graph = CodingGraph(topology, {d: r for d, r in tree.routes.items() if d not in stuck}, tree.separation_points)
    return _commit(
        tree, {d: r for d, r in tree.routes.items() if d not in stuck}, apsed=stuck, note=f"1+1 APS for {sorted(stuck)}"
    )


def eliminate_cycles(
    group_id: int,
    members: Iterable[int],
    pairs: Mapping[int, PathPair],
    topology: Topology,
    mode: str,
    width: int = 1,
) -> ProtectionTree:
    """Run the mode-appropriate elimination until the coding topology is cycle-free."""
    tree = initial_tree(group_id, members, pairs, mode, width)
    if mode == RELAXED:
        tree = cep_extended(tree, pairs, topology)
    else:
        while True:
            found = CodingGraph(topology, tree.routes).smallest_cycle()
            if found is None:
                break
            tree = cep_basic(tree, found[0], topology)
    originals = {d: _orient(pairs[d], pairs[d].primary.source) for d in tree.routes}
    reroutes = {d: r for d, r in tree.routes.items() if r != originals[d]}
    return dataclasses.replace(tree, reroutes=dict(sorted(reroutes.items())))
