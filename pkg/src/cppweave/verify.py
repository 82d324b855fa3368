"""Single-link failure simulation and decodability checks for a CPP design.

In the no-failure state both end nodes of demand ``i`` transmit the parity
``c_i = s_i + d_i`` onto the group's coding tree, and every directed tree
link carries the XOR of the contributions on its upstream side. When the
primary path of ``i`` fails, its S end transmits ``s_i`` alone and its T end
``d_i`` alone. In relaxed mode, demands whose protection route crosses the
failed link fall silent. An affected end node recovers when the remote atom
lies in the GF(2) span of what it can see: the signals arriving on its
incident tree links, the contributions of end nodes sharing its coding
vertex, and its own local atom.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .cycles import RELAXED, CodingGraph, ProtectionTree, Vertex
from .grouping import CppDesign
from .netmodel import LinkId, NodeId, Topology
from .parity import S, T, ZERO, SymbolExpr, span_witness, xor_all
from .trails import DIRECT, TrailHierarchy

UNAFFECTED = "unaffected"
RECOVERED = "recovered-both-ends"
UNRECOVERED = "UNRECOVERED"

DirectedLink = tuple[LinkId, NodeId]


class UnknownLink(KeyError):
    pass


@dataclass(frozen=True)
class Verdict:
    demand_id: int
    status: str
    end: str | None = None
    reason: str | None = None
    # per end: the expressions whose XOR yields the recovered atom
    witness: Mapping[str, tuple[SymbolExpr, ...]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        out: dict = {"status": self.status}
        if self.end is not None:
            out["end"] = self.end
        if self.reason is not None:
            out["reason"] = self.reason
        return out


@dataclass(frozen=True)
class FailureReport:
    failed_link: LinkId
    verdicts: Mapping[int, Verdict]
    muted: frozenset[int] = frozenset()

    @property
    def affected(self) -> list[int]:
        return [d for d, v in self.verdicts.items() if v.status != UNAFFECTED]

    @property
    def unrecovered(self) -> list[int]:
        return [d for d, v in self.verdicts.items() if v.status == UNRECOVERED]

    def to_dict(self) -> dict:
        return {
            "failed_link": self.failed_link,
            "verdicts": {str(d): v.to_dict() for d, v in sorted(self.verdicts.items())},
            "muted": sorted(self.muted),
        }


@dataclass(frozen=True)
class VerificationResult:
    reports: tuple[FailureReport, ...]

    @property
    def passed(self) -> bool:
        return not any(r.unrecovered for r in self.reports)

    def unrecovered(self) -> list[tuple[LinkId, int]]:
        return [(r.failed_link, d) for r in self.reports for d in r.unrecovered]

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "unrecovered": [list(x) for x in self.unrecovered()],
            "reports": [r.to_dict() for r in self.reports],
        }


# ---------------------------------------------------------------- expressions


def _upstream(cg: CodingGraph, start: Vertex, came_by: LinkId, contrib: Mapping[Vertex, SymbolExpr], dead: set[LinkId]) -> SymbolExpr:
    acc = ZERO
    stack = [(start, came_by)]
    seen = {start}
    while stack:
        v, prev = stack.pop()
        acc = acc ^ contrib.get(v, ZERO)
        for l, w in cg.adj[v]:
            if l == prev or l in dead or w in seen:
                continue
            seen.add(w)
            stack.append((w, l))
    return acc


def link_expressions(
    cg: CodingGraph,
    contrib: Mapping[Vertex, SymbolExpr],
    failed: LinkId | None = None,
) -> dict[DirectedLink, SymbolExpr]:
    """Signal on every live directed link of a forest-shaped coding graph."""
    dead = {failed} if failed is not None else set()
    out: dict[DirectedLink, SymbolExpr] = {}
    for l in cg.links:
        if l in dead:
            continue
        a, b = cg.ends[l]
        out[(l, a[0])] = _upstream(cg, a, l, contrib, dead)
        out[(l, b[0])] = _upstream(cg, b, l, contrib, dead)
    return dict(sorted(out.items()))


def _contributions(
    cg: CodingGraph, tree: ProtectionTree, affected: set[int], muted: set[int]
) -> tuple[dict[Vertex, SymbolExpr], dict[tuple[int, str], tuple[Vertex, SymbolExpr]]]:
    per_vertex: dict[Vertex, SymbolExpr] = {}
    per_end: dict[tuple[int, str], tuple[Vertex, SymbolExpr]] = {}
    for d in sorted(tree.routes):
        vs, vt = cg.end_vertices(d)
        for side, v in ((S, vs), (T, vt)):
            if d in muted:
                e = ZERO
            elif d in affected:
                e = SymbolExpr.atom(d, side)
            else:
                e = SymbolExpr.parity(d)
            per_end[(d, side)] = (v, e)
            per_vertex[v] = per_vertex.get(v, ZERO) ^ e
    return per_vertex, per_end


def tree_steady_state(tree: ProtectionTree, topology: Topology) -> dict[DirectedLink, SymbolExpr]:
    """No-failure signals computed directly on the coding tree."""
    cg = CodingGraph(topology, tree.routes, tree.separation_points)
    contrib, _ = _contributions(cg, tree, set(), set())
    return link_expressions(cg, contrib)


def steady_state(hierarchy: TrailHierarchy, topology: Topology) -> dict[DirectedLink, SymbolExpr]:
    """No-failure signals read off the trail hierarchy.

    Along a trail each directed link carries the parities of every entity
    behind it; a branch origin contributes the parities of its complement
    expression, and a direct attachment's private path carries the entity's
    own parity toward the trail and everything else away from it.
    """
    out: dict[DirectedLink, SymbolExpr] = {}
    for trail in hierarchy.trails:
        parity = [xor_all(SymbolExpr.parity(r.demand_id) for r in e.represents) for e in trail.entities]
        total = xor_all(parity)
        for p, l in enumerate(trail.links):
            behind = xor_all(x for x, e in zip(parity, trail.entities) if e.position <= p)
            ahead = xor_all(x for x, e in zip(parity, trail.entities) if e.position > p)
            out[(l, trail.vertices[p][0])] = behind
            out[(l, trail.vertices[p + 1][0])] = ahead
        for x, e in zip(parity, trail.entities):
            if e.kind != DIRECT:
                continue
            node = e.node
            for l in e.via:
                link = topology.link(l)
                far = link.other(node)
                out[(l, far)] = x
                out[(l, node)] = total ^ x
                node = far
    return dict(sorted(out.items()))


# ---------------------------------------------------------------- failures


def _recover_end(
    cg: CodingGraph,
    contrib: Mapping[Vertex, SymbolExpr],
    per_end: Mapping[tuple[int, str], tuple[Vertex, SymbolExpr]],
    demand_id: int,
    side: str,
    failed: LinkId,
) -> tuple[SymbolExpr, ...] | None:
    v, _ = per_end[(demand_id, side)]
    local = SymbolExpr.atom(demand_id, side)
    target = SymbolExpr.atom(demand_id, T if side == S else S)
    gens: list[SymbolExpr] = [local]
    for l, w in cg.adj.get(v, []):
        if l == failed:
            continue
        gens.append(_upstream(cg, w, l, contrib, {failed}))
    for (d, sd), (u, e) in sorted(per_end.items()):
        if u == v and (d, sd) != (demand_id, side):
            gens.append(e)
    idx = span_witness(gens, target)
    if idx is None:
        return None
    return tuple(gens[k] for k in idx)


class _Simulator:
    def __init__(self, design: CppDesign):
        self.design = design
        self.topology = design.topology
        self.graphs = {
            gid: CodingGraph(self.topology, t.routes, t.separation_points) for gid, t in design.trees.items()
        }

    def run(self, failed: LinkId) -> FailureReport:
        if failed not in self.topology.links:
            raise UnknownLink(failed)
        design = self.design
        pairs = design.spp.pairs
        affected = {d for d, p in pairs.items() if failed in p.primary.link_set}
        verdicts: dict[int, Verdict] = {d: Verdict(d, UNAFFECTED) for d in pairs}
        all_muted: set[int] = set()

        covered = set(design.apsed).union(*(t.routes for t in design.trees.values()))
        for d in sorted(affected - covered):
            verdicts[d] = Verdict(d, UNRECOVERED, "both", "no protection assigned")
        for d in sorted(affected & design.apsed):
            ok = failed not in pairs[d].protection.link_set
            verdicts[d] = Verdict(d, RECOVERED) if ok else Verdict(d, UNRECOVERED, "both", "dedicated path cut")

        for gid, tree in design.trees.items():
            members = set(tree.routes)
            hit = affected & members
            muted = set()
            if design.mode == RELAXED:
                muted = {d for d, r in tree.routes.items() if failed in r.link_set} - hit
            all_muted |= muted
            if not hit:
                continue
            cg = self.graphs[gid]
            if not cg.is_forest():
                for d in hit:
                    verdicts[d] = Verdict(d, UNRECOVERED, "both", "cyclic coding topology")
                continue
            contrib, per_end = _contributions(cg, tree, hit, muted)
            for d in sorted(hit):
                witness = {}
                failed_ends = []
                for side in (S, T):
                    w = _recover_end(cg, contrib, per_end, d, side, failed)
                    if w is None:
                        failed_ends.append(side)
                    else:
                        witness[side] = w
                if failed_ends:
                    end = failed_ends[0] if len(failed_ends) == 1 else "both"
                    want = " and ".join(
                        f"{'d' if s == S else 's'}{d} at {s}{d}" for s in failed_ends
                    )
                    verdicts[d] = Verdict(d, UNRECOVERED, end, f"{want} not in span of received signals", witness)
                else:
                    verdicts[d] = Verdict(d, RECOVERED, witness=witness)
        return FailureReport(failed, dict(sorted(verdicts.items())), frozenset(all_muted))


def simulate_failure(design: CppDesign, failed: LinkId) -> FailureReport:
    """Cut one link and check recovery at both ends of every affected demand."""
    return _Simulator(design).run(failed)


def verify_all(design: CppDesign) -> VerificationResult:
    """Simulate every single-link failure, in link-id order."""
    sim = _Simulator(design)
    return VerificationResult(tuple(sim.run(l) for l in sorted(design.topology.links)))
