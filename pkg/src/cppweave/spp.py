"""Shared path protection baseline: routing, spare-unit sharing and SCaP."""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .netmodel import (
    Demand,
    LinkId,
    NoDisjointPair,
    Path,
    PathPair,
    Topology,
    disjoint_pair,
    link_disjoint,
)


@dataclass(frozen=True)
class SpareUnit:
    """One spare channel on a link, shared by failure-disjoint demands."""

    unit_index: int
    sharers: frozenset[int]
    width: int = 1


@dataclass(frozen=True)
class ScapResult:
    percent: float
    spare: float
    working: float


class SppSolution:
    """Path pairs for every demand plus the per-link spare-unit assignment."""

    def __init__(
        self,
        topology: Topology,
        demands: Mapping[int, Demand],
        pairs: Mapping[int, PathPair],
        spare: Mapping[LinkId, Sequence[SpareUnit]],
    ):
        self.topology = topology
        self.demands = dict(sorted(demands.items()))
        self.pairs = dict(sorted(pairs.items()))
        self.spare = {lid: tuple(units) for lid, units in sorted(spare.items()) if units}

    def primary_links(self, demand_id: int) -> frozenset[LinkId]:
        return self.pairs[demand_id].primary.link_set

    def protection_links(self, demand_id: int) -> frozenset[LinkId]:
        return self.pairs[demand_id].protection.link_set

    def spare_units(self, link_id: LinkId) -> int:
        return sum(u.width for u in self.spare.get(link_id, ()))

    def working_units(self, link_id: LinkId) -> int:
        return sum(
            self.demands[d].units for d, p in self.pairs.items() if link_id in p.primary.link_set
        )

    def spare_cost(self) -> float:
        return sum(self.topology.length(l) * self.spare_units(l) for l in self.spare)

    def working_cost(self) -> float:
        return sum(
            self.topology.length(l) * self.demands[d].units
            for d, p in self.pairs.items()
            for l in p.primary.links
        )

    def to_dict(self) -> dict:
        return {
            "pairs": {
                str(d): {
                    "primary": {"nodes": list(p.primary.nodes), "links": list(p.primary.links)},
                    "protection": {"nodes": list(p.protection.nodes), "links": list(p.protection.links)},
                    "units": self.demands[d].units,
                    "ends": [self.demands[d].a, self.demands[d].b],
                }
                for d, p in self.pairs.items()
            },
            "spare": {
                str(l): [
                    {"unit": u.unit_index, "sharers": sorted(u.sharers), "width": u.width} for u in units
                ]
                for l, units in self.spare.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()

    @classmethod
    def from_dict(cls, data: dict, topology: Topology) -> "SppSolution":
        demands, pairs = {}, {}
        for key, rec in data["pairs"].items():
            d = int(key)
            a, b = rec["ends"]
            demands[d] = Demand(d, a, b, int(rec.get("units", 1)))
            prim = Path(tuple(rec["primary"]["nodes"]), tuple(rec["primary"]["links"]))
            prot = Path(tuple(rec["protection"]["nodes"]), tuple(rec["protection"]["links"]))
            pairs[d] = PathPair(d, prim, prot)
        spare = {
            int(l): [SpareUnit(u["unit"], frozenset(u["sharers"]), u.get("width", 1)) for u in units]
            for l, units in data["spare"].items()
        }
        return cls(topology, demands, pairs, spare)


def _conflicts(pairs: Mapping[int, PathPair], members: Iterable[int]) -> dict[int, set[int]]:
    members = list(members)
    out: dict[int, set[int]] = {d: set() for d in members}
    for i, a in enumerate(members):
        for b in members[i + 1:]:
            if not link_disjoint(pairs[a].primary, pairs[b].primary):
                out[a].add(b)
                out[b].add(a)
    return out


def max_activation(pairs: Mapping[int, PathPair], link_id: LinkId, candidate_failures: Iterable[LinkId]) -> int:
    """Largest number of protection paths on ``link_id`` switched on by one failure."""
    occupants = [d for d, p in pairs.items() if link_id in p.protection.link_set]
    best = 0
    for f in candidate_failures:
        best = max(best, sum(1 for d in occupants if f in pairs[d].primary.link_set))
    return best


def _first_fit(order: Sequence[int], conflicts: Mapping[int, set[int]]) -> list[list[int]]:
    units: list[list[int]] = []
    for d in order:
        for unit in units:
            if not conflicts[d] & set(unit):
                unit.append(d)
                break
        else:
            units.append([d])
    return units


def _exact_coloring(nodes: Sequence[int], conflicts: Mapping[int, set[int]], upper: int) -> list[list[int]] | None:
    """Partition into fewer than ``upper`` conflict-free classes, or None."""
    nodes = sorted(nodes, key=lambda d: (-len(conflicts[d]), d))
    best: list[list[int]] | None = None
    limit = upper - 1

    def search(k: int, classes: list[list[int]]) -> bool:
        nonlocal best, limit
        if k == len(nodes):
            best = [sorted(c) for c in classes]
            limit = len(classes) - 1
            return True
        d = nodes[k]
        for c in classes:
            if not conflicts[d] & set(c):
                c.append(d)
                search(k + 1, classes)
                c.pop()
        if len(classes) < limit:
            classes.append([d])
            search(k + 1, classes)
            classes.pop()
        return False

    search(0, [])
    return best


def assign_spare(
    topology: Topology, demands: Mapping[int, Demand], pairs: Mapping[int, PathPair]
) -> dict[LinkId, list[SpareUnit]]:
    """First-fit spare-unit sharing in ascending demand order.

    A link whose first-fit result exceeds the single-failure activation bound
    is recoloured exactly, so the unit count matches the bound whenever the
    conflict graph allows it.
    """
    spare: dict[LinkId, list[SpareUnit]] = {}
    for lid in topology.links:
        occupants = sorted(d for d, p in pairs.items() if lid in p.protection.link_set)
        if not occupants:
            continue
        conflicts = _conflicts(pairs, occupants)
        units = _first_fit(occupants, conflicts)
        bound = max(1, max_activation({d: pairs[d] for d in occupants}, lid, topology.links))
        if len(units) > bound:
            better = _exact_coloring(occupants, conflicts, len(units))
            if better is not None:
                units = sorted(better, key=lambda c: min(c))
        spare[lid] = [
            SpareUnit(k, frozenset(u), max(demands[d].units for d in u)) for k, u in enumerate(units)
        ]
    return spare


def solve_spp(
    topology: Topology,
    demands: Sequence[Demand],
    pairs: Mapping[int, PathPair] | None = None,
    metric: str = "length",
) -> SppSolution:
    """Route every demand on a min-cost disjoint pair and assign shared spare units.

    ``pairs`` may supply pre-computed routes for some or all demands.
    """
    by_id = {d.demand_id: d for d in sorted(demands, key=lambda d: d.demand_id)}
    routed: dict[int, PathPair] = {}
    for d in by_id.values():
        if pairs is not None and d.demand_id in pairs:
            pp = pairs[d.demand_id]
            if {pp.primary.source, pp.primary.target} != {d.a, d.b}:
                raise ValueError(f"demand {d.demand_id}: supplied paths do not join {d.a} and {d.b}")
            if pp.primary.source != d.a:
                pp = PathPair(pp.demand_id, pp.primary.reversed(), pp.protection.reversed())
            routed[d.demand_id] = dataclasses.replace(pp, demand_id=d.demand_id)
            continue
        try:
            pp = disjoint_pair(topology, d.a, d.b, metric)
        except NoDisjointPair:
            raise NoDisjointPair(d.a, d.b, d.demand_id) from None
        if pp.primary.source != d.a:
            pp = PathPair(pp.demand_id, pp.primary.reversed(), pp.protection.reversed())
        routed[d.demand_id] = dataclasses.replace(pp, demand_id=d.demand_id)
    return SppSolution(topology, by_id, routed, assign_spare(topology, by_id, routed))


def scap(sol: SppSolution, topology: Topology | None = None) -> ScapResult:
    """Spare capacity percentage, length-weighted: spare / (spare + working).

    ``topology`` defaults to the one the solution was routed on.
    """
    if topology is not None and topology != sol.topology:
        raise ValueError("solution was not computed on this topology")
    spare = sol.spare_cost()
    working = sol.working_cost()
    total = spare + working
    return ScapResult(100.0 * spare / total if total > 0 else 0.0, spare, working)


def scap_from_totals(spare: float, working: float) -> ScapResult:
    total = spare + working
    return ScapResult(100.0 * spare / total if total > 0 else 0.0, spare, working)
