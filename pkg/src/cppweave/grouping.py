"""Coding group formation from a shared-protection solution.

Two link-disjointness rules govern which demands may be coded together:

* rule 1: members' primary paths are pairwise link-disjoint;
* rule 2 (strict): each member's primary is also disjoint from every other
  member's protection path. Relaxed mode drops this second rule and relies on
  muting at failure time instead.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .cycles import RELAXED, STRICT, ProtectionTree, eliminate_cycles
from .netmodel import LinkId, PathPair
from .spp import SppSolution

MODES = (STRICT, RELAXED)
BRUTE_FORCE_LIMIT = 10


class TooLarge(ValueError):
    """Exhaustive search requested on too many demands."""


@dataclass(frozen=True)
class Violation:
    rule: str
    demands: tuple[int, int]
    link_id: LinkId

    def __str__(self) -> str:
        i, j = self.demands
        if self.rule == "rule1":
            return f"rule 1: primaries of {i} and {j} share link {self.link_id}"
        return f"rule 2: primary of {i} shares link {self.link_id} with protection of {j}"


@dataclass(frozen=True)
class CodingGroup:
    group_id: int
    members: frozenset[int]
    mode: str
    protection_topology: Mapping[LinkId, int] = field(default_factory=dict)

    @classmethod
    def of(cls, group_id: int, members: Iterable[int], mode: str, pairs: Mapping[int, PathPair]) -> "CodingGroup":
        members = frozenset(members)
        occ: dict[LinkId, int] = {}
        for d in sorted(members):
            for l in pairs[d].protection.links:
                occ[l] = occ.get(l, 0) + 1
        return cls(group_id, members, mode, dict(sorted(occ.items())))


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, not {mode!r}")


def pair_violations(i: int, j: int, pairs: Mapping[int, PathPair], mode: str) -> list[Violation]:
    out = []
    pi, pj = pairs[i], pairs[j]
    for l in sorted(pi.primary.link_set & pj.primary.link_set):
        out.append(Violation("rule1", (i, j), l))
    if mode == STRICT:
        for l in sorted(pi.primary.link_set & pj.protection.link_set):
            out.append(Violation("rule2", (i, j), l))
        for l in sorted(pj.primary.link_set & pi.protection.link_set):
            out.append(Violation("rule2", (j, i), l))
    return out


def validate_group(g: CodingGroup, pairs: Mapping[int, PathPair]) -> list[Violation]:
    """Every rule violation inside the group; an empty list means the group is valid."""
    _check_mode(g.mode)
    out: list[Violation] = []
    for i, j in itertools.combinations(sorted(g.members), 2):
        out.extend(pair_violations(i, j, pairs, g.mode))
    return out


class CppDesign:
    """Coding groups, their cycle-free protection trees and capacity accounting."""

    def __init__(self, spp: SppSolution, mode: str, trees: Iterable[ProtectionTree]):
        _check_mode(mode)
        self.spp = spp
        self.mode = mode
        self.trees = {t.group_id: t for t in sorted(trees, key=lambda t: t.group_id)}
        self.groups = tuple(
            CodingGroup.of(t.group_id, t.members, mode, spp.pairs) for t in self.trees.values()
        )

    @property
    def topology(self):
        return self.spp.topology

    @property
    def apsed(self) -> frozenset[int]:
        return frozenset(itertools.chain.from_iterable(t.apsed for t in self.trees.values()))

    def group_of(self, demand_id: int) -> CodingGroup | None:
        for g in self.groups:
            if demand_id in g.members:
                return g
        return None

    def link_capacity(self) -> dict[LinkId, int]:
        """Protection units per link: one per group tree plus dedicated 1+1 paths."""
        cap: dict[LinkId, int] = {}
        for t in self.trees.values():
            for l in t.tree_links:
                cap[l] = cap.get(l, 0) + t.width
        for d in sorted(self.apsed):
            for l in self.spp.pairs[d].protection.links:
                cap[l] = cap.get(l, 0) + self.spp.demands[d].units
        return dict(sorted(cap.items()))

    def total_capacity(self) -> float:
        return sum(self.topology.length(l) * u for l, u in self.link_capacity().items())

    def cep_savings(self) -> float:
        return float(sum(t.savings() for t in self.trees.values()))

    def partition(self) -> tuple[tuple[int, ...], ...]:
        return tuple(sorted(tuple(sorted(g.members)) for g in self.groups if g.members))

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "spp_sha256": self.spp.digest(),
            "groups": [
                {"group": g.group_id, "members": sorted(g.members), **self.trees[g.group_id].to_dict()}
                for g in self.groups
            ],
            "link_capacity": {str(l): u for l, u in self.link_capacity().items()},
            "total_capacity": self.total_capacity(),
            "apsed": sorted(self.apsed),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


class _GroupCoster:
    """Memoised post-elimination cost of a candidate member set."""

    def __init__(self, sol: SppSolution, mode: str):
        self.sol = sol
        self.mode = mode
        self._trees: dict[frozenset[int], ProtectionTree] = {}

    def tree(self, members: frozenset[int]) -> ProtectionTree:
        if members not in self._trees:
            width = max(self.sol.demands[d].units for d in members)
            self._trees[members] = eliminate_cycles(
                min(members), members, self.sol.pairs, self.sol.topology, self.mode, width
            )
        return self._trees[members]

    def cost(self, members: frozenset[int]) -> float:
        t = self.tree(members)
        dedicated = sum(
            self.sol.pairs[d].protection.cost(self.sol.topology) * self.sol.demands[d].units for d in t.apsed
        )
        return t.cost(self.sol.topology) + dedicated


def _compatible(sol: SppSolution, mode: str) -> dict[int, set[int]]:
    ids = list(sol.pairs)
    ok = {d: set() for d in ids}
    for i, j in itertools.combinations(ids, 2):
        if not pair_violations(i, j, sol.pairs, mode):
            ok[i].add(j)
            ok[j].add(i)
    return ok


def _design(sol: SppSolution, mode: str, coster: _GroupCoster, blocks: Iterable[frozenset[int]]) -> CppDesign:
    return CppDesign(sol, mode, [coster.tree(b) for b in sorted(blocks, key=min)])


def form_groups(sol: SppSolution, mode: str = STRICT) -> CppDesign:
    """Greedy merging from singletons.

    Repeatedly merges the valid pair of groups with the largest length-weighted
    saving (ties: lowest group ids) until no merge saves capacity.
    """
    _check_mode(mode)
    coster = _GroupCoster(sol, mode)
    compat = _compatible(sol, mode)
    groups: dict[int, frozenset[int]] = {d: frozenset([d]) for d in sol.pairs}
    while True:
        best = None
        for a, b in itertools.combinations(sorted(groups), 2):
            ga, gb = groups[a], groups[b]
            if not all(j in compat[i] for i in ga for j in gb):
                continue
            saving = coster.cost(ga) + coster.cost(gb) - coster.cost(ga | gb)
            if saving > 1e-9 and (best is None or saving > best[0] + 1e-9):
                best = (saving, a, b)
        if best is None:
            break
        _, a, b = best
        groups[a] = groups[a] | groups.pop(b)
    return _design(sol, mode, coster, groups.values())


def brute_force_groups(sol: SppSolution, mode: str = STRICT) -> CppDesign:
    """Exact minimum-capacity partition into valid groups (at most 10 demands).

    Ties go to the lexicographically smallest partition.
    """
    _check_mode(mode)
    ids = sorted(sol.pairs)
    n = len(ids)
    if n > BRUTE_FORCE_LIMIT:
        raise TooLarge(f"{n} demands exceeds the exhaustive-search cap of {BRUTE_FORCE_LIMIT}")
    coster = _GroupCoster(sol, mode)
    compat = _compatible(sol, mode)

    def members(mask: int) -> frozenset[int]:
        return frozenset(ids[k] for k in range(n) if mask >> k & 1)

    valid: dict[int, float] = {}
    for mask in range(1, 1 << n):
        m = sorted(members(mask))
        if all(j in compat[i] for i, j in itertools.combinations(m, 2)):
            valid[mask] = coster.cost(frozenset(m))

    best: dict[int, tuple[float, tuple[tuple[int, ...], ...]]] = {0: (0.0, ())}
    for mask in range(1, 1 << n):
        low = mask & -mask
        rest_bits = mask ^ low
        choice = None
        sub = rest_bits
        while True:
            block = sub | low
            if block in valid:
                rc, rp = best[mask ^ block]
                cand_cost = valid[block] + rc
                cand_part = tuple(sorted(rp + (tuple(sorted(members(block))),)))
                key = (round(cand_cost, 9), cand_part)
                if choice is None or key < choice[0]:
                    choice = (key, cand_cost, cand_part)
            if sub == 0:
                break
            sub = (sub - 1) & rest_bits
        best[mask] = (choice[1], choice[2])
    _, partition = best[(1 << n) - 1]
    return _design(sol, mode, coster, [frozenset(b) for b in partition])


def extra_capacity(design: CppDesign) -> float:
    """Length-weighted CPP protection capacity minus SPP spare capacity."""
    return design.total_capacity() - design.spp.spare_cost()
