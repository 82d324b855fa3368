from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from cppweave.cycles import RELAXED, STRICT, eliminate_cycles
from cppweave.grouping import (
    BRUTE_FORCE_LIMIT,
    CodingGroup,
    CppDesign,
    TooLarge,
    brute_force_groups,
    extra_capacity,
    form_groups,
    validate_group,
)
from cppweave.instances import random_instance
from cppweave.netmodel import Demand, Path, PathPair, build_topology
from cppweave.scenarios import four_demand_regroup
from cppweave.spp import solve_spp

from test_spp import SIX


def _line_pairs():
    # i: primary A-B-C (links 1,2); j: primary D-E (link 7) with protection over link 2
    t = build_topology(
        [(1, "A", "B", 1), (2, "B", "C", 1), (3, "A", "X", 1), (4, "X", "C", 1), (5, "D", "B", 1), (6, "C", "E", 1), (7, "D", "E", 1)]
    )
    pairs = {
        1: PathPair(1, Path.from_nodes(t, ["A", "B", "C"]), Path.from_nodes(t, ["A", "X", "C"])),
        2: PathPair(2, Path.from_nodes(t, ["D", "E"]), Path.from_nodes(t, ["D", "B", "C", "E"])),
        3: PathPair(3, Path.from_nodes(t, ["A", "B"]), Path.from_nodes(t, ["A", "X", "C", "B"])),
    }
    return t, pairs


def test_rule1_violation_names_link():
    _, pairs = _line_pairs()
    v = validate_group(CodingGroup.of(1, {1, 3}, STRICT, pairs), pairs)
    assert [(x.rule, x.demands, x.link_id) for x in v if x.rule == "rule1"] == [("rule1", (1, 3), 1)]


def test_rule2_strict_only():
    _, pairs = _line_pairs()
    strict = validate_group(CodingGroup.of(1, {1, 2}, STRICT, pairs), pairs)
    assert [(x.rule, x.demands, x.link_id) for x in strict] == [("rule2", (1, 2), 2)]
    assert "rule 2" in str(strict[0])
    assert validate_group(CodingGroup.of(1, {1, 2}, RELAXED, pairs), pairs) == []


def test_singleton_valid_both_modes():
    _, pairs = _line_pairs()
    for mode in (STRICT, RELAXED):
        assert validate_group(CodingGroup.of(1, {1}, mode, pairs), pairs) == []


def test_protection_topology_counts_occupancy():
    _, pairs = _line_pairs()
    g = CodingGroup.of(1, {1, 3}, STRICT, pairs)
    assert g.protection_topology == {2: 1, 3: 2, 4: 2}


def test_four_demand_regroup():
    topo, demands, _ = four_demand_regroup()
    sol = solve_spp(topo, demands)
    assert [sorted(u.sharers) for u in sol.spare[5]] == [[1, 3], [4]]
    for fn in (form_groups, brute_force_groups):
        d = fn(sol, STRICT)
        assert d.partition() == ((1, 2), (3, 4))
        assert extra_capacity(d) == 0


def test_overlapping_primaries_stay_apart():
    sol = solve_spp(SIX, [Demand(1, "A", "B"), Demand(2, "A", "B")])
    assert form_groups(sol).partition() == ((1,), (2,))


def test_lost_sharing_costs_the_shared_link():
    sol = solve_spp(SIX, [Demand(1, "A", "B"), Demand(2, "C", "D")])
    singles = CppDesign(sol, STRICT, [eliminate_cycles(d, [d], sol.pairs, SIX, STRICT) for d in (1, 2)])
    assert extra_capacity(singles) == SIX.length(4) * 1
    assert extra_capacity(form_groups(sol)) == 0


def test_single_demand_is_dedicated():
    sol = solve_spp(SIX, [Demand(1, "A", "B")])
    d = brute_force_groups(sol)
    assert d.partition() == ((1,),)
    assert d.total_capacity() == sol.pairs[1].protection.cost(SIX)


def test_greedy_matches_oracle_on_five_demands():
    topo, demands = random_instance(0, n_demands=(5, 5))
    sol = solve_spp(topo, demands)
    g, b = form_groups(sol), brute_force_groups(sol)
    assert len(demands) == 5
    assert g.partition() == b.partition() == ((1,), (2,), (3,), (4, 5))
    assert g.total_capacity() == b.total_capacity() == 58


def test_too_large():
    topo, _ = random_instance(1, n_nodes=(12, 12))
    nodes = sorted(topo.nodes)
    demands = [Demand(k, nodes[0], nodes[k]) for k in range(1, BRUTE_FORCE_LIMIT + 2)]
    with pytest.raises(TooLarge):
        brute_force_groups(solve_spp(topo, demands))


def test_bad_mode():
    with pytest.raises(ValueError):
        form_groups(solve_spp(SIX, []), "loose")


def test_empty_instance():
    d = form_groups(solve_spp(SIX, []))
    assert d.partition() == () and d.total_capacity() == 0


def recount(design: CppDesign) -> float:
    topo = design.topology
    total = 0.0
    for t in design.trees.values():
        links = {l for r in t.routes.values() for l in r.links}
        total += t.width * sum(topo.length(l) for l in links)
    for d in design.apsed:
        total += design.spp.pairs[d].protection.cost(topo) * design.spp.demands[d].units
    return total - sum(topo.length(l) * len(units) for l, units in design.spp.spare.items())


@settings(max_examples=40)
@given(st.integers(0, 100_000))
def test_design_properties(seed):
    topo, demands = random_instance(seed, n_demands=(2, 7))
    sol = solve_spp(topo, demands)
    costs = {}
    for mode in (STRICT, RELAXED):
        g, b = form_groups(sol, mode), brute_force_groups(sol, mode)
        for design in (g, b):
            for grp in design.groups:
                assert validate_group(grp, sol.pairs) == []
            members = [d for grp in design.groups for d in grp.members] + list(design.apsed)
            assert sorted(members) == sorted(sol.pairs)
            assert extra_capacity(design) == pytest.approx(recount(design))
        assert b.total_capacity() <= g.total_capacity() + 1e-9
        costs[mode] = b.total_capacity()
    assert costs[RELAXED] <= costs[STRICT] + 1e-9
