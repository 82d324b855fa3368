from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from cppweave.cycles import RELAXED, STRICT, CodingGraph, initial_tree
from cppweave.grouping import form_groups
from cppweave.instances import random_instance
from cppweave.netmodel import Demand, build_topology
from cppweave.parity import S, T
from cppweave.scenarios import branching_tree, five_demand_ring
from cppweave.spp import solve_spp
from cppweave.trails import (
    BRANCH,
    DIRECT,
    REAL,
    EndExpr,
    EndRef,
    MalformedTree,
    build_trails,
    complement,
    merge_adjacent,
)


def _hierarchy(with_inner, seed=0):
    topo, _, pairs = branching_tree(with_inner)
    tree = initial_tree(1, pairs, pairs, STRICT)
    return topo, tree, build_trails(tree, topo, seed)


def _expr(*terms):
    return EndExpr(EndRef(d, s, c) for d, s, c in terms)


def test_complement_swaps_sides():
    e = _expr((1, S, False), (2, T, False))
    assert complement(e) == _expr((1, T, True), (2, S, True))
    assert complement(complement(e)) == e


def test_complement_of_branch_label():
    seen_from_trunk = _expr((3, S, False), (6, T, False), (5, T, False))
    assert str(complement(seen_from_trunk)) == "T'3 + S'5 + S'6"


def test_complete_pairs_cancel():
    e = EndExpr([EndRef(3, S), EndRef(7, S), EndRef(7, T)])
    assert e == _expr((3, S, False))
    assert EndExpr.cancelled([EndRef(3, S), EndRef(7, S), EndRef(7, T)]) == (7,)


def test_example_one_truck_trail():
    _, _, h = _hierarchy(False)
    truck = h.trucks[0]
    assert truck.nodes == ("A", "B", "C", "D", "E", "F")
    labels = [(e.kind, e.node, e.label) for e in truck.entities]
    assert (BRANCH, "D", "S3 + T5 + T6") in labels
    assert (DIRECT, "C", "T3") in labels
    branch = h.children(truck.trail_id)[0]
    assert branch.nodes == ("D", "G", "H", "I")
    assert str(branch.origin_complement) == "T'3 + S'5 + S'6"
    sub = h.children(branch.trail_id)[0]
    assert sub.nodes == ("H", "J", "K")
    assert [(e.kind, e.node, e.label) for e in sub.entities if not e.origin] == [(DIRECT, "J", "T5"), (REAL, "K", "T6")]


def test_example_two_inner_demand_on_branch():
    _, _, h = _hierarchy(True)
    truck = h.trucks[0]
    truck_terms = {r.term for e in truck.entities for r in e.represents}
    assert (7, S) not in truck_terms and (7, T) not in truck_terms
    d_branch = [e for e in truck.entities if e.kind == BRANCH][0]
    assert d_branch.omitted == (7,)
    branch = h.children(truck.trail_id)[0]
    assert h.placement[(7, S)] == h.placement[(7, T)] == branch.trail_id
    assert str(branch.origin_complement) == "T'3 + S'5 + S'6"


@pytest.mark.parametrize("inner", [False, True])
def test_every_end_placed_once(inner):
    topo, tree, h = _hierarchy(inner)
    assert len(h.placement) == 2 * len(tree.members)
    singles = [r.term for t in h.trails for r in t.single_refs()]
    assert sorted(singles) == sorted(h.placement)
    covered = [l for t in h.trails for l in t.all_links()]
    assert sorted(covered) == sorted(tree.tree_links)


def test_single_link_tree():
    topo = build_topology([(1, "A", "B", 1), (2, "A", "R", 1), (3, "R", "B", 1)])
    sol = solve_spp(topo, [Demand(1, "A", "B")])
    tree = initial_tree(1, [1], sol.pairs, STRICT)
    h = build_trails(tree, topo)
    assert len(h.trails) == 1
    assert [e.kind for e in h.trails[0].entities] == [REAL, REAL]


def test_cyclic_tree_rejected():
    topo, _, pairs = five_demand_ring()
    with pytest.raises(MalformedTree):
        build_trails(initial_tree(1, pairs, pairs, STRICT), topo)


def test_merge_adjacent_explicit_pairs():
    _, _, h = _hierarchy(False)
    truck = h.trucks[0]
    keep = {(1, S), (1, T), (2, T), (4, S), (5, S)}  # let S2-T4 and S6-T3 fuse
    merged = merge_adjacent(truck, keep)
    labels = [e.label for e in merged.entities]
    assert "S2 + T4" in labels and "T3 + S6" in labels


def test_merge_adjacent_defaults():
    _, _, h = _hierarchy(True)
    for t in h.trails:
        once = merge_adjacent(t)
        assert merge_adjacent(once) == once
        assert {r.term for r in once.single_refs()} == {r.term for r in t.single_refs()}
    truck = h.trucks[0]
    assert merge_adjacent(truck) == truck  # nothing but single entities and one branch point


def _branch_consistency(h):
    for t in h.trails:
        if t.parent is None:
            continue
        parent = h.trail(t.parent[0])
        shown = [e for e in parent.entities if e.kind == BRANCH and not e.origin and e.via == (t.links[0],)]
        assert len(shown) == 1
        assert complement(t.origin_complement).terms == shown[0].represents.terms


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 17])
def test_seeds_give_valid_hierarchies(seed):
    topo, tree, h = _hierarchy(True, seed)
    assert len(h.placement) == 14
    _branch_consistency(h)
    assert h == build_trails(tree, topo, seed)


@settings(max_examples=40)
@given(st.integers(0, 100_000), st.integers(0, 5), st.sampled_from([STRICT, RELAXED]))
def test_random_hierarchies(seed, trail_seed, mode):
    topo, demands = random_instance(seed, n_demands=(3, 8), chord_prob=0.35)
    design = form_groups(solve_spp(topo, demands), mode)
    for tree in design.trees.values():
        h = build_trails(tree, topo, trail_seed)
        assert len(h.placement) == 2 * len(tree.members)
        links = [l for t in h.trails for l in t.all_links()]
        assert len(links) == len(set(links)) and set(links) == set(tree.tree_links)
        _branch_consistency(h)
        for t in h.trails:
            if t.level == 0:
                # truck reaches leaves at both ends
                cg = CodingGraph(topo, tree.routes, tree.separation_points)
                assert len(cg.adj[t.vertices[0]]) == 1 and len(cg.adj[t.vertices[-1]]) == 1
