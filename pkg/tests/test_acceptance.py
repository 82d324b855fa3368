"""One test per acceptance criterion; each prints a single PASS/FAIL line."""

from __future__ import annotations

import contextlib
import itertools
import time

import numpy as np

from cppweave.cycles import RELAXED, STRICT, find_cycle, initial_tree
from cppweave.grouping import brute_force_groups, extra_capacity, form_groups
from cppweave.instances import random_instance
from cppweave.netmodel import serialize_topology
from cppweave.parity import diversity_decode, diversity_encode
from cppweave.pipeline import RunConfig, run_pipeline
from cppweave.scenarios import branching_tree, five_demand_ring, four_demand_regroup
from cppweave.spp import solve_spp
from cppweave.trails import BRANCH, build_trails
from cppweave.verify import verify_all

from oracles import activation
from acceptance_log import LINES

N_RANDOM = 100


@contextlib.contextmanager
def criterion(number: int, title: str):
    t0 = time.perf_counter()
    notes: list[str] = []
    ok = False
    try:
        yield notes
        ok = True
    finally:
        dt = time.perf_counter() - t0
        extra = f" [{'; '.join(notes)}]" if notes else ""
        LINES.append(f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}: {title} ({dt:.2f}s){extra}")


def _instance_files(tmp_path, seed):
    topo, demands = random_instance(seed, n_nodes=(6, 12), n_demands=(2, 6))
    f = tmp_path / f"inst{seed}.txt"
    f.write_text(serialize_topology(topo, demands))
    return str(f)


def test_criterion_1_regroup_without_extra_capacity():
    with criterion(1, "four-demand conversion gives {1,2},{3,4} with zero extra capacity") as notes:
        t0 = time.perf_counter()
        topo, demands, _ = four_demand_regroup()
        sol = solve_spp(topo, demands)
        design = form_groups(sol, STRICT)
        elapsed = time.perf_counter() - t0
        # in SPP demand 3 shares a spare unit with demand 1 on link 5
        assert any(u.sharers == {1, 3} for u in sol.spare[5])
        assert design.partition() == ((1, 2), (3, 4))
        assert extra_capacity(design) == 0
        assert verify_all(design).passed
        notes.append(f"extra={extra_capacity(design):g}, runtime {elapsed:.3f}s")
        assert elapsed < 1.0


def test_criterion_2_ring_cycle_elimination():
    with criterion(2, "ring CEP removes the longest link and saves its length") as notes:
        t0 = time.perf_counter()
        topo, demands, pairs = five_demand_ring()
        sol = solve_spp(topo, demands, pairs)
        design = form_groups(sol, STRICT)
        elapsed = time.perf_counter() - t0
        (tree,) = design.trees.values()
        ring = initial_tree(1, pairs, pairs, STRICT).tree_links
        longest = max(sorted(ring), key=topo.length)
        assert [r.link_id for r in tree.removed_links] == [longest] == [1]
        assert find_cycle(topo, tree.tree_links) is None
        assert tree.savings() == topo.length(longest) * 1
        assert verify_all(design).passed
        notes.append(f"removed link {longest}, saving {tree.savings():g}")
        assert elapsed < 1.0


def test_criterion_3_trail_construction():
    with criterion(3, "branching-tree trails place every end node once; branch origin T'3 + S'5 + S'6") as notes:
        t0 = time.perf_counter()
        for inner in (False, True):
            topo, _, pairs = branching_tree(inner)
            tree = initial_tree(1, pairs, pairs, STRICT)
            h = build_trails(tree, topo)
            assert len(h.placement) == 2 * len(tree.members)
            singles = sorted(r.term for t in h.trails for r in t.single_refs())
            assert singles == sorted(h.placement)
            truck = h.trucks[0]
            branch = h.children(truck.trail_id)[0]
            assert str(branch.origin_complement) == "T'3 + S'5 + S'6"
            assert [e.node for e in truck.entities if e.kind == BRANCH] == ["D"]
            if inner:
                truck_terms = {r.term for e in truck.entities for r in e.represents}
                assert not truck_terms & {(7, "S"), (7, "T")}
                assert h.placement[(7, "S")] == h.placement[(7, "T")] == branch.trail_id
        elapsed = time.perf_counter() - t0
        notes.append(f"{len(h.trails)} trails for 7 demands")
        assert elapsed < 1.0


def _run_random(tmp_path, mode, seed):
    failures = []
    for k in range(N_RANDOM):
        f = _instance_files(tmp_path, k)
        res = run_pipeline(RunConfig(f, f, mode=mode, seed=seed, stage="verify"))
        assert res.error is None, res.error
        if res.exit_code != 0:
            failures.append((k, res.verification.unrecovered()))
    return failures


def test_criterion_4_exhaustive_recovery(tmp_path):
    with criterion(4, f"{N_RANDOM} random instances, every single-link failure recovered, both modes") as notes:
        t0 = time.perf_counter()
        for mode in (STRICT, RELAXED):
            failures = _run_random(tmp_path, mode, 0)
            notes.append(f"{mode}: {len(failures)} failing")
            assert failures == []
        elapsed = time.perf_counter() - t0
        notes.append(f"runtime {elapsed:.1f}s")
        assert elapsed < 300


def test_criterion_5_oracle_bound():
    with criterion(5, "exhaustive grouping <= greedy, both verify, relaxed <= strict") as notes:
        gaps = []
        instances = 0
        for k in itertools.count():
            if instances == 25:
                break
            topo, demands = random_instance(1000 + k, n_demands=(3, 8), chord_prob=0.35)
            if len(demands) > 8:
                continue
            instances += 1
            sol = solve_spp(topo, demands)
            totals = {}
            for mode in (STRICT, RELAXED):
                g, b = form_groups(sol, mode), brute_force_groups(sol, mode)
                assert b.total_capacity() <= g.total_capacity() + 1e-9
                assert verify_all(g).passed and verify_all(b).passed
                totals[mode] = (g.total_capacity(), b.total_capacity())
                gaps.append(g.total_capacity() - b.total_capacity())
            assert totals[RELAXED][1] <= totals[STRICT][1] + 1e-9
            assert totals[RELAXED][0] <= totals[STRICT][0] + 1e-9
        notes.append(f"{instances} instances, greedy gap max {max(gaps):g}, mean {np.mean(gaps):.2f}, zero on {sum(g == 0 for g in gaps)}/{len(gaps)}")


def test_criterion_6_spp_validity():
    with criterion(6, "spare-unit sharers are failure-disjoint and unit counts match peak activation") as notes:
        checked = 0
        cases = [four_demand_regroup()[:2]] + [random_instance(k, n_demands=(2, 8), chord_prob=0.35) for k in range(150)]
        for topo, demands in cases:
            sol = solve_spp(topo, demands)
            for l, units in sol.spare.items():
                for u in units:
                    for i, j in itertools.combinations(sorted(u.sharers), 2):
                        assert sol.pairs[i].primary.link_set.isdisjoint(sol.pairs[j].primary.link_set)
                assert len(units) == activation(sol.pairs, l, topo)
                checked += 1
        notes.append(f"{checked} links checked")


def test_criterion_7_diversity_coding():
    with criterion(7, "1000 encode/erase/decode trials recover the erased vector") as notes:
        rng = np.random.default_rng(20240611)
        for _ in range(1000):
            n = int(rng.integers(1, 9))
            blocks = rng.integers(0, 2, size=(n, 64), dtype=np.uint8)
            i = int(rng.integers(1, n + 1))
            parity = diversity_encode(blocks)
            erased = blocks.copy()
            erased[i - 1] = 0  # the decoder must not look at the erased row
            assert np.array_equal(diversity_decode(erased, parity, i), blocks[i - 1])
        notes.append("1000/1000")


def test_criterion_8_determinism(tmp_path):
    with criterion(8, "byte-identical reruns; other trail seeds also verify") as notes:
        f = _instance_files(tmp_path, 7)
        a = run_pipeline(RunConfig(f, f, seed=11, out=str(tmp_path / "a")))
        b = run_pipeline(RunConfig(f, f, seed=11, out=str(tmp_path / "b")))
        assert a.artifacts and a.artifacts == b.artifacts
        for name in a.artifacts:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        for seed in (1, 2):
            for mode in (STRICT, RELAXED):
                assert _run_random(tmp_path, mode, seed) == []
        notes.append(f"{len(a.artifacts)} artifacts identical; seeds 1, 2 pass on {N_RANDOM} instances")
