from __future__ import annotations

import json
import subprocess
import sys

import pydot
import pytest

from cppweave.cli import main
from cppweave.dot import export_dot
from cppweave.cycles import STRICT, initial_tree
from cppweave.grouping import CppDesign
from cppweave.netmodel import Demand, build_topology, serialize_topology
from cppweave.pipeline import RunConfig, run_pipeline
from cppweave.scenarios import branching_tree, four_demand_regroup
from cppweave.spp import SppSolution, solve_spp
from cppweave.trails import build_trails


def write_instance(tmp_path, topo, demands, name="net", fmt="text"):
    p = tmp_path / f"{name}.{'json' if fmt == 'json' else 'txt'}"
    p.write_text(serialize_topology(topo, demands, fmt))
    return str(p)


@pytest.fixture
def regroup_file(tmp_path):
    topo, demands, _ = four_demand_regroup()
    return write_instance(tmp_path, topo, demands)


def test_solve_stage(tmp_path, capsys):
    sq = build_topology([(1, "A", "B", 1), (2, "B", "C", 1), (3, "C", "D", 1), (4, "D", "A", 1)])
    f = write_instance(tmp_path, sq, [Demand(1, "A", "C")])
    assert main(["solve", "--topology", f, "--demands", f, "--out", str(tmp_path / "o")]) == 0
    assert "SCaP 50.00%" in capsys.readouterr().out
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["spp.json"]


def test_all_strict_regroup(regroup_file, tmp_path, capsys):
    out = tmp_path / "o"
    code = main(["all", "--topology", regroup_file, "--demands", regroup_file, "--mode", "strict", "--out", str(out)])
    text = capsys.readouterr().out
    assert code == 0
    assert "verification             PASS" in text
    report = json.loads((out / "report.json").read_text())
    assert report["extra_capacity"] == 0 and report["verification"] == "PASS"
    assert report["group_sizes"] == [2, 2]
    names = sorted(p.name for p in out.iterdir())
    assert names == [
        "design.json", "group_1_trails.dot", "group_3_trails.dot", "report.json",
        "spp.json", "topology.dot", "trails.json", "verification.json",
    ]


def test_report_recount_from_artifacts(regroup_file, tmp_path):
    res = run_pipeline(RunConfig(regroup_file, regroup_file, out=str(tmp_path / "o")))
    art = {k: v for k, v in res.artifacts.items()}
    topo = res.spp.topology
    spp = SppSolution.from_dict(json.loads(art["spp.json"]), topo)
    design = json.loads(art["design.json"])
    report = json.loads(art["report.json"])
    spare = sum(topo.length(int(l)) * len(u) for l, u in json.loads(art["spp.json"])["spare"].items())
    working = sum(topo.length(l) for p in spp.pairs.values() for l in p.primary.links)
    cpp = sum(topo.length(int(l)) * u for l, u in design["link_capacity"].items())
    assert report["spp_spare"] == spare and report["working"] == working
    assert report["cpp_protection"] == cpp
    assert report["extra_capacity"] == cpp - spare
    assert report["scap_cpp"] == pytest.approx(100 * cpp / (cpp + working))
    assert 0 <= report["scap_spp"] <= 100


def test_json_input(tmp_path):
    topo, demands, _ = four_demand_regroup()
    f = write_instance(tmp_path, topo, demands, fmt="json")
    assert run_pipeline(RunConfig(f, f)).exit_code == 0


def test_infeasible_routing(tmp_path, capsys):
    path = build_topology([(1, "A", "B", 1), (2, "B", "C", 1)])
    f = write_instance(tmp_path, path, [Demand(4, "A", "C")])
    assert main(["all", "--topology", f, "--demands", f]) == 3
    err = capsys.readouterr().err
    assert "demand 4" in err and "solve" in err


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("node A\nlink 1 A Z 1\n")
    assert main(["all", "--topology", str(bad), "--demands", str(bad)]) == 4
    assert "line 2" in capsys.readouterr().err
    assert main(["all", "--topology", str(tmp_path / "missing.txt"), "--demands", str(bad)]) == 4


def test_partial_artifacts_survive(regroup_file, tmp_path, monkeypatch):
    import cppweave.pipeline as pl

    def boom(*args, **kwargs):
        raise RuntimeError("trail construction broke")

    monkeypatch.setattr(pl, "build_trails", boom)
    out = tmp_path / "o"
    res = run_pipeline(RunConfig(regroup_file, regroup_file, out=str(out)))
    assert res.error.stage == "convert" and "trail construction broke" in str(res.error)
    assert res.exit_code == 1
    assert sorted(p.name for p in out.iterdir()) == ["design.json", "spp.json"]


def test_stage_order_and_env_seed(regroup_file, tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("CPPWEAVE_SEED", "5")
    out = tmp_path / "o"
    assert main(["verify", "--topology", regroup_file, "--demands", regroup_file, "--seed", "1", "--out", str(out)]) == 0
    assert "verification PASS" in capsys.readouterr().out
    assert not (out / "report.json").exists()
    assert (out / "verification.json").exists()
    res = run_pipeline(RunConfig(regroup_file, regroup_file, seed=5))
    assert res.artifacts["trails.json"] == (out / "trails.json").read_text()


def test_verification_failure_exit_code(regroup_file, monkeypatch):
    import cppweave.pipeline as pl

    def broken(sol, mode):
        pairs = sol.pairs
        return CppDesign(sol, mode, [initial_tree(2, [2], pairs, mode)])  # demands 1, 3, 4 unprotected

    monkeypatch.setattr(pl, "form_groups", broken)
    res = run_pipeline(RunConfig(regroup_file, regroup_file))
    assert res.exit_code == 2 and res.report.verification == "FAIL"


def test_determinism(regroup_file, tmp_path):
    a = run_pipeline(RunConfig(regroup_file, regroup_file, seed=3, out=str(tmp_path / "a")))
    b = run_pipeline(RunConfig(regroup_file, regroup_file, seed=3, out=str(tmp_path / "b")))
    assert a.artifacts == b.artifacts
    for name in a.artifacts:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_module_entry_point(regroup_file):
    r = subprocess.run(
        [sys.executable, "-m", "cppweave.cli", "report", "--topology", regroup_file, "--demands", regroup_file],
        capture_output=True, text=True,
    )
    assert r.returncode == 0 and "extra capacity" in r.stdout


def test_single_demand_dot():
    sq = build_topology([(1, "A", "B", 1), (2, "B", "C", 1), (3, "C", "D", 1), (4, "D", "A", 1)])
    sol = solve_spp(sq, [Demand(1, "A", "C")])
    tree = initial_tree(1, [1], sol.pairs, STRICT)
    docs = export_dot(CppDesign(sol, STRICT, [tree]), [build_trails(tree, sq)])
    (g,) = pydot.graph_from_dot_data(docs["topology"])
    styles = [e.get_style() for e in g.get_edges() if e.get_style() in ("solid", "dashed")]
    assert sorted(styles) == ["dashed", "dashed", "solid", "solid"]


def test_branch_dot_labels():
    topo, _, pairs = branching_tree(True)
    sol = solve_spp(topo, [Demand(d, p.primary.source, p.primary.target) for d, p in pairs.items()], pairs)
    tree = initial_tree(1, pairs, pairs, STRICT)
    docs = export_dot(CppDesign(sol, STRICT, [tree]), {1: build_trails(tree, topo)})
    text = docs["group_1_trails"]
    assert "origin: T'3 + S'5 + S'6" in text
    for doc in docs.values():
        graphs = pydot.graph_from_dot_data(doc)
        assert graphs and len(graphs) == 1
    (g,) = pydot.graph_from_dot_data(text)
    assert len(g.get_subgraphs()) == 3
