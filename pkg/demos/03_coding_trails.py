"""
Laying a protection tree out as coding trails
=============================================

Seven demands protected over one tree: a trunk A..F with a branch hanging
off D. The truck trail runs edge to edge along the trunk; the branch holds
several end nodes, so on the truck it shows up as one merged entity and
gets its own branch trail. Demand 7 lives entirely inside the branch, so it
cancels out of the merged entity and is placed on the branch trail.
"""

from pathlib import Path

from cppweave import build_trails, export_dot, solve_spp, steady_state
from cppweave.cycles import initial_tree
from cppweave.grouping import CppDesign
from cppweave.scenarios import branching_tree

topo, demands, pairs = branching_tree(with_inner_demand=True)
tree = initial_tree(1, pairs, pairs, "strict")
hierarchy = build_trails(tree, topo)

for t in hierarchy.trails:
    head = f"trail {t.trail_id} (level {t.level}): {'-'.join(t.nodes)}"
    if t.origin_complement is not None:
        head += f"   origin {t.origin_complement}"
    print(head)
    for e in t.entities:
        if not e.origin:
            print(f"    {e.kind:15s} at {e.node}: {e.label}")

#############################################################################
# What every link carries when nothing has failed

signals = steady_state(hierarchy, topo)
for (link, sender), expr in signals.items():
    if link in (3, 7):
        print(f"link {link} from {sender}: {expr}")

#############################################################################
# Graphviz output

sol = solve_spp(topo, demands, pairs)
out = Path(__file__).with_name("out")
out.mkdir(exist_ok=True)
for name, text in export_dot(CppDesign(sol, "strict", [tree]), [hierarchy]).items():
    (out / f"{name}.dot").write_text(text)
print("wrote", sorted(p.name for p in out.glob("*.dot")))
