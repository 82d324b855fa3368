"""
Breaking a protection cycle
===========================

Five demands whose protection routes go around a five-link ring, each
covering two consecutive links. Coded together, the ring is a cycle and the
parities would circulate forever. Emptying the longest link and sending its
traffic the other way round turns the ring into a path and frees that
link's capacity.
"""

from cppweave import find_cycle, form_groups, solve_spp
from cppweave.scenarios import five_demand_ring

topo, demands, pairs = five_demand_ring()
sol = solve_spp(topo, demands, pairs)
print("ring lengths:", {l: topo.length(l) for l in range(1, 6)})
print("SPP spare capacity:", sol.spare_cost())

design = form_groups(sol, "strict")
(tree,) = design.trees.values()
for r in tree.removed_links:
    print(f"removed link {r.link_id}, saving {r.saving:g}")
print("cycle left:", find_cycle(topo, tree.tree_links))

# Demand 1 used to go A-B-C; it now goes the long way round
print("demand 1 route:", "-".join(tree.routes[1].nodes))
print("CPP protection capacity:", design.total_capacity(), "(was", sol.spare_cost(), "in SPP)")
