"""
Regrouping shared protection into coding groups
===============================================

Four unit demands on a small mesh. Shared path protection lets demand 3
share a spare unit with demand 1 on link 5 because their primaries never
fail together. Coding needs more than that: both primaries must also stay
clear of each other's protection paths. Here the conversion pairs 3 with 4
and 1 with 2, and it costs no extra capacity.
"""

from cppweave import extra_capacity, form_groups, solve_spp, verify_all
from cppweave.scenarios import four_demand_regroup

topo, demands, _ = four_demand_regroup()
sol = solve_spp(topo, demands)

# Routes picked by the joint disjoint-pair router
for d, pair in sol.pairs.items():
    print(f"demand {d}: primary {'-'.join(pair.primary.nodes):14s} protection {'-'.join(pair.protection.nodes)}")

# Spare units on the busiest link
for unit in sol.spare[5]:
    print(f"link 5 unit {unit.unit_index}: shared by {sorted(unit.sharers)}")
print("SPP spare capacity:", sol.spare_cost())

#############################################################################
# Greedy conversion: start from singletons, merge the pair that saves most.

design = form_groups(sol, "strict")
print("coding groups:", design.partition())
print("CPP protection capacity:", design.total_capacity())
print("extra capacity:", extra_capacity(design))

#############################################################################
# Cut every link once and check both ends of every affected demand.

result = verify_all(design)
print("verification:", "PASS" if result.passed else "FAIL")
