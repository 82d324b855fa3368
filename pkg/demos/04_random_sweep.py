"""
Strict versus relaxed conversion on random meshes
=================================================

A sweep over seeded random ring-plus-chord topologies. For each instance we
route shared protection, convert it to coded protection in both modes and
compare spare capacity percentages, the greedy/exhaustive gap, and how
often relaxed mode has to fall back to dedicated protection.
"""

import numpy as np

from cppweave import brute_force_groups, form_groups, scap, solve_spp, verify_all
from cppweave.instances import random_instance
from cppweave.spp import scap_from_totals

rows = []
for seed in range(40):
    topo, demands = random_instance(seed, n_demands=(3, 8), chord_prob=0.3)
    sol = solve_spp(topo, demands)
    row = [scap(sol).percent]
    for mode in ("strict", "relaxed"):
        g = form_groups(sol, mode)
        b = brute_force_groups(sol, mode)
        assert verify_all(g).passed
        row += [
            scap_from_totals(g.total_capacity(), sol.working_cost()).percent,
            g.total_capacity() - b.total_capacity(),
            len(g.apsed),
        ]
    rows.append(row)

data = np.array(rows)
print("mean SCaP  SPP %.1f%%   CPP strict %.1f%%   CPP relaxed %.1f%%" % tuple(data[:, [0, 1, 4]].mean(axis=0)))
print("greedy gap  strict: max %g, nonzero on %d   relaxed: max %g, nonzero on %d" % (
    data[:, 2].max(), (data[:, 2] > 0).sum(), data[:, 5].max(), (data[:, 5] > 0).sum()))
print("dedicated fallbacks in relaxed mode:", int(data[:, 6].sum()))
