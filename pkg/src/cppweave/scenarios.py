"""Small hand-built instances used by the tests, demos and CLI samples.

Each returns ``(topology, demands, pairs)``; ``pairs`` is None when the
disjoint-pair router is expected to find the intended routes itself.
"""

from __future__ import annotations

import networkx as nx

from .netmodel import Demand, Path, PathPair, Topology, build_topology

Scenario = tuple[Topology, list[Demand], "dict[int, PathPair] | None"]


def four_demand_regroup() -> Scenario:
    """Four unit demands where SPP shares demand 3 with demand 1 on link 5,
    but coding must pair 3 with 4 and 1 with 2.

    Primaries of 1 and 4 share M-N, primaries of 2 and 3 share P-Q; all
    protections pass through the X-Y corridor (link 5 is X-Y). All links
    have length 1.
    """
    edges = (
        "S1-A A-X S2-A S3-X X-Y Y-B B-D1 X-C C-D2 S4-X Y-E E-D3 E-D4 "
        "S1-M M-N N-D1 S4-M N-D4 S2-P P-Q Q-D2 S3-P Q-D3"
    ).split()
    topo = build_topology((i, *e.split("-"), 1) for i, e in enumerate(edges, start=1))
    demands = [Demand(i, f"S{i}", f"D{i}") for i in range(1, 5)]
    return topo, demands, None


def five_demand_ring() -> Scenario:
    """Ring A-B-C-D-E whose five protection routes cover every ring link twice.

    Link 1 (A-B) is the longest ring link at 10. Each primary runs over a
    private relay node, so all five demands may share one coding group.
    """
    ring = [(1, "A", "B", 10), (2, "B", "C", 3), (3, "C", "D", 4), (4, "D", "E", 5), (5, "E", "A", 6)]
    routes = [
        ("A", "C", ["A", "B", "C"]),
        ("E", "B", ["E", "A", "B"]),
        ("B", "D", ["B", "C", "D"]),
        ("C", "E", ["C", "D", "E"]),
        ("D", "A", ["D", "E", "A"]),
    ]
    return _relayed(ring, routes, first_relay_link=10)


# trunk A..F with the branch D-G-H-{I, J-{K, L}} and the stub C-M
BRANCHING_TREE = [
    (1, "A", "B", 10), (2, "B", "C", 10), (3, "C", "D", 10), (4, "D", "E", 10), (5, "E", "F", 10),
    (6, "C", "M", 1), (7, "D", "G", 5), (8, "G", "H", 4), (9, "H", "I", 3),
    (10, "H", "J", 2), (11, "J", "K", 1), (12, "J", "L", 1),
]
BRANCHING_ENDS = {
    1: ("A", "E"), 2: ("B", "F"), 3: ("I", "M"), 4: ("E", "B"),
    5: ("F", "L"), 6: ("C", "K"), 7: ("G", "I"),
}


def branching_tree(with_inner_demand: bool = False) -> Scenario:
    """Six demands protected over one tree; demand 7 (optional) lives wholly in the D-G branch.

    Protection routes are the tree paths between the end nodes; primaries
    run over private relays, so the coding group holds every demand and the
    protection topology is the tree itself.
    """
    ids = range(1, 8 if with_inner_demand else 7)
    g = nx.Graph()
    g.add_weighted_edges_from((a, b, w) for _, a, b, w in BRANCHING_TREE)
    routes = []
    for i in ids:
        s, t = BRANCHING_ENDS[i]
        routes.append((s, t, nx.shortest_path(g, s, t)))
    return _relayed(BRANCHING_TREE, routes, first_relay_link=100)


def _relayed(base, routes, first_relay_link: int) -> Scenario:
    links = list(base)
    lid = first_relay_link
    for i, (s, t, _) in enumerate(routes, start=1):
        links += [(lid, s, f"R{i}", 1), (lid + 1, f"R{i}", t, 1)]
        lid += 2
    topo = build_topology(links)
    demands, pairs = [], {}
    for i, (s, t, prot) in enumerate(routes, start=1):
        demands.append(Demand(i, s, t))
        pairs[i] = PathPair(i, Path.from_nodes(topo, [s, f"R{i}", t]), Path.from_nodes(topo, prot))
    return topo, demands, pairs
