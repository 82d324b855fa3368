"""Seeded random instances: a Hamiltonian ring with chords plus random demands."""

from __future__ import annotations

import random

from .netmodel import Demand, Link, Topology


def random_instance(
    seed: int,
    n_nodes: tuple[int, int] = (6, 12),
    n_demands: tuple[int, int] = (2, 6),
    lengths: tuple[int, int] = (1, 10),
    chord_prob: float = 0.25,
) -> tuple[Topology, list[Demand]]:
    """A 2-edge-connected topology and a set of distinct unit demands.

    The ring through all nodes guarantees a disjoint pair for every demand;
    chords are added independently with ``chord_prob``.
    """
    rng = random.Random(seed)
    n = rng.randint(*n_nodes)
    names = [f"n{k}" for k in range(n)]
    edges = {(k, (k + 1) % n) for k in range(n)}
    for i in range(n):
        for j in range(i + 2, n):
            if (i, j) != (0, n - 1) and rng.random() < chord_prob:
                edges.add((i, j))
    links = [
        Link(lid, names[min(i, j)], names[max(i, j)], float(rng.randint(*lengths)))
        for lid, (i, j) in enumerate(sorted(tuple(sorted(e)) for e in edges), start=1)
    ]
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    chosen = rng.sample(pairs, min(rng.randint(*n_demands), len(pairs)))
    demands = [Demand(k, names[i], names[j]) for k, (i, j) in enumerate(sorted(chosen), start=1)]
    return Topology(names, links), demands
