"""Coded path protection built from a shared path protection design.

The pipeline routes each demand on a link-disjoint primary/protection pair,
groups demands whose protection signals can be XOR-coded together, removes
cycles from each group's protection topology, lays the resulting trees out
as linear coding trails, and checks every single-link failure for
recoverability at both ends of each affected demand.
"""

from .cycles import RELAXED, STRICT, ProtectionTree, cep_basic, cep_extended, eliminate_cycles, find_cycle
from .dot import export_dot
from .grouping import (
    CodingGroup,
    CppDesign,
    TooLarge,
    Violation,
    brute_force_groups,
    extra_capacity,
    form_groups,
    validate_group,
)
from .netmodel import (
    Demand,
    Link,
    NoDisjointPair,
    Path,
    PathPair,
    Topology,
    TopologyError,
    build_topology,
    disjoint_pair,
    link_disjoint,
    load_demands,
    load_topology,
    serialize_topology,
)
from .parity import SymbolAtom, SymbolExpr, diversity_decode, diversity_encode, in_span, span_witness
from .pipeline import MetricsReport, RunConfig, run_pipeline
from .spp import SpareUnit, SppSolution, scap, solve_spp
from .trails import MalformedTree, Trail, TrailEntity, TrailHierarchy, build_trails, complement, merge_adjacent
from .verify import FailureReport, UnknownLink, simulate_failure, steady_state, tree_steady_state, verify_all

__all__ = [name for name in dir() if not name.startswith("_")]
