"""parcut: a parallel primal-dual solver for minimum-cost multicut.

Positive edge costs pull endpoints into one cluster, negative costs push
them apart; the solver looks for a node partition minimizing the total
cost of edges between clusters, and reports a dual lower bound alongside.
"""

from .contraction import (
    ContractionMapping,
    ContractionResult,
    connected_components,
    contract,
    contract_graph,
    contraction_step,
    gaec_exhaustive,
    select_matching,
    select_max_edge,
    select_spanning_forest_no_conflicts,
)
from .dual import (
    MC_TRIANGLE,
    ConflictedCycle,
    DualState,
    Triplet,
    check_edge_triangle_agreement,
    lower_bound,
    message_passing_iteration,
    mp_edge_to_triplets,
    mp_triplets_to_edges,
    reparametrized_edge_costs,
    reparametrized_graph,
    separate_conflicted_cycles,
    triangle_min_marginal,
    triangulate,
)
from .generate import grid_graph, random_graph
from .graph import (
    ParseError,
    SparseAdjacency,
    WeightedGraph,
    build_adjacency,
    canonical_labels,
    clustering_cost,
    parse_instance,
    serialize_instance,
)
from .oracle import (
    OracleResult,
    brute_force_optimum,
    enumerate_conflicted_cycles_exhaustive,
    naive_contract,
    naive_gaec,
)
from .solver import MODES, RoundRecord, Solution, SolverConfig, dual_bound, solve

__version__ = "0.1.0"

__all__ = [
    "MC_TRIANGLE",
    "MODES",
    "ConflictedCycle",
    "ContractionMapping",
    "ContractionResult",
    "DualState",
    "OracleResult",
    "ParseError",
    "RoundRecord",
    "Solution",
    "SolverConfig",
    "SparseAdjacency",
    "Triplet",
    "WeightedGraph",
    "brute_force_optimum",
    "build_adjacency",
    "canonical_labels",
    "check_edge_triangle_agreement",
    "clustering_cost",
    "connected_components",
    "contract",
    "contract_graph",
    "contraction_step",
    "dual_bound",
    "enumerate_conflicted_cycles_exhaustive",
    "gaec_exhaustive",
    "grid_graph",
    "lower_bound",
    "message_passing_iteration",
    "mp_edge_to_triplets",
    "mp_triplets_to_edges",
    "naive_contract",
    "naive_gaec",
    "parse_instance",
    "random_graph",
    "reparametrized_edge_costs",
    "reparametrized_graph",
    "select_matching",
    "select_max_edge",
    "select_spanning_forest_no_conflicts",
    "separate_conflicted_cycles",
    "serialize_instance",
    "solve",
    "triangle_min_marginal",
    "triangulate",
]
