"""Solver driver: recursive primal-dual contraction and the mode dispatch.

Modes: P (pure primal contraction), PD and PD+ (cycle separation, message
passing, reparametrized contraction, then a greedy cleanup), D (dual bound
only), GAEC (greedy additive edge contraction).
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import dual as _dual
from .contraction import (
    ContractionMapping,
    contract_graph,
    contraction_step,
    gaec_exhaustive,
)
from .graph import clustering_cost

MODES = ("P", "PD", "PD+", "D", "GAEC")

_CYCLE_LENGTH_DEFAULTS = {"P": 5, "PD": 5, "PD+": 7, "D": 5, "GAEC": 5}


@dataclass
class SolverConfig:
    """Solver settings.

    max_cycle_length of None resolves to the mode default (7 for PD+,
    5 otherwise).  threads of None resolves to machine parallelism at the
    CLI layer; the solver itself is deterministic for any value.
    """

    mode: str = "PD"
    mp_iterations: int = 5
    max_cycle_length: int = None
    matching_switch_fraction: float = 0.1
    max_rounds: int = 100
    separation_rounds: int = 1
    seed: int = 0
    threads: int = None

    def resolved_cycle_length(self):
        if self.max_cycle_length is None:
            return _CYCLE_LENGTH_DEFAULTS.get(self.mode, 5)
        return int(self.max_cycle_length)

    def validate(self):
        if self.mode not in MODES:
            raise ValueError("unknown mode %r, expected one of %s" % (self.mode, ", ".join(MODES)))
        if self.mode in ("PD", "PD+", "D") and self.mp_iterations < 1:
            raise ValueError("mp_iterations must be at least 1 for dual modes")
        if self.resolved_cycle_length() < 3:
            raise ValueError("max_cycle_length must be at least 3")
        if not (0.0 < self.matching_switch_fraction <= 1.0):
            raise ValueError("matching_switch_fraction must be in (0, 1]")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be at least 1")
        if self.separation_rounds < 1:
            raise ValueError("separation_rounds must be at least 1")


@dataclass
class RoundRecord:
    round_index: int
    phase: str
    nodes: int
    edges: int
    triplets: int
    lb: float
    lb_valid: bool
    contracted: int
    time_ms: float


@dataclass
class Solution:
    """Final labeling over the original nodes plus bookkeeping.

    primal_cost is evaluated against the original costs.  lower_bound is
    the first-round dual bound for PD/PD+/D and -inf for the purely primal
    modes; later rounds' bounds apply to the contracted problems only and
    sit in the trace flagged lb_valid=False.
    """

    labeling: np.ndarray
    primal_cost: float
    lower_bound: float
    trace: list = field(default_factory=list)


def _solve_gaec(g, cfg):
    t0 = time.perf_counter()
    mapping, _ = gaec_exhaustive(g)
    labeling = mapping.map.copy()
    cost = clustering_cost(g, labeling)
    rec = RoundRecord(
        1,
        "gaec",
        g.num_nodes,
        g.num_edges,
        0,
        None,
        False,
        g.num_nodes - mapping.num_targets,
        (time.perf_counter() - t0) * 1000.0,
    )
    return Solution(labeling, cost, float("-inf"), [rec])


def _solve_primal(g, cfg):
    f_total = ContractionMapping.identity(g.num_nodes)
    cur = g
    trace = []
    for rnd in range(1, cfg.max_rounds + 1):
        t0 = time.perf_counter()
        nodes_before = cur.num_nodes
        edges_before = cur.num_edges
        nxt, f, _ = contraction_step(
            cur, "auto", cfg.seed, cfg.matching_switch_fraction
        )
        trace.append(
            RoundRecord(
                rnd,
                "contract",
                nodes_before,
                edges_before,
                0,
                None,
                False,
                nodes_before - f.num_targets,
                (time.perf_counter() - t0) * 1000.0,
            )
        )
        if f.is_identity:
            break
        f_total = f_total.then(f)
        cur = nxt
        if cur.num_nodes <= 1:
            break
    labeling = f_total.map.copy()
    return Solution(labeling, clustering_cost(g, labeling), float("-inf"), trace)


def _solve_primal_dual(g, cfg):
    L = cfg.resolved_cycle_length()
    f_total = ContractionMapping.identity(g.num_nodes)
    cur = g
    lb = None
    trace = []
    for rnd in range(1, cfg.max_rounds + 1):
        t0 = time.perf_counter()
        nodes_before = cur.num_nodes
        edges_before = cur.num_edges
        lengths, mat = _dual._separate_arrays(cur, L)
        state = _dual._triangulate_arrays(cur, lengths, mat)
        for _ in range(cfg.mp_iterations):
            _dual.message_passing_iteration(state)
        lb_round = _dual.lower_bound(state)
        if rnd == 1:
            lb = lb_round
        g_rep = _dual.reparametrized_graph(state)
        nxt, f, _ = contraction_step(
            g_rep, "auto", cfg.seed, cfg.matching_switch_fraction
        )
        trace.append(
            RoundRecord(
                rnd,
                "primal-dual",
                nodes_before,
                edges_before,
                state.num_triplets,
                lb_round,
                rnd == 1,
                nodes_before - f.num_targets,
                (time.perf_counter() - t0) * 1000.0,
            )
        )
        if f.is_identity:
            break
        f_total = f_total.then(f)
        cur = nxt
        if cur.num_nodes <= 1:
            break
    # cleanup: rebuild the quotient from original costs and run greedy
    # contraction to exhaustion, recovering joins that message passing
    # drove to exactly zero
    t0 = time.perf_counter()
    quotient, _ = contract_graph(g, f_total)
    mapping_c, _ = gaec_exhaustive(quotient)
    f_final = f_total.then(mapping_c)
    labeling = f_final.map.copy()
    trace.append(
        RoundRecord(
            len(trace) + 1,
            "cleanup",
            quotient.num_nodes,
            quotient.num_edges,
            0,
            None,
            False,
            quotient.num_nodes - mapping_c.num_targets,
            (time.perf_counter() - t0) * 1000.0,
        )
    )
    return Solution(labeling, clustering_cost(g, labeling), lb, trace)


def _solve_dual(g, cfg):
    L = cfg.resolved_cycle_length()
    trace = []
    state = None
    lb = None
    for rnd in range(1, cfg.separation_rounds + 1):
        t0 = time.perf_counter()
        if state is None:
            lengths, mat = _dual._separate_arrays(g, L)
            state = _dual._triangulate_arrays(g, lengths, mat)
        else:
            _dual.extend_separation(state, L)
        for _ in range(cfg.mp_iterations):
            _dual.message_passing_iteration(state)
        lb = _dual.lower_bound(state)
        trace.append(
            RoundRecord(
                rnd,
                "dual",
                g.num_nodes,
                state.num_edges,
                state.num_triplets,
                lb,
                True,
                0,
                (time.perf_counter() - t0) * 1000.0,
            )
        )
    labeling = np.arange(g.num_nodes, dtype=np.int64)
    return Solution(labeling, clustering_cost(g, labeling), lb, trace)


def solve(g, cfg):
    """Run the solver in the configured mode; see SolverConfig and Solution."""
    cfg.validate()
    if cfg.mode == "GAEC":
        return _solve_gaec(g, cfg)
    if cfg.mode == "P":
        return _solve_primal(g, cfg)
    if cfg.mode == "D":
        return _solve_dual(g, cfg)
    return _solve_primal_dual(g, cfg)


def dual_bound(g, cfg):
    """Lower bound from separation plus message passing (mode D only)."""
    if cfg.mode != "D":
        raise ValueError("dual_bound requires mode D")
    return solve(g, cfg).lower_bound
