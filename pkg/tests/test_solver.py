"""Solver driver: modes, bounds, determinism, and termination."""

import numpy as np
import pytest

from parcut import (
    ContractionMapping,
    SolverConfig,
    WeightedGraph,
    brute_force_optimum,
    clustering_cost,
    contract_graph,
    contraction_step,
    dual_bound,
    message_passing_iteration,
    naive_gaec,
    random_graph,
    separate_conflicted_cycles,
    solve,
    triangulate,
)
from parcut.dual import reparametrized_graph


def triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, -2.0)])


def pd_quotient_mapping(g, cfg):
    """Replay the main contraction loop to expose the pre-cleanup quotient."""
    L = cfg.resolved_cycle_length()
    f_total = ContractionMapping.identity(g.num_nodes)
    cur = g
    for _ in range(cfg.max_rounds):
        state = triangulate(separate_conflicted_cycles(cur, L), cur)
        for _ in range(cfg.mp_iterations):
            message_passing_iteration(state)
        nxt, f, _ = contraction_step(
            reparametrized_graph(state), "auto", cfg.seed,
            cfg.matching_switch_fraction,
        )
        if f.is_identity:
            break
        f_total = f_total.then(f)
        cur = nxt
        if cur.num_nodes <= 1:
            break
    return f_total


# ------------------------------------------------------------------ modes

def test_triangle_mode_p():
    sol = solve(triangle(), SolverConfig(mode="P"))
    assert sol.primal_cost == -1.0
    assert clustering_cost(triangle(), sol.labeling) == -1.0
    assert sol.lower_bound == float("-inf")


def test_triangle_mode_pd_single_mp_iteration():
    sol = solve(triangle(), SolverConfig(mode="PD", mp_iterations=1))
    assert sol.lower_bound == pytest.approx(-1.0, abs=1e-9)
    assert sol.primal_cost == -1.0


def test_triangle_mode_pd_plus():
    sol = solve(triangle(), SolverConfig(mode="PD+"))
    assert sol.primal_cost == -1.0
    assert sol.lower_bound == pytest.approx(-1.0, abs=1e-9)


def test_triangle_mode_gaec():
    sol = solve(triangle(), SolverConfig(mode="GAEC"))
    assert sol.primal_cost == -1.0
    assert np.array_equal(sol.labeling, [0, 0, 1])
    assert sol.lower_bound == float("-inf")


def test_triangle_mode_d_keeps_identity_labeling():
    sol = solve(triangle(), SolverConfig(mode="D", mp_iterations=1))
    assert sol.lower_bound == pytest.approx(-1.0, abs=1e-9)
    assert np.array_equal(sol.labeling, [0, 1, 2])
    assert sol.primal_cost == 0.0


def test_all_negative_graph_stays_singleton():
    g = WeightedGraph.from_edges(4, [(0, 1, -1.0), (1, 2, -0.5), (2, 3, -2.0)])
    total = float(g.costs.sum())
    for mode in ("P", "PD", "PD+", "GAEC"):
        sol = solve(g, SolverConfig(mode=mode))
        assert np.array_equal(sol.labeling, [0, 1, 2, 3])
        assert sol.primal_cost == pytest.approx(total, abs=1e-12)


# ----------------------------------------------------------------- bounds

def test_dual_bound_triangle():
    assert dual_bound(triangle(), SolverConfig(mode="D", mp_iterations=1)) == pytest.approx(
        -1.0, abs=1e-9
    )


def test_dual_bound_all_positive_is_zero():
    g = WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 2.0)])
    assert dual_bound(g, SolverConfig(mode="D")) == 0.0


def test_dual_bound_single_repulsive_edge():
    g = WeightedGraph.from_edges(2, [(0, 1, -3.0)])
    assert dual_bound(g, SolverConfig(mode="D")) == -3.0


def test_dual_bound_requires_mode_d():
    with pytest.raises(ValueError):
        dual_bound(triangle(), SolverConfig(mode="PD"))


def test_dual_bound_improves_with_more_separation_rounds():
    for seed in range(30):
        g = random_graph(8, 0.5, seed)
        lbs = [
            solve(g, SolverConfig(mode="D", separation_rounds=r)).lower_bound
            for r in (1, 2, 3)
        ]
        assert lbs[0] <= lbs[1] + 1e-9
        assert lbs[1] <= lbs[2] + 1e-9


def test_dual_mode_trace_has_one_record_per_round():
    sol = solve(triangle(), SolverConfig(mode="D", separation_rounds=3))
    assert len(sol.trace) == 3
    assert all(rec.phase == "dual" and rec.lb_valid for rec in sol.trace)
    assert sol.trace[-1].lb == sol.lower_bound


# -------------------------------------------------------------- invariants

def test_bounds_bracket_optimum():
    for seed in range(100):
        rng = np.random.default_rng(seed)
        g = random_graph(int(rng.integers(4, 8)), 0.6, seed)
        opt = brute_force_optimum(g).optimum_cost
        lb = solve(g, SolverConfig(mode="D", mp_iterations=20)).lower_bound
        assert lb <= opt + 1e-6
        for mode in ("P", "PD", "PD+"):
            sol = solve(g, SolverConfig(mode=mode))
            assert sol.primal_cost >= opt - 1e-6
            assert sol.primal_cost == pytest.approx(
                clustering_cost(g, sol.labeling), abs=1e-12
            )


def test_lower_bound_below_primal():
    for seed in range(50):
        g = random_graph(int(np.random.default_rng(seed).integers(4, 9)), 0.6, seed)
        for mode in ("PD", "PD+"):
            sol = solve(g, SolverConfig(mode=mode))
            assert sol.lower_bound <= sol.primal_cost + 1e-9


def test_pd_cleanup_matches_greedy_joins_on_quotient():
    # the final labeling is exactly greedy contraction of the quotient graph,
    # so it can never lose to the quotient labeling itself
    for seed in range(100):
        rng = np.random.default_rng(seed)
        g = random_graph(int(rng.integers(4, 8)), 0.6, seed)
        cfg = SolverConfig(mode="PD")
        sol = solve(g, cfg)
        f_total = pd_quotient_mapping(g, cfg)
        quotient, _ = contract_graph(g, f_total)
        greedy = naive_gaec(quotient)
        assert sol.primal_cost <= greedy.optimum_cost + 1e-9
        assert sol.primal_cost <= clustering_cost(g, f_total.map) + 1e-9


def test_deterministic_across_repeats_and_thread_settings():
    for seed in range(30):
        g = random_graph(int(np.random.default_rng(seed).integers(4, 9)), 0.6, seed)
        for mode in ("P", "PD", "PD+", "D", "GAEC"):
            a = solve(g, SolverConfig(mode=mode))
            b = solve(g, SolverConfig(mode=mode))
            c = solve(g, SolverConfig(mode=mode, threads=8))
            for other in (b, c):
                assert np.array_equal(a.labeling, other.labeling)
                assert a.primal_cost == other.primal_cost
                assert a.lower_bound == other.lower_bound


def test_rounds_strictly_shrink_the_graph():
    for seed in range(20):
        g = random_graph(10, 0.5, seed)
        for mode in ("P", "PD"):
            sol = solve(g, SolverConfig(mode=mode))
            loop = [r for r in sol.trace if r.phase in ("contract", "primal-dual")]
            assert len(loop) <= g.num_nodes + 1
            for rec in loop[:-1]:
                assert rec.contracted > 0
            for prev, cur in zip(loop, loop[1:]):
                assert cur.nodes == prev.nodes - prev.contracted


def test_pd_trace_flags_first_round_bound_only():
    for seed in range(10):
        g = random_graph(9, 0.6, seed)
        sol = solve(g, SolverConfig(mode="PD"))
        rounds = [r for r in sol.trace if r.phase == "primal-dual"]
        assert rounds[0].lb_valid
        assert all(not r.lb_valid for r in rounds[1:])
        assert sol.lower_bound == rounds[0].lb
        assert sol.trace[-1].phase == "cleanup"


def test_max_rounds_caps_the_loop():
    g = random_graph(30, 0.3, 7)
    sol = solve(g, SolverConfig(mode="PD", max_rounds=1))
    assert len([r for r in sol.trace if r.phase == "primal-dual"]) == 1


# ---------------------------------------------------------------- config

def test_config_defaults_resolve_cycle_lengths():
    assert SolverConfig(mode="PD").resolved_cycle_length() == 5
    assert SolverConfig(mode="PD+").resolved_cycle_length() == 7
    assert SolverConfig(mode="PD+", max_cycle_length=4).resolved_cycle_length() == 4


def test_config_rejects_bad_values():
    with pytest.raises(ValueError):
        solve(triangle(), SolverConfig(mode="QP"))
    with pytest.raises(ValueError):
        solve(triangle(), SolverConfig(mode="D", mp_iterations=0))
    with pytest.raises(ValueError):
        solve(triangle(), SolverConfig(max_cycle_length=2))
    with pytest.raises(ValueError):
        solve(triangle(), SolverConfig(matching_switch_fraction=0.0))
    with pytest.raises(ValueError):
        solve(triangle(), SolverConfig(matching_switch_fraction=1.5))
    with pytest.raises(ValueError):
        solve(triangle(), SolverConfig(max_rounds=0))
    with pytest.raises(ValueError):
        solve(triangle(), SolverConfig(mode="D", separation_rounds=0))


def test_config_accepts_full_switch_fraction():
    sol = solve(triangle(), SolverConfig(mode="P", matching_switch_fraction=1.0))
    assert sol.primal_cost == -1.0
