"""Acceptance suite: ten gate checks, one printed verdict line each.

Run with `pytest -s tests/test_acceptance.py` to see every verdict line;
without -s the lines still surface for any failing check.
"""

import json
import time

import numpy as np

from parcut import (
    SolverConfig,
    WeightedGraph,
    brute_force_optimum,
    build_adjacency,
    check_edge_triangle_agreement,
    connected_components,
    contract,
    contract_graph,
    dual_bound,
    enumerate_conflicted_cycles_exhaustive,
    lower_bound,
    message_passing_iteration,
    naive_contract,
    naive_gaec,
    random_graph,
    select_spanning_forest_no_conflicts,
    separate_conflicted_cycles,
    solve,
    triangulate,
)
from parcut.cli import main


def _verdict(num, ok, text):
    print("[acceptance %02d] %s: %s" % (num, "PASS" if ok else "FAIL", text))
    assert ok, "acceptance %02d failed: %s" % (num, text)


def _triangle():
    return WeightedGraph.from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, -2.0)])


def _suite(count, lo=4, hi=8, p=0.6):
    for seed in range(count):
        rng = np.random.default_rng(seed)
        yield seed, random_graph(int(rng.integers(lo, hi)), p, seed)


def test_acceptance_01_oracle_bracketing():
    t0 = time.perf_counter()
    ok = True
    for seed, g in _suite(200):
        opt = brute_force_optimum(g).optimum_cost
        lb = dual_bound(
            g, SolverConfig(mode="D", mp_iterations=20, max_cycle_length=5)
        )
        ok = ok and lb <= opt + 1e-6
        for mode in ("P", "PD"):
            primal = solve(g, SolverConfig(mode=mode)).primal_cost
            ok = ok and primal >= opt - 1e-6
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 10.0
    _verdict(
        1, ok,
        "bounds bracket the exact optimum on 200 random instances (%.1fs)" % elapsed,
    )


def test_acceptance_02_triangle_micro_instance():
    g = _triangle()
    lb_d = solve(g, SolverConfig(mode="D", mp_iterations=1)).lower_bound
    primal_p = solve(g, SolverConfig(mode="P")).primal_cost
    pd = solve(g, SolverConfig(mode="PD"))
    ok = (
        abs(lb_d - (-1.0)) <= 1e-9
        and primal_p == -1.0
        and abs(pd.lower_bound - (-1.0)) <= 1e-9
        and pd.primal_cost == -1.0
    )
    _verdict(
        2, ok,
        "triangle micro-instance: D bound %.9g, P cost %.9g, PD %.9g/%.9g"
        % (lb_d, primal_p, pd.lower_bound, pd.primal_cost),
    )


def test_acceptance_03_lower_bound_monotone():
    worst = 0.0
    for seed, g in _suite(100, lo=4, hi=9):
        state = triangulate(separate_conflicted_cycles(g, 5), g)
        prev = lower_bound(state)
        for _ in range(20):
            message_passing_iteration(state)
            cur = lower_bound(state)
            worst = max(worst, prev - cur)
            prev = cur
    _verdict(3, worst <= 1e-9, "largest bound drop over 100x20 iterations = %.2e" % worst)


def test_acceptance_04_reparametrization_conserves_objective():
    worst = 0.0
    for seed, g in _suite(100, lo=4, hi=9, p=0.7):
        rng = np.random.default_rng(10_000 + seed)
        state = triangulate(separate_conflicted_cycles(g, 5), g)
        state.lam[:] = rng.standard_normal(state.lam.shape)
        lab = rng.integers(0, 3, size=g.num_nodes)
        y = (lab[state.edges_u] != lab[state.edges_v]).astype(float)
        cl = state.base_costs + np.bincount(
            state.tri_edges.ravel(),
            weights=state.lam.ravel(),
            minlength=state.num_edges,
        )
        total = float(cl @ y)
        if state.num_triplets:
            total -= float((state.lam * y[state.tri_edges]).sum())
        worst = max(worst, abs(total - float(state.base_costs @ y)))
    _verdict(4, worst <= 1e-9, "largest objective drift over 100 triples = %.2e" % worst)


def test_acceptance_05_contraction_algebra():
    ok = True
    for seed, g in _suite(100, lo=4, hi=9):
        rng = np.random.default_rng(20_000 + seed)
        m = g.num_edges
        k = int(rng.integers(0, m + 1)) if m else 0
        idx = rng.choice(m, size=k, replace=False) if k else np.empty(0, np.int64)
        S = np.stack([g.edges_u[idx], g.edges_v[idx]], axis=1)
        f = connected_components(g.num_nodes, S)
        res = contract(build_adjacency(g), f)
        ref, ref_joined = naive_contract(g, S)
        ref_entries = build_adjacency(ref).entries()
        got = res.contracted.entries()
        ok = ok and len(got) == len(ref_entries)
        ok = ok and all(
            a[:2] == b[:2] and abs(a[2] - b[2]) <= 1e-9
            for a, b in zip(got, ref_entries)
        )
        merged = f.map[g.edges_u] == f.map[g.edges_v]
        diagonal = float(np.sum(g.costs[merged]))
        ok = ok and abs(res.joined_cost - ref_joined) <= 1e-9
        ok = ok and abs(res.joined_cost - diagonal) <= 1e-9
    _verdict(5, ok, "contraction matches the naive merge oracle on 100 pairs")


def test_acceptance_06_greedy_contraction_equivalence():
    ok = True
    for seed, g in _suite(50, lo=2, hi=11, p=0.5):
        got = solve(g, SolverConfig(mode="GAEC")).primal_cost
        ref = naive_gaec(g).optimum_cost
        ok = ok and abs(got - ref) <= 1e-9
    _verdict(6, ok, "GAEC mode equals the sequential reference on 50 graphs")


def test_acceptance_07_separation_sound_and_shortest():
    ok = True
    for seed, g in _suite(50, lo=5, hi=9, p=0.5):
        found = separate_conflicted_cycles(g, 5)
        exhaustive = enumerate_conflicted_cycles_exhaustive(g, 5)
        shortest = {}
        for cyc in exhaustive:
            cur = shortest.get(cyc.repulsive_edge)
            shortest[cyc.repulsive_edge] = (
                cyc.length if cur is None else min(cur, cyc.length)
            )
        cost = dict(((u, v), c) for u, v, c in g.edges)
        for cyc in found:
            ok = ok and cyc in exhaustive
            ok = ok and cyc.length == shortest[cyc.repulsive_edge]
            nodes = list(cyc.nodes)
            ring = list(zip(nodes, nodes[1:] + nodes[:1]))
            negatives = sum(
                1 for a, b in ring if cost[(min(a, b), max(a, b))] < 0.0
            )
            ok = ok and negatives == 1
    _verdict(7, ok, "separated cycles are sound, shortest, and singly repulsive")


def test_acceptance_08_forest_strategy_invariant():
    ok = True
    for seed, g in _suite(100, lo=6, hi=13, p=0.4):
        S = select_spanning_forest_no_conflicts(g)
        f = connected_components(g.num_nodes, S)
        ok = ok and f.num_targets == g.num_nodes - len(S)  # forest, no cycles
        neg = g.costs < 0.0
        ok = ok and not np.any(f.map[g.edges_u[neg]] == f.map[g.edges_v[neg]])
        _, joined = contract_graph(g, f)
        ok = ok and joined >= -1e-12
    _verdict(8, ok, "forest strategy gives acyclic conflict-free joins, cost >= 0")


def test_acceptance_09_message_passing_reaches_agreement():
    ok = True
    for seed, g in _suite(50, lo=5, hi=8):
        state = triangulate(separate_conflicted_cycles(g, 5), g)
        for _ in range(200):
            message_passing_iteration(state)
        ok = ok and check_edge_triangle_agreement(state, 1e-6)
    _verdict(9, ok, "edge-triangle agreement reached after 200 iterations, 50 instances")


def test_acceptance_10_determinism_and_scaling(tmp_path):
    instance = tmp_path / "grid1000.txt"
    rc = main([
        "generate", "--type", "grid", "--height", "1000", "--width", "1000",
        "--seed", "0", "-o", str(instance),
    ])
    assert rc == 0

    def run(tag, threads):
        out = tmp_path / ("report_%s.json" % tag)
        t0 = time.perf_counter()
        code = main([
            "solve", "-i", str(instance), "-o", str(out), "--mode", "PD",
            "--seed", "0", "--threads", str(threads), "--omit-times",
        ])
        elapsed = time.perf_counter() - t0
        assert code == 0
        return out.read_bytes(), elapsed

    first, t_first = run("a", 1)
    second, _ = run("b", 1)
    eight, _ = run("c", 8)

    rep1 = json.loads(first)
    rep8 = json.loads(eight)
    edges = rep1["trace"][0]["edges"]
    ok = t_first < 120.0
    ok = ok and edges > 1_900_000
    ok = ok and first == second
    ok = ok and abs(rep1["primal_cost"] - rep8["primal_cost"]) <= 1e-6
    ok = ok and abs(rep1["lower_bound"] - rep8["lower_bound"]) <= 1e-6
    _verdict(
        10, ok,
        "1000x1000 grid (%d edges) solved in %.1fs; reruns byte-identical; "
        "1 vs 8 threads agree" % (edges, t_first),
    )
