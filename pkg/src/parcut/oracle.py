"""Plain reference implementations used to cross-check the fast paths.

Everything here favors directness over speed and shares no algorithmic code
with the rest of the package, so agreement between the two is meaningful
evidence.
"""

from dataclasses import dataclass

import numpy as np

from .dual import ConflictedCycle
from .graph import WeightedGraph

BRUTE_FORCE_NODE_LIMIT = 12
CYCLE_ENUM_NODE_LIMIT = 10


@dataclass
class OracleResult:
    optimum_cost: float
    optimum_labeling: np.ndarray


def _all_partitions(n):
    # every restricted growth string of length n, in lexicographic order;
    # row by row this is every canonical labeling of n nodes
    parts = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for node in range(1, n):
        counts = maxes.astype(np.int64) + 2
        reps = np.repeat(np.arange(parts.shape[0]), counts)
        offsets = np.zeros(parts.shape[0], dtype=np.int64)
        np.cumsum(counts[:-1], out=offsets[1:])
        vals = (np.arange(reps.size) - offsets[reps]).astype(np.int8)
        grown = np.empty((reps.size, node + 1), dtype=np.int8)
        grown[:, :node] = parts[reps]
        grown[:, node] = vals
        parts = grown
        maxes = np.maximum(maxes[reps], vals)
    return parts


def brute_force_optimum(g):
    """Exact minimum over all partitions; guarded to small node counts.

    Ties go to the first minimizer in lexicographic labeling order.
    """
    n = g.num_nodes
    if n > BRUTE_FORCE_NODE_LIMIT:
        raise ValueError(
            "brute force is limited to %d nodes, got %d" % (BRUTE_FORCE_NODE_LIMIT, n)
        )
    if n == 0:
        return OracleResult(0.0, np.zeros(0, dtype=np.int64))
    parts = _all_partitions(n)
    total = np.zeros(parts.shape[0])
    for u, v, c in g.edges:
        total += c * (parts[:, u] != parts[:, v])
    best = int(np.argmin(total))
    return OracleResult(float(total[best]), parts[best].astype(np.int64))


def naive_contract(g, S):
    """Contract by direct relabel and merge; returns (graph, joined_cost)."""
    n = g.num_nodes
    nbrs = {i: [] for i in range(n)}
    for a, b in np.asarray(S, dtype=np.int64).reshape(-1, 2):
        nbrs[int(a)].append(int(b))
        nbrs[int(b)].append(int(a))
    label = [-1] * n
    nxt = 0
    for s in range(n):
        if label[s] != -1:
            continue
        label[s] = nxt
        stack = [s]
        while stack:
            x = stack.pop()
            for y in nbrs[x]:
                if label[y] == -1:
                    label[y] = nxt
                    stack.append(y)
        nxt += 1
    merged = {}
    joined = 0.0
    for u, v, c in g.edges:
        fu, fv = label[u], label[v]
        if fu == fv:
            joined += c
        else:
            key = (fu, fv) if fu < fv else (fv, fu)
            merged[key] = merged.get(key, 0.0) + c
    pairs = sorted(merged)
    out = WeightedGraph(
        nxt,
        [p[0] for p in pairs],
        [p[1] for p in pairs],
        [merged[p] for p in pairs],
    )
    return out, joined


def naive_gaec(g):
    """Sequential greedy additive edge contraction by plain scanning.

    Joins the maximum-cost strictly-positive edge between current clusters
    (ties toward the lexicographically smallest pair of cluster ids, which
    are the minimum member ids), sums parallel edges, and stops once every
    remaining edge is non-positive.
    """
    n = g.num_nodes
    adj = {i: {} for i in range(n)}
    for u, v, c in g.edges:
        adj[u][v] = c
        adj[v][u] = c
    members = {i: [i] for i in range(n)}
    while True:
        best = None
        for a in sorted(adj):
            for b in sorted(adj[a]):
                if a < b and adj[a][b] > 0.0:
                    if best is None or adj[a][b] > best[0]:
                        best = (adj[a][b], a, b)
        if best is None:
            break
        _, a, b = best
        del adj[a][b]
        del adj[b][a]
        for x, cx in sorted(adj[b].items()):
            del adj[x][b]
            adj[a][x] = adj[a].get(x, 0.0) + cx
            adj[x][a] = adj[a][x]
        del adj[b]
        members[a].extend(members[b])
        del members[b]
    label = np.full(n, -1, dtype=np.int64)
    for idx, a in enumerate(sorted(members)):
        for node in members[a]:
            label[node] = idx
    cost = 0.0
    for u, v, c in g.edges:
        if label[u] != label[v]:
            cost += c
    return OracleResult(cost, label)


def enumerate_conflicted_cycles_exhaustive(g, max_len, node_limit=CYCLE_ENUM_NODE_LIMIT):
    """All simple cycles of length <= max_len with exactly one repulsive edge.

    Each cycle is reported once, oriented from the smaller endpoint of its
    repulsive edge to the larger along the attractive path.
    """
    if g.num_nodes > node_limit:
        raise ValueError(
            "exhaustive cycle enumeration is limited to %d nodes" % node_limit
        )
    if max_len < 3:
        raise ValueError("max_len must be at least 3")
    pos_adj = {i: [] for i in range(g.num_nodes)}
    for u, v, c in g.edges:
        if c > 0.0:
            pos_adj[u].append(v)
            pos_adj[v].append(u)
    out = set()
    for u, v, c in g.edges:
        if c >= 0.0:
            continue
        a, b = u, v

        def dfs(path):
            x = path[-1]
            if x == b:
                if len(path) >= 3:
                    out.add(ConflictedCycle(tuple(path)))
                return
            if len(path) >= max_len:
                return
            for y in pos_adj[x]:
                if y in path:
                    continue
                dfs(path + [y])

        dfs([a])
    return out
