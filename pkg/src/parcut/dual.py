"""Dual machinery for multicut lower bounds.

Conflicted-cycle separation, fan triangulation into triangle subproblems,
Lagrange multipliers with reparametrized costs, damped min-marginal message
passing, the lower bound, and the edge-triangle agreement check.
"""

from typing import NamedTuple

import numba as nb
import numpy as np

from .graph import WeightedGraph

# the five feasible cut patterns of a triangle on slots (ij, ik, jk):
# a triangle cannot be cut on exactly one edge
MC_TRIANGLE = ((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1), (1, 1, 1))
_MC_PATTERNS = np.array(MC_TRIANGLE, dtype=np.int8)


class ConflictedCycle(NamedTuple):
    """Cycle of attractive edges closed by a single repulsive edge.

    nodes[0] and nodes[-1] are the repulsive endpoints with
    nodes[0] < nodes[-1]; consecutive nodes are joined by attractive edges.
    """

    nodes: tuple

    @property
    def repulsive_edge(self):
        return (self.nodes[0], self.nodes[-1])

    @property
    def length(self):
        return len(self.nodes)


class Triplet(NamedTuple):
    i: int
    j: int
    k: int
    e_ij: int
    e_ik: int
    e_jk: int


class DualState:
    """Lagrange decomposition over edges and triangle subproblems.

    The augmented edge arrays hold the original edges first, then the
    zero-cost chords introduced by triangulation.  lam[t] holds the three
    multipliers of triplet t in slot order (ij, ik, jk) with i < j < k;
    coverage[e] counts the triplets containing edge e.  Reparametrized
    costs are derived, never stored.
    """

    __slots__ = (
        "graph",
        "num_nodes",
        "num_original_edges",
        "edges_u",
        "edges_v",
        "base_costs",
        "tri_nodes",
        "tri_edges",
        "lam",
        "coverage",
    )

    def __init__(
        self, graph, edges_u, edges_v, base_costs, num_original_edges, tri_nodes, tri_edges
    ):
        self.graph = graph
        self.num_nodes = graph.num_nodes
        self.num_original_edges = int(num_original_edges)
        self.edges_u = edges_u
        self.edges_v = edges_v
        self.base_costs = base_costs
        self.tri_nodes = tri_nodes
        self.tri_edges = tri_edges
        self.lam = np.zeros((tri_nodes.shape[0], 3))
        self.coverage = np.bincount(
            tri_edges.ravel(), minlength=edges_u.size
        ).astype(np.int64)

    @property
    def num_edges(self):
        return int(self.edges_u.size)

    @property
    def num_triplets(self):
        return int(self.tri_nodes.shape[0])

    def triplet(self, t):
        """Triplet t as a named tuple of node ids and edge handles."""
        i, j, k = self.tri_nodes[t].tolist()
        e_ij, e_ik, e_jk = self.tri_edges[t].tolist()
        return Triplet(i, j, k, e_ij, e_ik, e_jk)

    def __repr__(self):
        return "DualState(nodes=%d, edges=%d, triplets=%d)" % (
            self.num_nodes,
            self.num_edges,
            self.num_triplets,
        )


@nb.njit(cache=True)
def _bfs_paths(indptr, adj, neg_u, neg_v, max_path_edges, stamp, dist, parent, queue, out_nodes, out_len):
    # hop-shortest path in the attractive subgraph for every repulsive edge
    # (a, b); BFS starts at a and expands neighbors in ascending id order,
    # which the CSR layout already provides
    tick = 0
    for q in range(neg_u.size):
        a = neg_u[q]
        b = neg_v[q]
        tick += 1
        out_len[q] = 0
        head = 0
        tail = 0
        queue[tail] = a
        tail += 1
        stamp[a] = tick
        dist[a] = 0
        parent[a] = -1
        found = False
        while head < tail and not found:
            x = queue[head]
            head += 1
            if dist[x] >= max_path_edges:
                break
            for p in range(indptr[x], indptr[x + 1]):
                y = adj[p]
                if stamp[y] == tick:
                    continue
                stamp[y] = tick
                dist[y] = dist[x] + 1
                parent[y] = x
                if y == b:
                    found = True
                    break
                queue[tail] = y
                tail += 1
        if not found:
            continue
        length = dist[b] + 1
        out_len[q] = length
        x = b
        for i in range(length):
            out_nodes[q, length - 1 - i] = x
            x = parent[x]


def _positive_csr(g):
    pos = g.costs > 0.0
    pu = g.edges_u[pos]
    pv = g.edges_v[pos]
    heads = np.concatenate([pu, pv])
    tails = np.concatenate([pv, pu])
    order = np.lexsort((tails, heads))
    adj = np.ascontiguousarray(tails[order])
    indptr = np.zeros(g.num_nodes + 1, dtype=np.int64)
    if heads.size:
        np.cumsum(np.bincount(heads, minlength=g.num_nodes), out=indptr[1:])
    return indptr, adj


def _separate_arrays(g, max_len):
    """Per repulsive edge: node sequence of one shortest conflicted cycle.

    Returns (lengths, nodes) with one row per repulsive edge in ascending
    (u, v) order; rows with length 0 found no cycle within the bound.
    """
    neg = g.costs < 0.0
    neg_u = np.ascontiguousarray(g.edges_u[neg])
    neg_v = np.ascontiguousarray(g.edges_v[neg])
    out_len = np.zeros(neg_u.size, dtype=np.int64)
    out_nodes = np.zeros((neg_u.size, max(max_len, 1)), dtype=np.int64)
    if neg_u.size == 0 or not np.any(g.costs > 0.0):
        return out_len, out_nodes
    indptr, adj = _positive_csr(g)
    n = g.num_nodes
    _bfs_paths(
        indptr,
        adj,
        neg_u,
        neg_v,
        max_len - 1,
        np.zeros(n, dtype=np.int64),
        np.zeros(n, dtype=np.int64),
        np.full(n, -1, dtype=np.int64),
        np.empty(n, dtype=np.int64),
        out_nodes,
        out_len,
    )
    return out_len, out_nodes


def separate_conflicted_cycles(g, max_len):
    """One shortest conflicted cycle per repulsive edge, if any exists.

    Cycle length is counted in nodes and capped at max_len; the attractive
    path is hop-shortest, found by breadth-first search from the smaller
    repulsive endpoint expanding neighbors in ascending order.
    """
    if max_len < 3:
        raise ValueError("max_len must be at least 3")
    out_len, out_nodes = _separate_arrays(g, max_len)
    return [
        ConflictedCycle(tuple(out_nodes[i, : out_len[i]].tolist()))
        for i in np.flatnonzero(out_len)
    ]


def _dedupe_rows(arr):
    # lexicographic sort then drop consecutive duplicates; deterministic
    if arr.shape[0] == 0:
        return arr
    order = np.lexsort(tuple(arr[:, col] for col in range(arr.shape[1] - 1, -1, -1)))
    arr = arr[order]
    keep = np.empty(arr.shape[0], dtype=bool)
    keep[0] = True
    keep[1:] = np.any(arr[1:] != arr[:-1], axis=1)
    return arr[keep]


def _fan_arrays(lengths, mat):
    """Fan triangulation of cycle rows: triplet node triples and chord pairs."""
    tri = []
    chords = []
    max_l = int(lengths.max()) if lengths.size else 0
    for l in range(3, max_l + 1):
        rows = np.flatnonzero(lengths == l)
        if rows.size == 0:
            continue
        v0 = mat[rows, 0]
        for m in range(1, l - 1):
            tri.append(np.stack([v0, mat[rows, m], mat[rows, m + 1]], axis=1))
        for m in range(2, l - 1):
            a = v0
            b = mat[rows, m]
            chords.append(np.stack([np.minimum(a, b), np.maximum(a, b)], axis=1))
    tri_nodes = (
        np.concatenate(tri, axis=0) if tri else np.zeros((0, 3), dtype=np.int64)
    )
    tri_nodes = _dedupe_rows(np.sort(tri_nodes, axis=1))
    chord_pairs = (
        np.concatenate(chords, axis=0) if chords else np.zeros((0, 2), dtype=np.int64)
    )
    chord_pairs = _dedupe_rows(chord_pairs)
    return tri_nodes, chord_pairs


def _triangulate_arrays(g, lengths, mat):
    tri_nodes, chord_pairs = _fan_arrays(lengths, mat)
    n = g.num_nodes
    orig_keys = g.edges_u * n + g.edges_v
    if chord_pairs.shape[0]:
        ckeys = chord_pairs[:, 0] * n + chord_pairs[:, 1]
        pos = np.searchsorted(orig_keys, ckeys)
        pos_c = np.minimum(pos, max(orig_keys.size - 1, 0))
        is_new = (
            np.ones(ckeys.size, dtype=bool)
            if orig_keys.size == 0
            else ~((pos < orig_keys.size) & (orig_keys[pos_c] == ckeys))
        )
        chord_pairs = chord_pairs[is_new]
    e_u = np.concatenate([g.edges_u, chord_pairs[:, 0]])
    e_v = np.concatenate([g.edges_v, chord_pairs[:, 1]])
    base = np.concatenate([g.costs, np.zeros(chord_pairs.shape[0])])

    # edge handle lookup across originals plus chords
    keys = e_u * n + e_v
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    def handles(a, b):
        q = a * n + b
        pos = np.searchsorted(sorted_keys, q)
        return order[pos]

    T = tri_nodes.shape[0]
    tri_edges = np.zeros((T, 3), dtype=np.int64)
    if T:
        i, j, k = tri_nodes[:, 0], tri_nodes[:, 1], tri_nodes[:, 2]
        tri_edges[:, 0] = handles(i, j)
        tri_edges[:, 1] = handles(i, k)
        tri_edges[:, 2] = handles(j, k)
    return DualState(g, e_u, e_v, base, g.num_edges, tri_nodes, tri_edges)


def triangulate(cycles, g):
    """Build a DualState from conflicted cycles by fan triangulation.

    Each cycle is fanned from its first node: chords (v0, v_m) enter the
    augmented edge list at base cost 0 when absent, and triplets
    {v0, v_m, v_m+1} are collected and deduplicated.  Multipliers start at
    zero.
    """
    lengths = np.array([c.length for c in cycles], dtype=np.int64)
    width = int(lengths.max()) if lengths.size else 1
    mat = np.zeros((len(cycles), width), dtype=np.int64)
    for row, cyc in enumerate(cycles):
        mat[row, : lengths[row]] = cyc.nodes
    return _triangulate_arrays(g, lengths, mat)


def reparametrized_edge_costs(state):
    """Edge costs shifted by the multipliers of all covering triplets."""
    cl = state.base_costs.copy()
    if state.lam.size:
        cl += np.bincount(
            state.tri_edges.ravel(), weights=state.lam.ravel(), minlength=cl.size
        )
    return cl


def _pattern_costs(lam):
    # columns: cost of each feasible triangle labeling under -lam weights
    l0, l1, l2 = lam[:, 0], lam[:, 1], lam[:, 2]
    c110 = -(l0 + l1)
    c101 = -(l0 + l2)
    c011 = -(l1 + l2)
    c111 = -(l0 + l1 + l2)
    return c110, c101, c011, c111


def _slot_marginals(lam, slot):
    # best labeling cost with the slot edge cut minus best with it uncut
    c110, c101, c011, c111 = _pattern_costs(lam)
    if slot == 0:
        return np.minimum(np.minimum(c110, c101), c111) - np.minimum(0.0, c011)
    if slot == 1:
        return np.minimum(np.minimum(c110, c011), c111) - np.minimum(0.0, c101)
    return np.minimum(np.minimum(c101, c011), c111) - np.minimum(0.0, c110)


def triangle_min_marginal(state, t, e):
    """Min-marginal of augmented edge e within triplet t, by enumeration."""
    slots = state.tri_edges[t]
    matches = np.flatnonzero(slots == e)
    if matches.size == 0:
        raise ValueError("edge %d is not part of triplet %d" % (e, t))
    slot = int(matches[0])
    lam = state.lam[t]
    best1 = np.inf
    best0 = np.inf
    for y in MC_TRIANGLE:
        cost = -(lam[0] * y[0] + lam[1] * y[1] + lam[2] * y[2])
        if y[slot]:
            best1 = min(best1, cost)
        else:
            best0 = min(best0, cost)
    return float(best1 - best0)


def mp_edge_to_triplets(state):
    """Push every covered edge's reparametrized cost into its triplets.

    Afterwards every covered edge has reparametrized cost zero (up to
    rounding); uncovered edges are untouched.
    """
    if state.lam.size == 0:
        return
    cl = reparametrized_edge_costs(state)
    e = state.tri_edges
    state.lam -= cl[e] / state.coverage[e]


_SCHEDULE = ((0, 1.0 / 3.0), (1, 0.5), (2, 1.0), (0, 0.5), (1, 1.0), (0, 1.0))


def mp_triplets_to_edges(state):
    """Damped six-step min-marginal push from triplets back to edges.

    Per triplet, slots (ij, ik, jk) receive fractions 1/3, 1/2, 1, then
    1/2, 1, 1 of their current min-marginal, recomputed after every step.
    Triplets touch only their own multipliers, so the result does not
    depend on processing order.
    """
    lam = state.lam
    if lam.size == 0:
        return
    for slot, w in _SCHEDULE:
        lam[:, slot] += w * _slot_marginals(lam, slot)


def message_passing_iteration(state):
    """One full pass: edge phase, then the per-triplet damped schedule."""
    mp_edge_to_triplets(state)
    mp_triplets_to_edges(state)


def lower_bound(state):
    """Dual bound: negative part of edge costs plus best triangle labelings."""
    cl = reparametrized_edge_costs(state)
    total = float(np.minimum(cl, 0.0).sum())
    if state.lam.size:
        c110, c101, c011, c111 = _pattern_costs(state.lam)
        tmin = np.minimum(
            np.minimum(np.minimum(c110, c101), np.minimum(c011, c111)), 0.0
        )
        total += float(tmin.sum())
    return total


def reparametrized_graph(state):
    """Current reparametrized costs as a plain graph over augmented edges."""
    cl = reparametrized_edge_costs(state)
    return WeightedGraph(state.num_nodes, state.edges_u, state.edges_v, cl)


def extend_separation(state, max_len):
    """Separate on the current reparametrized costs and add new triplets.

    New chords join the augmented edge list at base cost 0; new triplets
    start with zero multipliers.  Returns the number of triplets added.
    """
    g_rep = WeightedGraph(
        state.num_nodes,
        state.edges_u.copy(),
        state.edges_v.copy(),
        reparametrized_edge_costs(state),
    )
    lengths, mat = _separate_arrays(g_rep, max_len)
    tri_nodes, chord_pairs = _fan_arrays(lengths[lengths >= 3], mat[lengths >= 3])
    if tri_nodes.shape[0] == 0:
        return 0
    n = state.num_nodes
    keys = state.edges_u * n + state.edges_v
    if chord_pairs.shape[0]:
        order = np.argsort(keys, kind="stable")
        ckeys = chord_pairs[:, 0] * n + chord_pairs[:, 1]
        pos = np.searchsorted(keys[order], ckeys)
        pos_c = np.minimum(pos, max(keys.size - 1, 0))
        hit = (pos < keys.size) & (keys[order][pos_c] == ckeys)
        chord_pairs = chord_pairs[~hit]
    state.edges_u = np.concatenate([state.edges_u, chord_pairs[:, 0]])
    state.edges_v = np.concatenate([state.edges_v, chord_pairs[:, 1]])
    state.base_costs = np.concatenate(
        [state.base_costs, np.zeros(chord_pairs.shape[0])]
    )
    # drop triplets already present
    if state.tri_nodes.shape[0]:
        both = np.concatenate([state.tri_nodes, tri_nodes])
        flags = np.concatenate(
            [np.zeros(state.tri_nodes.shape[0], bool), np.ones(tri_nodes.shape[0], bool)]
        )
        order = np.lexsort((both[:, 2], both[:, 1], both[:, 0]))
        both, flags = both[order], flags[order]
        dup = np.zeros(both.shape[0], dtype=bool)
        dup[1:] = np.all(both[1:] == both[:-1], axis=1)
        tri_nodes = _dedupe_rows(both[flags & ~dup])
    if tri_nodes.shape[0] == 0:
        return 0
    keys = state.edges_u * n + state.edges_v
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]

    def handles(a, b):
        q = a * n + b
        return order[np.searchsorted(sorted_keys, q)]

    i, j, k = tri_nodes[:, 0], tri_nodes[:, 1], tri_nodes[:, 2]
    new_edges = np.stack([handles(i, j), handles(i, k), handles(j, k)], axis=1)
    added = tri_nodes.shape[0]
    state.tri_nodes = np.concatenate([state.tri_nodes, tri_nodes])
    state.tri_edges = np.concatenate([state.tri_edges, new_edges])
    state.lam = np.concatenate([state.lam, np.zeros((added, 3))])
    state.coverage = np.bincount(
        state.tri_edges.ravel(), minlength=state.edges_u.size
    ).astype(np.int64)
    return added


def check_edge_triangle_agreement(state, eps):
    """Test for a non-empty arc-consistent kernel of near-optimal labels.

    Builds the set of labels within eps of optimal for every edge and
    triplet, then alternately deletes triplet labelings whose projection on
    some edge left that edge's set and edge labels missing from some
    covering triplet's projections, until nothing changes.  True iff every
    set stays non-empty.
    """
    if eps < 0:
        raise ValueError("eps must be non-negative")
    cl = reparametrized_edge_costs(state)
    best = np.minimum(cl, 0.0)
    emask = np.zeros(cl.size, dtype=np.uint8)
    emask[0.0 <= best + eps] |= 1
    emask[cl <= best + eps] |= 2

    T = state.num_triplets
    if T == 0:
        return bool(np.all(emask != 0))
    c110, c101, c011, c111 = _pattern_costs(state.lam)
    pat_costs = np.stack([np.zeros(T), c110, c101, c011, c111], axis=1)
    tbest = pat_costs.min(axis=1)
    tmask = np.zeros(T, dtype=np.uint8)
    for p in range(5):
        tmask[pat_costs[:, p] <= tbest + eps] |= np.uint8(1 << p)

    e = state.tri_edges
    pv = _MC_PATTERNS
    # per slot, which patterns leave the edge uncut / cut
    zero_bits = np.array(
        [sum(1 << p for p in range(5) if pv[p, s] == 0) for s in range(3)], np.uint8
    )
    one_bits = np.array(
        [sum(1 << p for p in range(5) if pv[p, s] == 1) for s in range(3)], np.uint8
    )
    while True:
        old_e = emask.copy()
        old_t = tmask.copy()
        # drop triplet labelings that project outside an edge set
        for p in range(5):
            ok = np.ones(T, dtype=bool)
            for s in range(3):
                bit = np.uint8(1 << pv[p, s])
                ok &= (emask[e[:, s]] & bit) != 0
            tmask[~ok] &= np.uint8(~np.uint8(1 << p))
        # drop edge labels not projected by some covering triplet
        for s in range(3):
            no_zero = (tmask & zero_bits[s]) == 0
            no_one = (tmask & one_bits[s]) == 0
            emask[e[no_zero, s]] &= np.uint8(~np.uint8(1))
            emask[e[no_one, s]] &= np.uint8(~np.uint8(2))
        if np.array_equal(emask, old_e) and np.array_equal(tmask, old_t):
            break
    return bool(np.all(emask != 0) and np.all(tmask != 0))
