"""Edge contraction machinery for multicut.

Contraction mappings, the sparse contraction algebra (relabel, sort, reduce
by key), and the contraction-set selection strategies: single maximum
positive edge, handshaking matching, and conflict-free maximum spanning
forest.
"""

import heapq
from dataclasses import dataclass

import numba as nb
import numpy as np

from .graph import SparseAdjacency, WeightedGraph


class ContractionMapping:
    """Surjective node relabeling onto 0..num_targets-1.

    Canonical form: target ids appear in order of their smallest source
    node, so map[0] == 0 whenever the source is non-empty.  Mappings
    compose across contraction rounds with then().
    """

    __slots__ = ("map", "num_targets")

    def __init__(self, map_array, num_targets):
        self.map = np.asarray(map_array, dtype=np.int64)
        self.num_targets = int(num_targets)

    @classmethod
    def identity(cls, num_nodes):
        return cls(np.arange(num_nodes, dtype=np.int64), num_nodes)

    @property
    def num_sources(self):
        return int(self.map.size)

    @property
    def is_identity(self):
        # canonical surjections collapse nothing iff target count matches
        return self.num_targets == self.map.size

    def then(self, other):
        """Composition: apply self first, then other to the targets."""
        if other.map.size != self.num_targets:
            raise ValueError(
                "cannot compose: %d targets vs %d sources"
                % (self.num_targets, other.map.size)
            )
        return ContractionMapping(other.map[self.map], other.num_targets)

    def __call__(self, nodes):
        return self.map[np.asarray(nodes, dtype=np.int64)]

    def __repr__(self):
        return "ContractionMapping(%d -> %d)" % (self.map.size, self.num_targets)


@dataclass
class ContractionResult:
    contracted: SparseAdjacency
    mapping: ContractionMapping
    joined_cost: float


@nb.njit(cache=True)
def _component_roots(parent, su, sv):
    # union-find with union by smaller id and path halving; afterwards the
    # root of every component is its minimum node id
    for i in range(su.size):
        a = su[i]
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        b = sv[i]
        while parent[b] != b:
            parent[b] = parent[parent[b]]
            b = parent[b]
        if a < b:
            parent[b] = a
        elif b < a:
            parent[a] = b
    for v in range(parent.size):
        r = parent[v]
        while parent[r] != r:
            r = parent[r]
        parent[v] = r


def _as_edge_array(S):
    arr = np.asarray(S, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("edge set must be an array of (u, v) pairs")
    return arr


def connected_components(num_nodes, S):
    """Contraction mapping whose fibers are the components of (V, S)."""
    S = _as_edge_array(S)
    if S.size:
        if S.min() < 0 or S.max() >= num_nodes:
            raise ValueError("contraction edge endpoint out of range")
    parent = np.arange(num_nodes, dtype=np.int64)
    if S.size:
        _component_roots(parent, np.ascontiguousarray(S[:, 0]), np.ascontiguousarray(S[:, 1]))
    uniq, inv = np.unique(parent, return_inverse=True)
    return ContractionMapping(inv.ravel().astype(np.int64), uniq.size)


def contract(adj, f):
    """Contract a symmetric COO adjacency along a mapping.

    Off-diagonal mass is relabeled, sorted, and summed per (row, col) key;
    mass that lands on the diagonal is returned as joined_cost, counted once
    per undirected edge.
    """
    if f.map.size != adj.num_nodes:
        raise ValueError("mapping length does not match adjacency size")
    r = f.map[adj.rows]
    c = f.map[adj.cols]
    diag = r == c
    joined = float(adj.vals[diag].sum()) / 2.0
    keep = ~diag
    r, c, v = r[keep], c[keep], adj.vals[keep]
    if r.size:
        order = np.lexsort((c, r))
        r, c, v = r[order], c[order], v[order]
        first = np.empty(r.size, dtype=bool)
        first[0] = True
        first[1:] = (r[1:] != r[:-1]) | (c[1:] != c[:-1])
        starts = np.flatnonzero(first)
        r, c = r[starts], c[starts]
        v = np.add.reduceat(v, starts)
    contracted = SparseAdjacency(r, c, v, f.num_targets)
    return ContractionResult(contracted, f, joined)


def contract_graph(g, f):
    """Contract a WeightedGraph along a mapping; returns (graph, joined_cost)."""
    if f.map.size != g.num_nodes:
        raise ValueError("mapping length does not match graph size")
    fu = f.map[g.edges_u]
    fv = f.map[g.edges_v]
    same = fu == fv
    joined = float(g.costs[same].sum())
    keep = ~same
    lo = np.minimum(fu[keep], fv[keep])
    hi = np.maximum(fu[keep], fv[keep])
    c = g.costs[keep]
    if lo.size:
        order = np.lexsort((hi, lo))
        lo, hi, c = lo[order], hi[order], c[order]
        first = np.empty(lo.size, dtype=bool)
        first[0] = True
        first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
        starts = np.flatnonzero(first)
        lo, hi = lo[starts], hi[starts]
        c = np.add.reduceat(c, starts)
    return WeightedGraph._from_canonical(f.num_targets, lo, hi, c), joined


def select_max_edge(g):
    """Singleton set holding the largest strictly-positive edge, or empty.

    Ties go to the lexicographically smallest (u, v) pair.
    """
    pos = g.costs > 0.0
    if not np.any(pos):
        return np.empty((0, 2), dtype=np.int64)
    cmax = g.costs[pos].max()
    idx = int(np.flatnonzero(g.costs == cmax)[0])
    return np.array([[g.edges_u[idx], g.edges_v[idx]]], dtype=np.int64)


def select_matching(g, seed=0, rounds=5):
    """Matching of strictly-positive edges via handshaking rounds.

    Each unmatched node points at its maximum-cost positive unmatched
    neighbor (ties toward the smallest neighbor id); mutually pointing pairs
    are matched.  Runs at most `rounds` rounds, stopping early once a round
    adds nothing.  The seed is reserved for optional proposal jitter and has
    no effect by default.
    """
    del seed
    n = g.num_nodes
    pos = g.costs > 0.0
    if not np.any(pos):
        return np.empty((0, 2), dtype=np.int64)
    eu = g.edges_u[pos]
    ev = g.edges_v[pos]
    ec = g.costs[pos]
    matched = np.zeros(n, dtype=bool)
    pairs_u = []
    pairs_v = []
    for _ in range(rounds):
        live = ~(matched[eu] | matched[ev])
        if not np.any(live):
            break
        du, dv, dc = eu[live], ev[live], ec[live]
        node = np.concatenate([du, dv])
        nbr = np.concatenate([dv, du])
        cost = np.concatenate([dc, dc])
        order = np.lexsort((nbr, -cost, node))
        node_s = node[order]
        nbr_s = nbr[order]
        first = np.empty(node_s.size, dtype=bool)
        first[0] = True
        first[1:] = node_s[1:] != node_s[:-1]
        target = np.full(n, -1, dtype=np.int64)
        target[node_s[first]] = nbr_s[first]
        cand = np.flatnonzero(target >= 0)
        mutual = cand[(target[target[cand]] == cand) & (cand < target[cand])]
        if mutual.size == 0:
            break
        pairs_u.append(mutual)
        pairs_v.append(target[mutual])
        matched[mutual] = True
        matched[target[mutual]] = True
    if not pairs_u:
        return np.empty((0, 2), dtype=np.int64)
    u = np.concatenate(pairs_u)
    v = np.concatenate(pairs_v)
    order = np.lexsort((v, u))
    return np.stack([u[order], v[order]], axis=1)


@nb.njit(cache=True)
def _remove_conflict_edges(
    indptr, adj_nbr, adj_eid, f_u, f_v, f_c, neg_u, neg_v, removed, stamp, parent_edge, queue
):
    # for each repulsive edge (a, b) in input order: if a and b share a tree,
    # find the unique path and remove its cheapest edge (ties toward the
    # lexicographically smallest pair)
    tick = 0
    for q in range(neg_u.size):
        a = neg_u[q]
        b = neg_v[q]
        tick += 1
        head = 0
        tail = 0
        queue[tail] = a
        tail += 1
        stamp[a] = tick
        parent_edge[a] = -1
        found = False
        while head < tail and not found:
            x = queue[head]
            head += 1
            for p in range(indptr[x], indptr[x + 1]):
                e = adj_eid[p]
                if removed[e]:
                    continue
                y = adj_nbr[p]
                if stamp[y] == tick:
                    continue
                stamp[y] = tick
                parent_edge[y] = e
                if y == b:
                    found = True
                    break
                queue[tail] = y
                tail += 1
        if not found:
            continue
        best = -1
        x = b
        while x != a:
            e = parent_edge[x]
            if best == -1:
                best = e
            elif f_c[e] < f_c[best]:
                best = e
            elif f_c[e] == f_c[best]:
                if f_u[e] < f_u[best] or (f_u[e] == f_u[best] and f_v[e] < f_v[best]):
                    best = e
            if f_v[e] == x:
                x = f_u[e]
            else:
                x = f_v[e]
        removed[best] = True


def select_spanning_forest_no_conflicts(g):
    """Maximum spanning forest of positive edges, pruned of conflicts.

    Builds the forest bottom-up with component-wise best-edge selection
    under the strict order (cost descending, then (u, v) ascending), then
    walks the repulsive edges in ascending (u, v) order, cutting the
    cheapest forest edge on the path between any still-connected endpoints.
    Afterwards no repulsive edge of g has both endpoints in one component.
    """
    n = g.num_nodes
    pos = g.costs > 0.0
    if not np.any(pos):
        return np.empty((0, 2), dtype=np.int64)
    eu = g.edges_u[pos]
    ev = g.edges_v[pos]
    ec = g.costs[pos]
    m = eu.size
    order = np.lexsort((ev, eu, -ec))
    rank = np.empty(m, dtype=np.int64)
    rank[order] = np.arange(m)
    in_forest = np.zeros(m, dtype=bool)
    comp = np.arange(n, dtype=np.int64)
    while True:
        cu = comp[eu]
        cv = comp[ev]
        crossing = np.flatnonzero(cu != cv)
        if crossing.size == 0:
            break
        inc_comp = np.concatenate([cu[crossing], cv[crossing]])
        inc_edge = np.concatenate([crossing, crossing])
        o = np.lexsort((rank[inc_edge], inc_comp))
        ic = inc_comp[o]
        first = np.empty(ic.size, dtype=bool)
        first[0] = True
        first[1:] = ic[1:] != ic[:-1]
        chosen = np.unique(inc_edge[o][first])
        in_forest[chosen] = True
        fsel = np.flatnonzero(in_forest)
        comp = connected_components(
            n, np.stack([eu[fsel], ev[fsel]], axis=1)
        ).map

    fsel = np.flatnonzero(in_forest)
    f_u = np.ascontiguousarray(eu[fsel])
    f_v = np.ascontiguousarray(ev[fsel])
    f_c = np.ascontiguousarray(ec[fsel])
    k = f_u.size

    neg = g.costs < 0.0
    if np.any(neg) and k:
        heads = np.concatenate([f_u, f_v])
        tails = np.concatenate([f_v, f_u])
        eids = np.concatenate([np.arange(k), np.arange(k)])
        o = np.argsort(heads, kind="stable")
        adj_nbr = np.ascontiguousarray(tails[o])
        adj_eid = np.ascontiguousarray(eids[o])
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(heads, minlength=n), out=indptr[1:])
        removed = np.zeros(k, dtype=np.bool_)
        _remove_conflict_edges(
            indptr,
            adj_nbr,
            adj_eid,
            f_u,
            f_v,
            f_c,
            np.ascontiguousarray(g.edges_u[neg]),
            np.ascontiguousarray(g.edges_v[neg]),
            removed,
            np.zeros(n, dtype=np.int64),
            np.full(n, -1, dtype=np.int64),
            np.empty(n, dtype=np.int64),
        )
        keep = ~removed
        f_u, f_v = f_u[keep], f_v[keep]

    if f_u.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((f_v, f_u))
    return np.stack([f_u[order], f_v[order]], axis=1)


def contraction_step(g, policy, seed=0, switch_fraction=0.1):
    """One contraction round under the given strategy.

    Policies: "gaec" (single max edge), "matching", "forest", and "auto"
    (matching, recomputed by the forest strategy when it matched fewer than
    switch_fraction * num_nodes edges).  Returns (contracted graph, mapping,
    joined_cost); an empty contraction set returns the input unchanged with
    the identity mapping.
    """
    if policy == "gaec":
        S = select_max_edge(g)
    elif policy == "matching":
        S = select_matching(g, seed)
    elif policy == "forest":
        S = select_spanning_forest_no_conflicts(g)
    elif policy == "auto":
        S = select_matching(g, seed)
        if S.shape[0] < switch_fraction * g.num_nodes:
            S = select_spanning_forest_no_conflicts(g)
    else:
        raise ValueError("unknown contraction policy %r" % (policy,))
    if S.shape[0] == 0:
        return g, ContractionMapping.identity(g.num_nodes), 0.0
    f = connected_components(g.num_nodes, S)
    g2, joined = contract_graph(g, f)
    return g2, f, joined


def gaec_exhaustive(g):
    """Greedy additive edge contraction run to exhaustion.

    Repeatedly joins the maximum-cost strictly-positive edge (ties toward
    the lexicographically smallest pair of current cluster ids) and sums
    parallel edges, until every remaining edge is non-positive.  Returns
    (ContractionMapping, joined_cost).  Uses a lazy heap; cluster ids are
    represented by their minimum member, which orders exactly like the
    canonical relabeling, so tie-breaks match the one-join-per-round form.
    """
    n = g.num_nodes
    adj = [dict() for _ in range(n)]
    heap = []
    for u, v, c in zip(g.edges_u.tolist(), g.edges_v.tolist(), g.costs.tolist()):
        adj[u][v] = c
        adj[v][u] = c
        if c > 0.0:
            heap.append((-c, u, v))
    heapq.heapify(heap)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    joined = 0.0
    while heap:
        negc, a, b = heapq.heappop(heap)
        c = -negc
        if parent[a] != a or parent[b] != b:
            continue
        cur = adj[a].get(b)
        if cur is None or cur != c:
            continue
        # join: the smaller id a stays the representative
        parent[b] = a
        joined += c
        del adj[a][b]
        del adj[b][a]
        for x, cx in adj[b].items():
            del adj[x][b]
            prev = adj[a].get(x)
            newc = cx if prev is None else prev + cx
            adj[a][x] = newc
            adj[x][a] = newc
            if newc > 0.0:
                lo, hi = (a, x) if a < x else (x, a)
                heapq.heappush(heap, (-newc, lo, hi))
        adj[b].clear()
    roots = np.array([find(i) for i in range(n)], dtype=np.int64)
    if n == 0:
        return ContractionMapping.identity(0), 0.0
    uniq, inv = np.unique(roots, return_inverse=True)
    return ContractionMapping(inv.ravel().astype(np.int64), uniq.size), joined
