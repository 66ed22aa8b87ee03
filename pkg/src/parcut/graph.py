"""Weighted graph instances for minimum-cost multicut.

Parsing and serialization of the MULTICUT text format, sparse adjacency
construction, canonical labelings, and objective evaluation.
"""

import io
import warnings

import numpy as np


class ParseError(ValueError):
    """Raised when instance text does not follow the MULTICUT format."""


class WeightedGraph:
    """Undirected graph with signed float edge costs and dense 0-based node ids.

    Edges are kept in three parallel arrays (edges_u, edges_v, costs) with
    u < v, sorted by (u, v), at most one entry per node pair.  Parallel input
    edges are summed.  Positive costs pull endpoints into one cluster,
    negative costs push them apart.  Instances are immutable after
    construction and safe to share across threads.
    """

    __slots__ = ("num_nodes", "edges_u", "edges_v", "costs")

    def __init__(self, num_nodes, edges_u=(), edges_v=(), costs=()):
        num_nodes = int(num_nodes)
        if num_nodes < 0:
            raise ValueError("num_nodes must be non-negative")
        u = np.asarray(edges_u, dtype=np.int64).ravel()
        v = np.asarray(edges_v, dtype=np.int64).ravel()
        c = np.asarray(costs, dtype=np.float64).ravel()
        if not (u.shape == v.shape == c.shape):
            raise ValueError("edge arrays must have equal length")
        if u.size:
            if np.any(u == v):
                raise ValueError("self-loops are not allowed")
            if min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= num_nodes:
                raise ValueError("edge endpoint out of range")
            lo = np.minimum(u, v)
            hi = np.maximum(u, v)
            order = np.lexsort((hi, lo))
            lo, hi, c = lo[order], hi[order], c[order]
            # merge parallel edges by summing their costs
            first = np.empty(lo.size, dtype=bool)
            first[0] = True
            first[1:] = (lo[1:] != lo[:-1]) | (hi[1:] != hi[:-1])
            starts = np.flatnonzero(first)
            u, v = lo[starts], hi[starts]
            c = np.add.reduceat(c, starts)
        self.num_nodes = num_nodes
        self.edges_u = u
        self.edges_v = v
        self.costs = c

    @classmethod
    def from_edges(cls, num_nodes, triples):
        """Build from an iterable of (u, v, cost) triples."""
        triples = list(triples)
        return cls(
            num_nodes,
            [t[0] for t in triples],
            [t[1] for t in triples],
            [t[2] for t in triples],
        )

    @classmethod
    def _from_canonical(cls, num_nodes, edges_u, edges_v, costs):
        # internal fast path: arrays already u < v, lex sorted, unique pairs
        g = object.__new__(cls)
        g.num_nodes = int(num_nodes)
        g.edges_u = edges_u
        g.edges_v = edges_v
        g.costs = costs
        return g

    @property
    def num_edges(self):
        return int(self.edges_u.size)

    @property
    def edges(self):
        """Edge list as (u, v, cost) tuples of Python scalars."""
        return list(
            zip(self.edges_u.tolist(), self.edges_v.tolist(), self.costs.tolist())
        )

    def __repr__(self):
        return "WeightedGraph(num_nodes=%d, num_edges=%d)" % (
            self.num_nodes,
            self.num_edges,
        )


class SparseAdjacency:
    """Symmetric sparse cost matrix in sorted COO form.

    Entries are sorted by (row, col), hold no diagonal, and come in symmetric
    pairs: (u, v, c) is present iff (v, u, c) is.
    """

    __slots__ = ("rows", "cols", "vals", "num_nodes")

    def __init__(self, rows, cols, vals, num_nodes):
        self.rows = np.asarray(rows, dtype=np.int64)
        self.cols = np.asarray(cols, dtype=np.int64)
        self.vals = np.asarray(vals, dtype=np.float64)
        self.num_nodes = int(num_nodes)

    @property
    def nnz(self):
        return int(self.rows.size)

    def entries(self):
        """Entries as (row, col, value) tuples of Python scalars."""
        return list(zip(self.rows.tolist(), self.cols.tolist(), self.vals.tolist()))

    def __repr__(self):
        return "SparseAdjacency(num_nodes=%d, nnz=%d)" % (self.num_nodes, self.nnz)


def build_adjacency(g):
    """Symmetric sorted COO adjacency of a WeightedGraph; nnz is 2 * num_edges."""
    rows = np.concatenate([g.edges_u, g.edges_v])
    cols = np.concatenate([g.edges_v, g.edges_u])
    vals = np.concatenate([g.costs, g.costs])
    order = np.lexsort((cols, rows))
    return SparseAdjacency(rows[order], cols[order], vals[order], g.num_nodes)


def clustering_cost(g, labels):
    """Total cost of edges whose endpoints carry different labels."""
    labels = np.asarray(labels)
    if labels.shape != (g.num_nodes,):
        raise ValueError(
            "labeling has length %d, graph has %d nodes"
            % (labels.size, g.num_nodes)
        )
    if g.num_edges == 0:
        return 0.0
    cut = labels[g.edges_u] != labels[g.edges_v]
    return float(np.sum(g.costs[cut]))


def canonical_labels(labels):
    """Relabel cluster ids to 0..k-1 in order of first occurrence."""
    labels = np.asarray(labels)
    if labels.size == 0:
        return np.zeros(0, dtype=np.int64)
    uniq, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty(uniq.size, dtype=np.int64)
    rank[order] = np.arange(uniq.size)
    return rank[inv.ravel()].astype(np.int64)


def _parse_edges_slow(lines, start, declared):
    """Line-by-line edge parser; raises ParseError naming the offending line."""
    us, vs, cs = [], [], []
    for i in range(start, len(lines)):
        lineno = i + 1
        stripped = lines[i].strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 3:
            raise ParseError(
                "line %d: expected '<u> <v> <cost>', got %r" % (lineno, lines[i])
            )
        try:
            u = int(tokens[0])
            v = int(tokens[1])
        except ValueError:
            raise ParseError(
                "line %d: node ids must be decimal integers" % lineno
            ) from None
        try:
            c = float(tokens[2])
        except ValueError:
            raise ParseError("line %d: malformed cost %r" % (lineno, tokens[2])) from None
        if not np.isfinite(c):
            raise ParseError("line %d: cost must be finite" % lineno)
        if u < 0 or v < 0:
            raise ParseError("line %d: negative node id" % lineno)
        if u == v:
            raise ParseError("line %d: self-loop edge (%d, %d)" % (lineno, u, v))
        if declared is not None and (u >= declared or v >= declared):
            raise ParseError(
                "line %d: node id exceeds declared NODES %d" % (lineno, declared)
            )
        us.append(u)
        vs.append(v)
        cs.append(c)
    return (
        np.asarray(us, dtype=np.int64),
        np.asarray(vs, dtype=np.int64),
        np.asarray(cs, dtype=np.float64),
    )


def parse_instance(text):
    """Parse MULTICUT instance text into a WeightedGraph.

    Format: optional comment lines starting with '#', a line reading exactly
    MULTICUT, an optional 'NODES <n>' line fixing the node count, then one
    edge per line as '<u> <v> <cost>' separated by spaces or tabs.  LF and
    CRLF line endings are both accepted.  Parallel edge lines are summed.
    Without a NODES line the node count is one plus the largest node id.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    lines = text.splitlines()

    idx = 0
    header_at = -1
    while idx < len(lines):
        stripped = lines[idx].strip()
        if not stripped or stripped.startswith("#"):
            idx += 1
            continue
        if lines[idx] != "MULTICUT":
            raise ParseError(
                "line %d: expected MULTICUT header, got %r" % (idx + 1, lines[idx])
            )
        header_at = idx
        idx += 1
        break
    if header_at < 0:
        raise ParseError("missing MULTICUT header")

    declared = None
    probe = idx
    while probe < len(lines):
        stripped = lines[probe].strip()
        if not stripped or stripped.startswith("#"):
            probe += 1
            continue
        tokens = stripped.split()
        if tokens[0] == "NODES":
            if len(tokens) != 2:
                raise ParseError("line %d: expected 'NODES <n>'" % (probe + 1))
            try:
                declared = int(tokens[1])
            except ValueError:
                raise ParseError(
                    "line %d: NODES count must be an integer" % (probe + 1)
                ) from None
            if declared < 0:
                raise ParseError("line %d: NODES count must be non-negative" % (probe + 1))
            idx = probe + 1
        break

    u, v, c = _parse_edge_block(lines, idx, declared)
    if declared is not None:
        num_nodes = declared
    elif u.size:
        num_nodes = int(max(u.max(), v.max())) + 1
    else:
        num_nodes = 0
    return WeightedGraph(num_nodes, u, v, c)


def _parse_edge_block(lines, start, declared):
    # fast path: hand the whole block to np.loadtxt, fall back to the
    # line-by-line parser whenever anything looks off so errors carry
    # line numbers
    body = "\n".join(lines[start:])
    data = None
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            data = np.loadtxt(
                io.StringIO(body), comments="#", dtype=np.float64, ndmin=2
            )
    except Exception:
        data = None
    if data is None or data.size == 0:
        return _parse_edges_slow(lines, start, declared)
    if data.ndim != 2 or data.shape[1] != 3:
        return _parse_edges_slow(lines, start, declared)
    uf, vf, c = data[:, 0], data[:, 1], data[:, 2]
    ok = (
        np.all(np.isfinite(data))
        and np.all(uf == np.floor(uf))
        and np.all(vf == np.floor(vf))
        and np.all(uf >= 0)
        and np.all(vf >= 0)
        and np.all(uf != vf)
    )
    if ok and declared is not None:
        ok = bool(np.all(uf < declared) and np.all(vf < declared))
    if not ok:
        return _parse_edges_slow(lines, start, declared)
    return uf.astype(np.int64), vf.astype(np.int64), c.copy()


def serialize_instance(g):
    """Render a WeightedGraph as MULTICUT instance text.

    Costs are written with repr so parsing the output reproduces them
    bit-exactly.  A NODES line is always emitted to preserve isolated nodes.
    """
    parts = ["MULTICUT", "NODES %d" % g.num_nodes]
    parts.extend(
        "%d %d %r" % (u, v, c)
        for u, v, c in zip(
            g.edges_u.tolist(), g.edges_v.tolist(), g.costs.tolist()
        )
    )
    return "\n".join(parts) + "\n"
