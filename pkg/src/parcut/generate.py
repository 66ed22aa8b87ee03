"""Synthetic instance generators with deterministic seeding."""

import numpy as np

from .graph import WeightedGraph


def random_graph(num_nodes, edge_probability, seed=0):
    """Erdos-Renyi graph with standard normal edge costs.

    Every unordered pair is kept independently with the given probability;
    costs are drawn afterwards in pair order, so output is a pure function
    of (num_nodes, edge_probability, seed).
    """
    if num_nodes < 0:
        raise ValueError("num_nodes must be non-negative")
    if not (0.0 <= edge_probability <= 1.0):
        raise ValueError("edge_probability must be in [0, 1]")
    rng = np.random.default_rng(seed)
    iu, iv = np.triu_indices(num_nodes, k=1)
    pick = rng.random(iu.size) < edge_probability
    u = iu[pick].astype(np.int64)
    v = iv[pick].astype(np.int64)
    costs = rng.standard_normal(u.size)
    return WeightedGraph(num_nodes, u, v, costs)


def grid_graph(height, width, stride=0, seed=0):
    """4-connected grid with optional coarse longer-range edges.

    Nodes are row-major over height x width.  Grid edges join horizontal
    and vertical neighbors.  With stride s >= 2, nodes on the coarse
    lattice (row % s == 0, col % s == 0) additionally connect s steps right
    and down when in bounds.  Costs are standard normal, drawn in one fixed
    block order (horizontal, vertical, long-range right, long-range down).
    """
    if height < 1 or width < 1:
        raise ValueError("grid dimensions must be positive")
    if stride < 0 or stride == 1:
        raise ValueError("stride must be 0 (disabled) or at least 2")
    ids = np.arange(height * width, dtype=np.int64).reshape(height, width)
    hu = ids[:, :-1].ravel()
    hv = ids[:, 1:].ravel()
    vu = ids[:-1, :].ravel()
    vv = ids[1:, :].ravel()
    parts_u = [hu, vu]
    parts_v = [hv, vv]
    if stride >= 2:
        rows = np.arange(0, height, stride)
        cols = np.arange(0, width, stride)
        rr, cc = np.meshgrid(rows, cols, indexing="ij")
        right = cc + stride < width
        parts_u.append(ids[rr[right], cc[right]])
        parts_v.append(ids[rr[right], cc[right] + stride])
        down = rr + stride < height
        parts_u.append(ids[rr[down], cc[down]])
        parts_v.append(ids[rr[down] + stride, cc[down]])
    u = np.concatenate(parts_u)
    v = np.concatenate(parts_v)
    rng = np.random.default_rng(seed)
    costs = rng.standard_normal(u.size)
    return WeightedGraph(height * width, u, v, costs)
