"""Grid-like random test graphs.

Substations are scattered in the unit square.  A 110 kV layer joins them by a
spanning tree of short links plus extra nearest-neighbour links; a sparser
transmission layer (220/400 kV) does the same over a random subset of
substations and supplies the long-range shortcuts.  Some links get a
parallel circuit.  The result is sparse, tree-like and long in diameter, like
real high-voltage grids.
"""
import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial import cKDTree

from hvgrid.graph import Edge, GridGraph


def _layer(pts, extra_share, rng, k=6):
    n = len(pts)
    if n < 2:
        return []
    k = min(k, n)
    dist, nbr = cKDTree(pts).query(pts, k=k)
    rows = np.repeat(np.arange(n), k - 1)
    cols = nbr[:, 1:].ravel()
    knn = coo_matrix((dist[:, 1:].ravel(), (rows, cols)), shape=(n, n)).tocsr()
    mst = minimum_spanning_tree(knn.maximum(knn.T)).tocoo()
    links = {(min(a, b), max(a, b)) for a, b in zip(mst.row.tolist(), mst.col.tolist())}
    cand = sorted({(min(a, b), max(a, b)) for a, b in zip(rows.tolist(), cols.tolist())} - links)
    extra = min(len(cand), int(round(extra_share * n)))
    for i in sorted(rng.choice(len(cand), size=extra, replace=False).tolist()):
        links.add(cand[i])
    return sorted(links)


def synthetic_grid(n=150, extra_share=0.25, transmission_share=0.25, parallel_share=0.15,
                   seed=0, name="SYN"):
    """Random connected grid multigraph with ``n`` substations."""
    rng = np.random.default_rng(seed)
    pts = rng.random((n, 2))
    links = [(a, b, 110.0) for a, b in _layer(pts, extra_share, rng)]
    tx = np.flatnonzero(rng.random(n) < transmission_share)
    for a, b in _layer(pts[tx], extra_share, rng, k=4):
        links.append((int(tx[a]), int(tx[b]), 400.0 if rng.random() < 0.5 else 220.0))
    edges = []
    for a, b, v in links:
        for _ in range(2 if rng.random() < parallel_share else 1):
            edges.append(Edge(f"S{a:04d}", f"S{b:04d}", v, str(len(edges))))
    nodes = frozenset(x for e in edges for x in (e.a, e.b))
    return GridGraph(nodes, tuple(edges), simple=False, name=name)
