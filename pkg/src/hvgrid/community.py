"""Modularity evaluation and a deterministic Louvain optimizer.

Adjacency weights are circuit multiplicities, so ``k_i`` and ``2E`` match the
multigraph degree and edge counts used everywhere else in the package.
"""
from collections import defaultdict

import numpy as np

from hvgrid.errors import UndefinedMetricError


def modularity_score(g, partition, resolution=1.0):
    """Newman modularity of ``partition`` (node -> community id) on ``g``.

    Written as sum over communities of ``L_c/E - resolution*(d_c/2E)**2`` so
    the single-community partition evaluates to exactly 0.
    """
    m = g.n_edges
    if m == 0:
        raise UndefinedMetricError("modularity needs at least one edge")
    internal = defaultdict(int)
    degree = defaultdict(int)
    for e in g.edges:
        ca, cb = partition[e.a], partition[e.b]
        degree[ca] += 1
        degree[cb] += 1
        if ca == cb:
            internal[ca] += 1
    q = 0.0
    for c in sorted(degree, key=str):
        q += internal[c] / m - resolution * (degree[c] / (2 * m)) ** 2
    return q


def _one_level(adj, k, m2, order):
    n = len(adj)
    comm = list(range(n))
    tot = list(k)
    moved_any = False
    improved = True
    while improved:
        improved = False
        for i in order:
            ci = comm[i]
            links = defaultdict(float)
            for j, w in adj[i].items():
                if j != i:
                    links[comm[j]] += w
            tot[ci] -= k[i]
            best, best_gain = ci, links.get(ci, 0.0) - tot[ci] * k[i] / m2
            for c in sorted(links):
                gain = links[c] - tot[c] * k[i] / m2
                if gain > best_gain + 1e-12:
                    best, best_gain = c, gain
            tot[best] += k[i]
            comm[i] = best
            if best != ci:
                improved = True
                moved_any = True
    return comm, moved_any


def _aggregate(adj, comm):
    ids = {c: r for r, c in enumerate(sorted(set(comm)))}
    new = [defaultdict(float) for _ in ids]
    for i, nbrs in enumerate(adj):
        ci = ids[comm[i]]
        for j, w in nbrs.items():
            # each undirected edge is seen from both ends; self-loops once
            new[ci][ids[comm[j]]] += w if i != j else 2 * w
    for c in range(len(new)):
        if c in new[c]:
            new[c][c] /= 2
    return [dict(d) for d in new], [ids[c] for c in comm]


def louvain(g, seed=0, resolution=1.0):
    """One Louvain run; returns node -> community index."""
    if resolution != 1.0:
        raise NotImplementedError("only resolution 1 is supported")
    topo = g.topology
    n = topo.n
    adj = [defaultdict(float) for _ in range(n)]
    for u, v in zip(topo.edge_u.tolist(), topo.edge_v.tolist()):
        if u == v:
            adj[u][u] += 1.0
        else:
            adj[u][v] += 1.0
            adj[v][u] += 1.0
    adj = [dict(d) for d in adj]
    m2 = 2.0 * g.n_edges
    rng = np.random.default_rng(seed)
    member = list(range(n))
    while True:
        k = [sum(w for j, w in nbrs.items() if j != i) + 2 * nbrs.get(i, 0.0) for i, nbrs in enumerate(adj)]
        order = rng.permutation(len(adj)).tolist()
        comm, moved = _one_level(adj, k, m2, order)
        if not moved:
            break
        adj, relabel = _aggregate(adj, comm)
        member = [relabel[c] for c in member]
    return {topo.labels[i]: member[i] for i in range(n)}


def best_partition(g, restarts=10, seed=0):
    """Highest-modularity partition over ``restarts`` seeded Louvain runs."""
    if g.n_edges == 0:
        raise UndefinedMetricError("modularity needs at least one edge")
    best_q, best_part = -np.inf, None
    for r in range(restarts):
        part = louvain(g, seed=seed + r)
        q = modularity_score(g, part)
        if q > best_q + 1e-12:
            best_q, best_part = q, part
    return best_q, best_part
