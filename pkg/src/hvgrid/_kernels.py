"""Compiled graph sweeps over the CSR arrays built by ``Topology``.

Every kernel takes a per-pair alive count and a per-node alive mask so the
same code serves the intact graph and every Monte Carlo residual.  Loops run
in fixed index order, so results are bit-identical across processes.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _popcount(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True)
def _alive_csr(indptr, indices, slot_pair, pair_alive, node_alive):
    n = indptr.shape[0] - 1
    ptr = np.zeros(n + 1, dtype=np.int64)
    idx = np.empty(indices.shape[0], dtype=np.int64)
    k = 0
    for u in range(n):
        if node_alive[u]:
            for slot in range(indptr[u], indptr[u + 1]):
                w = indices[slot]
                if pair_alive[slot_pair[slot]] != 0 and node_alive[w]:
                    idx[k] = w
                    k += 1
        ptr[u + 1] = k
    return ptr, idx


@njit(cache=True)
def distance_counts(indptr, indices, slot_pair, pair_alive, node_alive):
    """Histogram of hop distances over ordered reachable pairs.

    ``counts[d]`` is the number of ordered pairs (i, j), i != j, at distance
    d.  Sources are swept 64 at a time as bits of one machine word.
    """
    n = indptr.shape[0] - 1
    counts = np.zeros(max(n, 1), dtype=np.int64)
    ptr, idx = _alive_csr(indptr, indices, slot_pair, pair_alive, node_alive)
    visited = np.zeros(n, dtype=np.uint64)
    frontier = np.zeros(n, dtype=np.uint64)
    nxt = np.zeros(n, dtype=np.uint64)
    one = np.uint64(1)
    for base in range(0, n, 64):
        for v in range(n):
            visited[v] = 0
            frontier[v] = 0
        seeded = False
        for s in range(base, min(base + 64, n)):
            if node_alive[s]:
                bit = one << np.uint64(s - base)
                visited[s] = bit
                frontier[s] = bit
                seeded = True
        if not seeded:
            continue
        d = 0
        while True:
            d += 1
            found = 0
            for v in range(n):
                acc = np.uint64(0)
                for q in range(ptr[v], ptr[v + 1]):
                    acc |= frontier[idx[q]]
                acc &= ~visited[v]
                nxt[v] = acc
                if acc:
                    found += _popcount(acc)
            if found == 0:
                break
            counts[d] += found
            for v in range(n):
                visited[v] |= nxt[v]
                frontier[v] = nxt[v]
    return counts


@njit(cache=True)
def component_labels(indptr, indices, slot_pair, pair_alive, node_alive):
    """Label alive nodes by component; labels follow the smallest member index.

    Returns (labels, sizes) where dead nodes carry label -1.
    """
    n = indptr.shape[0] - 1
    labels = np.full(n, -1, dtype=np.int64)
    sizes = np.zeros(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    ncomp = 0
    for s in range(n):
        if not node_alive[s] or labels[s] >= 0:
            continue
        labels[s] = ncomp
        head = 0
        tail = 1
        queue[0] = s
        while head < tail:
            u = queue[head]
            head += 1
            for slot in range(indptr[u], indptr[u + 1]):
                if pair_alive[slot_pair[slot]] == 0:
                    continue
                w = indices[slot]
                if labels[w] < 0 and node_alive[w]:
                    labels[w] = ncomp
                    queue[tail] = w
                    tail += 1
        sizes[ncomp] = tail
        ncomp += 1
    return labels, sizes[:ncomp]


@njit(cache=True)
def clustering_sum(n, pair_u, pair_v, pair_alive, node_alive, tri_nodes, tri_pairs):
    """Sum of local clustering over alive nodes, plus the alive-node count."""
    deg = np.zeros(n, dtype=np.int64)
    for p in range(pair_u.shape[0]):
        if pair_alive[p] > 0:
            deg[pair_u[p]] += 1
            deg[pair_v[p]] += 1
    tri = np.zeros(n, dtype=np.int64)
    for t in range(tri_pairs.shape[0]):
        if pair_alive[tri_pairs[t, 0]] > 0 and pair_alive[tri_pairs[t, 1]] > 0 and pair_alive[tri_pairs[t, 2]] > 0:
            tri[tri_nodes[t, 0]] += 1
            tri[tri_nodes[t, 1]] += 1
            tri[tri_nodes[t, 2]] += 1
    total = 0.0
    alive = 0
    for i in range(n):
        if not node_alive[i]:
            continue
        alive += 1
        k = deg[i]
        if k >= 2:
            total += 2.0 * tri[i] / (k * (k - 1))
    return total, alive


@njit(cache=True)
def residual_state(edge_pair, n_pairs, edge_alive):
    """Alive circuit count per simple pair."""
    counts = np.zeros(n_pairs, dtype=np.int64)
    for e in range(edge_pair.shape[0]):
        p = edge_pair[e]
        if p >= 0 and edge_alive[e]:
            counts[p] += 1
    return counts


@njit(cache=True)
def edges_within(edge_u, edge_v, edge_alive, labels, target):
    """Number of alive circuits with both endpoints in component ``target``."""
    c = 0
    for e in range(edge_u.shape[0]):
        if edge_alive[e] and labels[edge_u[e]] == target and labels[edge_v[e]] == target:
            c += 1
    return c


@njit(cache=True)
def inverse_distance_sum(counts):
    """Sum of count/d over distances d >= 1, in ascending d."""
    s = 0.0
    for d in range(1, counts.shape[0]):
        if counts[d] != 0:
            s += counts[d] / d
    return s
