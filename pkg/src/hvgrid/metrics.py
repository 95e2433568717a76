"""Topological metric suite for grid graphs.

Hop distances, clustering and the small-world references all work on the
simple projection of the multigraph; density, mean degree and modularity use
the circuit multiplicities (``E`` counts every circuit).
"""
from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from hvgrid import _kernels
from hvgrid.community import best_partition, modularity_score
from hvgrid.errors import DegenerateMetricWarning, UndefinedMetricError

EULER_GAMMA = 0.5772  # truncated as in the random-graph path-length estimate

VOLTAGE_BANDS = {
    "110-150": (110.0, 150.0),
    "220-275": (220.0, 275.0),
    "330-400": (330.0, 400.0),
}


@dataclass
class DistanceDistribution:
    counts: dict  # hop distance -> unordered reachable pairs

    @property
    def pdf(self):
        total = sum(self.counts.values())
        return {d: c / total for d, c in self.counts.items()} if total else {}

    @property
    def diameter(self):
        return max(self.counts) if self.counts else 0

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["distance", "probability"])
        for d, p in sorted(self.pdf.items()):
            w.writerow([d, repr(p)])
        return buf.getvalue()


def _all_alive(topo):
    return (
        np.ones(topo.n_pairs, dtype=np.int64),
        np.ones(topo.n, dtype=np.bool_),
    )


def _ordered_distance_counts(g):
    topo = g.topology
    pair_alive, node_alive = _all_alive(topo)
    return _kernels.distance_counts(topo.indptr, topo.indices, topo.slot_pair, pair_alive, node_alive)


def density(g):
    n = g.n_nodes
    if n < 2:
        raise UndefinedMetricError("density needs at least two nodes")
    return 2.0 * g.n_edges / (n * (n - 1))


def mean_degree(g):
    if g.n_nodes == 0:
        raise UndefinedMetricError("mean degree of an empty graph")
    return 2.0 * g.n_edges / g.n_nodes


def distance_stats(g):
    """Distance distribution, diameter and mean path length.

    The mean runs over reachable pairs only, so it stays finite on
    fragmented graphs.
    """
    if g.n_nodes < 2:
        raise UndefinedMetricError("path statistics need at least two nodes")
    counts = _ordered_distance_counts(g)
    dist = DistanceDistribution({d: int(c) // 2 for d, c in enumerate(counts) if d > 0 and c > 0})
    reachable = int(counts.sum())
    if reachable == 0:
        return dist, 0, math.nan
    total = int(np.dot(np.arange(len(counts), dtype=np.int64), counts))
    return dist, dist.diameter, total / reachable


def efficiency(g, n_reference=None):
    """Global efficiency; unreachable pairs contribute zero.

    ``n_reference`` overrides the node count used for normalization (the
    percolation runs normalize by the intact graph's size).
    """
    n = g.n_nodes if n_reference is None else n_reference
    if n < 2:
        raise UndefinedMetricError("efficiency needs at least two nodes")
    counts = _ordered_distance_counts(g)
    return _efficiency_from_counts(counts, n)


def _efficiency_from_counts(counts, n):
    return float(_kernels.inverse_distance_sum(counts)) / (n * (n - 1))


def clustering(g):
    """Mean local clustering over all nodes of the simple projection."""
    if g.n_nodes == 0:
        raise UndefinedMetricError("clustering of an empty graph")
    topo = g.topology
    pair_alive, node_alive = _all_alive(topo)
    tri_nodes, tri_pairs = topo.triangles
    total, alive = _kernels.clustering_sum(
        topo.n, topo.pair_u, topo.pair_v, pair_alive, node_alive, tri_nodes, tri_pairs
    )
    return total / alive


def modularity(g, restarts=10, seed=0):
    """Best Louvain partition and its modularity (resolution fixed at 1)."""
    return best_partition(g, restarts=restarts, seed=seed)


def random_clustering(n, k):
    return k / n


def random_path_length(n, k):
    if k <= 1:
        raise UndefinedMetricError("random-graph path length needs mean degree > 1")
    return (math.log(n) - EULER_GAMMA) / math.log(k) + 0.5


def sigma_from(c, path_length, n, k):
    if k <= 1:
        raise UndefinedMetricError("sigma needs mean degree > 1")
    if c == 0:
        warnings.warn("zero clustering: sigma degenerates to 0", DegenerateMetricWarning, stacklevel=2)
        return 0.0
    return (c / random_clustering(n, k)) / (path_length / random_path_length(n, k))


def omega_from(c, path_length, n, k, c_lattice):
    if c_lattice <= 0:
        raise UndefinedMetricError("lattice clustering must be positive")
    if path_length <= 0:
        raise UndefinedMetricError("mean path length must be positive")
    return random_path_length(n, k) / path_length - c / c_lattice


def sigma(g):
    k = mean_degree(g)
    if k <= 1:
        raise UndefinedMetricError("sigma needs mean degree > 1")
    _, _, path_length = distance_stats(g)
    return sigma_from(clustering(g), path_length, g.n_nodes, k)


def omega(g, lattice_ref=None):
    if lattice_ref is None:
        lattice_ref = lattice_reference(g)
    _, _, path_length = distance_stats(g)
    return omega_from(clustering(g), path_length, g.n_nodes, mean_degree(g), lattice_ref)


def _local_weight(k):
    return 2.0 / (k * (k - 1)) if k >= 2 else 0.0


def lattice_reference(g, sweeps=20, seed=0):
    """Clustering of a degree-preserving, clustering-greedy rewiring of ``g``.

    Each sweep proposes one double-edge swap per edge of the simple
    projection and keeps it only if mean clustering strictly rises.  Stops
    after ``sweeps`` sweeps or the first sweep without an accepted swap.
    """
    if g.n_nodes < 3:
        raise UndefinedMetricError("lattice reference needs at least three nodes")
    if mean_degree(g) < 2:
        warnings.warn("mean degree below 2: lattice reference degenerates to 0",
                      DegenerateMetricWarning, stacklevel=2)
        return 0.0
    topo = g.topology
    n = topo.n
    adj = [set() for _ in range(n)]
    edges = []
    for u, v in zip(topo.pair_u.tolist(), topo.pair_v.tolist()):
        adj[u].add(v)
        adj[v].add(u)
        edges.append([u, v])
    w = [_local_weight(len(a)) for a in adj]
    m = len(edges)
    if m < 2:
        return clustering(g)
    rng = np.random.default_rng(seed)

    def triangle_delta(a, b):
        common = adj[a] & adj[b]
        return len(common) * (w[a] + w[b]) + sum(w[x] for x in common)

    for _ in range(sweeps):
        accepted = 0
        picks = rng.integers(0, m, size=(m, 2))
        flips = rng.random(m) < 0.5
        for t in range(m):
            i, j = int(picks[t, 0]), int(picks[t, 1])
            if i == j:
                continue
            a, b = edges[i]
            c, d = edges[j]
            if flips[t]:
                c, d = d, c
            if len({a, b, c, d}) < 4 or d in adj[a] or b in adj[c]:
                continue
            delta = 0.0
            adj[a].discard(b); adj[b].discard(a)
            delta -= triangle_delta(a, b)
            adj[c].discard(d); adj[d].discard(c)
            delta -= triangle_delta(c, d)
            delta += triangle_delta(a, d)
            adj[a].add(d); adj[d].add(a)
            delta += triangle_delta(c, b)
            adj[c].add(b); adj[b].add(c)
            if delta > 1e-12:
                edges[i] = [a, d]
                edges[j] = [c, b]
                accepted += 1
            else:
                adj[a].discard(d); adj[d].discard(a)
                adj[c].discard(b); adj[b].discard(c)
                adj[a].add(b); adj[b].add(a)
                adj[c].add(d); adj[d].add(c)
        if accepted == 0:
            break

    total = 0.0
    for x in range(n):
        nb = sorted(adj[x])
        tri = sum(1 for p in range(len(nb)) for q in range(p + 1, len(nb)) if nb[q] in adj[nb[p]])
        total += tri * w[x]
    return total / n


def voltage_shares(g):
    """Fraction of circuits per voltage band; unbanded circuits go to ``other``."""
    if g.n_edges == 0:
        raise UndefinedMetricError("voltage shares of a graph without edges")
    counts = dict.fromkeys(VOLTAGE_BANDS, 0)
    other = 0
    for e in g.edges:
        for band, (lo, hi) in VOLTAGE_BANDS.items():
            if lo <= e.voltage_kv <= hi:
                counts[band] += 1
                break
        else:
            other += 1
    shares = {band: c / g.n_edges for band, c in counts.items()}
    shares["other"] = other / g.n_edges
    return shares


REPORT_COLUMNS = (
    "n_nodes", "n_edges", "density", "mean_degree", "diameter", "avg_path_length",
    "clustering", "modularity", "sigma", "omega", "efficiency",
    "share_110_150", "share_220_275", "share_330_400",
)


@dataclass
class MetricsReport:
    n_nodes: int
    n_edges: int
    density: float
    mean_degree: float
    diameter: int
    avg_path_length: float
    clustering: float
    modularity: float
    sigma: float
    omega: float
    efficiency: float
    voltage_shares: dict
    lattice_clustering: float = math.nan
    name: str = ""
    distances: DistanceDistribution | None = field(default=None, repr=False)

    def row(self):
        """Values in table column order (see ``REPORT_COLUMNS``)."""
        base = [getattr(self, c) for c in REPORT_COLUMNS[:11]]
        return base + [self.voltage_shares[b] for b in VOLTAGE_BANDS]

    def to_dict(self):
        d = asdict(self)
        d.pop("distances")
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def compute_report(g, lattice_seed=0):
    """Every table metric for one graph."""
    dist, diameter, path_length = distance_stats(g)
    counts = _ordered_distance_counts(g)
    c = clustering(g)
    k = mean_degree(g)
    q, _ = modularity(g)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateMetricWarning)
        c_lat = lattice_reference(g, seed=lattice_seed)
        s = sigma_from(c, path_length, g.n_nodes, k) if k > 1 else math.nan
        om = omega_from(c, path_length, g.n_nodes, k, c_lat) if c_lat > 0 and k > 1 else math.nan
    return MetricsReport(
        n_nodes=g.n_nodes,
        n_edges=g.n_edges,
        density=density(g),
        mean_degree=k,
        diameter=diameter,
        avg_path_length=path_length,
        clustering=c,
        modularity=q,
        sigma=s,
        omega=om,
        efficiency=_efficiency_from_counts(counts, g.n_nodes),
        voltage_shares=voltage_shares(g),
        lattice_clustering=c_lat,
        name=g.name,
        distances=dist,
    )


__all__ = [
    "DistanceDistribution", "MetricsReport", "REPORT_COLUMNS", "VOLTAGE_BANDS",
    "clustering", "compute_report", "density", "distance_stats", "efficiency",
    "lattice_reference", "mean_degree", "modularity", "modularity_score",
    "omega", "omega_from", "random_clustering", "random_path_length",
    "sigma", "sigma_from", "voltage_shares",
]
