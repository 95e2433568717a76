"""Monte Carlo random node and edge removal.

Each run removes a fixed share of nodes or circuits chosen uniformly without
replacement and records four damage measures against the intact graph:

* share of circuits lost (removed, or cut off from the largest component),
* size of the largest connected component,
* relative efficiency drop, with efficiency normalized by the intact node
  count so removed nodes count as unreachable,
* relative clustering drop, clustering averaged over surviving nodes.

A run's victims depend only on ``(master_seed, scenario_id, run_index)``, so
results do not depend on worker count or scheduling.
"""
from __future__ import annotations

import csv
import io
import itertools
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import NamedTuple

import numpy as np

from hvgrid import _kernels
from hvgrid.errors import ValidationError
from hvgrid.graph import GridGraph, connected_components
from hvgrid.metrics import clustering, efficiency

CANONICAL_FRACTIONS = (0.01, 0.02, 0.05, 0.10, 0.20)
KINDS = ("node", "edge")
METRICS = ("edges_lost_share", "lcc_size", "eff_drop", "clustering_drop")
DEFAULT_SEED = 20221020
DEFAULT_RUNS = 10_000
DEFAULT_BINS = 100


@dataclass(frozen=True)
class RemovalScenario:
    kind: str
    fraction: float
    runs: int = DEFAULT_RUNS
    master_seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not 0 < self.fraction < 1:
            raise ValidationError(f"fraction must lie in (0, 1), got {self.fraction}")
        if self.runs < 1:
            raise ValidationError("runs must be at least 1")
        if not 0 <= self.master_seed < 2**64:
            raise ValidationError("master_seed must be an unsigned 64-bit integer")

    @property
    def canonical(self):
        return any(math.isclose(self.fraction, f) for f in CANONICAL_FRACTIONS)

    @property
    def scenario_id(self):
        # kind in the high digit, fraction in basis points below it
        bp = int(Decimal(str(self.fraction)) * 10_000)
        return KINDS.index(self.kind) * 100_000 + bp

    @property
    def label(self):
        pct = (Decimal(str(self.fraction)) * 100).normalize()
        return f"{self.kind}_{pct:f}pct"


def canonical_scenarios(runs=DEFAULT_RUNS, master_seed=DEFAULT_SEED, fractions=CANONICAL_FRACTIONS):
    return [RemovalScenario(k, f, runs, master_seed) for k in KINDS for f in fractions]


@dataclass(frozen=True)
class RunRecord:
    edges_lost_share: float
    lcc_size: int
    eff_drop: float
    clustering_drop: float


class Baseline(NamedTuple):
    efficiency: float
    clustering: float
    n_edges: int
    n_nodes: int


def baseline(g: GridGraph) -> Baseline:
    return Baseline(efficiency(g), clustering(g), g.n_edges, g.n_nodes)


def removal_count(total, fraction):
    """Round-half-up share of ``total``, clamped to ``[1, total - 1]``."""
    if not 0 < fraction < 1:
        raise ValidationError(f"fraction must lie in (0, 1), got {fraction}")
    if total < 2:
        raise ValidationError("need at least two elements to remove a strict subset")
    k = int((Decimal(total) * Decimal(str(fraction))).to_integral_value(ROUND_HALF_UP))
    return min(max(k, 1), total - 1)


def apply_removal(g: GridGraph, kind, victims) -> GridGraph:
    """Remove nodes (with their circuits) or circuits (by circuit id)."""
    victims = set(victims)
    if kind == "node":
        missing = victims - g.nodes
        if missing:
            raise ValidationError(f"nodes not in graph: {sorted(missing)[:5]}")
        edges = tuple(e for e in g.edges if e.a not in victims and e.b not in victims)
        return GridGraph(g.nodes - victims, edges, g.simple, g.name)
    if kind == "edge":
        ids = {e.circuit_id for e in g.edges}
        missing = victims - ids
        if missing:
            raise ValidationError(f"circuits not in graph: {sorted(missing)[:5]}")
        edges = tuple(e for e in g.edges if e.circuit_id not in victims)
        return GridGraph(g.nodes, edges, g.simple, g.name)
    raise ValidationError(f"kind must be one of {KINDS}, got {kind!r}")


def _drop(before, after):
    return (before - after) / before if before != 0 else math.nan


def run_metrics(g0: GridGraph, g1: GridGraph, base: Baseline | None = None) -> RunRecord:
    """Damage record of ``g1`` relative to the intact ``g0`` (graph-level path)."""
    base = base or baseline(g0)
    if not base.efficiency > 0 or base.n_edges < 1:
        raise ValidationError("baseline efficiency and edge count must be positive")
    comps = connected_components(g1)
    lcc = comps[0] if comps else set()
    in_lcc = sum(1 for e in g1.edges if e.a in lcc and e.b in lcc)
    eff1 = efficiency(g1, n_reference=base.n_nodes) if g1.n_nodes else 0.0
    c1 = clustering(g1) if g1.n_nodes else 0.0
    return RunRecord(
        edges_lost_share=1.0 - in_lcc / base.n_edges,
        lcc_size=len(lcc),
        eff_drop=_drop(base.efficiency, eff1),
        clustering_drop=_drop(base.clustering, c1),
    )


class Engine:
    """Array-level evaluator for many removal runs on one graph."""

    def __init__(self, g: GridGraph):
        self.graph = g
        topo = g.topology
        self.topo = topo
        self.tri_nodes, self.tri_pairs = topo.triangles
        self.n = topo.n
        self.m = g.n_edges
        # node index -> incident circuit indices, for node removal
        inc = [[] for _ in range(self.n)]
        for e, (u, v) in enumerate(zip(topo.edge_u.tolist(), topo.edge_v.tolist())):
            inc[u].append(e)
            if v != u:
                inc[v].append(e)
        self.incident = [np.array(x, dtype=np.int64) for x in inc]
        rec = self.evaluate_masks(np.ones(self.n, np.bool_), np.ones(self.m, np.bool_), raw=True)
        self.base = Baseline(rec[2], rec[3], self.m, self.n)
        if not self.base.efficiency > 0:
            raise ValidationError("intact graph has zero efficiency")

    def evaluate_masks(self, node_alive, edge_alive, raw=False):
        t = self.topo
        pair_alive = _kernels.residual_state(t.edge_pair, t.n_pairs, edge_alive)
        labels, sizes = _kernels.component_labels(t.indptr, t.indices, t.slot_pair, pair_alive, node_alive)
        if sizes.shape[0]:
            lcc = int(np.argmax(sizes))
            lcc_size = int(sizes[lcc])
            in_lcc = _kernels.edges_within(t.edge_u, t.edge_v, edge_alive, labels, lcc)
        else:
            lcc_size = in_lcc = 0
        counts = _kernels.distance_counts(t.indptr, t.indices, t.slot_pair, pair_alive, node_alive)
        eff = float(_kernels.inverse_distance_sum(counts)) / (self.n * (self.n - 1))
        csum, alive = _kernels.clustering_sum(
            self.n, t.pair_u, t.pair_v, pair_alive, node_alive, self.tri_nodes, self.tri_pairs
        )
        c = csum / alive if alive else 0.0
        if raw:
            return in_lcc, lcc_size, eff, c
        return RunRecord(
            edges_lost_share=1.0 - in_lcc / self.m,
            lcc_size=lcc_size,
            eff_drop=_drop(self.base.efficiency, eff),
            clustering_drop=_drop(self.base.clustering, c),
        )

    def masks_for(self, kind, victims):
        node_alive = np.ones(self.n, np.bool_)
        edge_alive = np.ones(self.m, np.bool_)
        victims = np.asarray(victims, dtype=np.int64)
        if kind == "node":
            node_alive[victims] = False
            for v in victims.tolist():
                edge_alive[self.incident[v]] = False
        else:
            edge_alive[victims] = False
        return node_alive, edge_alive

    def evaluate(self, kind, victims):
        """Record for removing element indices ``victims`` (nodes in sorted-id order, circuits in file order)."""
        return self.evaluate_masks(*self.masks_for(kind, victims))

    def total(self, kind):
        return self.n if kind == "node" else self.m

    def victim_labels(self, kind, victims):
        if kind == "node":
            return {self.topo.labels[i] for i in victims}
        return {self.graph.edges[i].circuit_id for i in victims}


def sample_victims(scenario: RemovalScenario, total, run_index):
    """Victim indices of one run, drawn from a stream keyed on the run's coordinates."""
    k = removal_count(total, scenario.fraction)
    seq = np.random.SeedSequence([scenario.master_seed, scenario.scenario_id, run_index])
    rng = np.random.Generator(np.random.PCG64(seq))
    return np.sort(rng.choice(total, size=k, replace=False))


def _run_chunk(engine, scenario, indices):
    total = engine.total(scenario.kind)
    return [engine.evaluate(scenario.kind, sample_victims(scenario, total, r)) for r in indices]


_WORKER_ENGINE = None


def _worker_init(g):
    global _WORKER_ENGINE
    _WORKER_ENGINE = Engine(g)


def _worker_chunk(scenario, indices):
    return _run_chunk(_WORKER_ENGINE, scenario, indices)


@dataclass
class Histogram:
    edges: np.ndarray
    mass: np.ndarray

    @property
    def density(self):
        return self.mass / np.diff(self.edges)

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bin_left", "bin_right", "mass", "density"])
        for lo, hi, m, d in zip(self.edges[:-1], self.edges[1:], self.mass, self.density):
            w.writerow([repr(float(lo)), repr(float(hi)), repr(float(m)), repr(float(d))])
        return buf.getvalue()


def aggregate_pdf(records, metric, bins=DEFAULT_BINS) -> Histogram:
    """Unit-mass histogram of one record field.

    Bins have fixed width over ``[0, max]`` (``[-m, m]`` when negatives occur)
    and are closed on the right, the first bin also holding its left edge.
    NaN values are ignored.
    """
    values = np.array([getattr(r, metric) for r in records], dtype=float)
    values = values[~np.isnan(values)]
    if values.size == 0:
        raise ValidationError(f"no finite values for {metric}")
    if values.min() < 0:
        hi = float(np.abs(values).max())
        lo = -hi
    else:
        lo, hi = 0.0, float(values.max())
    if hi == lo:
        hi = lo + 1.0
    edges = np.linspace(lo, hi, bins + 1)
    idx = np.clip(np.searchsorted(edges, values, side="left") - 1, 0, bins - 1)
    mass = np.bincount(idx, minlength=bins).astype(float) / values.size
    return Histogram(edges, mass)


def count_peaks(values, half_width=0):
    """Local maxima of a non-negative series after a centered moving average.

    A plateau counts once when both neighbours are lower; positions outside
    the series count as lower, and zero-valued plateaus are never peaks.
    """
    y = np.asarray(values, dtype=float)
    if half_width > 0:
        kernel = np.ones(2 * half_width + 1)
        num = np.convolve(y, kernel, mode="same")
        den = np.convolve(np.ones_like(y), kernel, mode="same")
        y = num / den
    peaks = 0
    i, n = 0, len(y)
    while i < n:
        j = i
        while j + 1 < n and y[j + 1] == y[i]:
            j += 1
        left = y[i - 1] if i > 0 else -np.inf
        right = y[j + 1] if j + 1 < n else -np.inf
        if y[i] > 0 and y[i] > left and y[i] > right:
            peaks += 1
        i = j + 1
    return peaks


QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


def _summarize(values):
    finite = values[~np.isnan(values)]
    if finite.size == 0:
        return {"mean": math.nan, "std": math.nan, "quantiles": {str(q): math.nan for q in QUANTILES}}
    return {
        "mean": float(finite.mean()),
        "std": float(finite.std(ddof=1)) if finite.size > 1 else 0.0,
        "quantiles": {str(q): float(v) for q, v in zip(QUANTILES, np.quantile(finite, QUANTILES))},
    }


@dataclass
class ScenarioResult:
    scenario: RemovalScenario
    records: list
    baseline: Baseline
    network: str = ""
    bins: int = DEFAULT_BINS

    def values(self, metric):
        return np.array([getattr(r, metric) for r in self.records], dtype=float)

    @property
    def histograms(self):
        out = {}
        for m in METRICS:
            try:
                out[m] = aggregate_pdf(self.records, m, self.bins)
            except ValidationError:
                pass
        return out

    @property
    def summary(self):
        s = {m: _summarize(self.values(m)) for m in METRICS}
        s["lcc_fraction"] = _summarize(self.values("lcc_size") / self.baseline.n_nodes)
        return s

    def records_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["run_index", *METRICS])
        for i, r in enumerate(self.records):
            w.writerow([i, repr(r.edges_lost_share), r.lcc_size, repr(r.eff_drop), repr(r.clustering_drop)])
        return buf.getvalue()

    def summary_json(self):
        doc = {
            "network": self.network,
            "scenario": {**asdict(self.scenario), "label": self.scenario.label,
                         "scenario_id": self.scenario.scenario_id, "canonical": self.scenario.canonical},
            "baseline": self.baseline._asdict(),
            "removed": removal_count(
                self.baseline.n_nodes if self.scenario.kind == "node" else self.baseline.n_edges,
                self.scenario.fraction,
            ),
            "metrics": self.summary,
        }
        return json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n"


def run_scenario(g: GridGraph, scenario: RemovalScenario, workers=1, engine=None, chunk_size=500) -> ScenarioResult:
    """All runs of one scenario; records are ordered by run index."""
    engine = engine or Engine(g)
    total = engine.total(scenario.kind)
    removal_count(total, scenario.fraction)  # validates before any work
    indices = range(scenario.runs)
    if workers <= 1 or scenario.runs <= chunk_size:
        records = _run_chunk(engine, scenario, indices)
    else:
        chunks = [range(s, min(s + chunk_size, scenario.runs)) for s in range(0, scenario.runs, chunk_size)]
        with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(g,)) as pool:
            parts = pool.map(_worker_chunk, itertools.repeat(scenario), chunks)
            records = [r for part in parts for r in part]
    return ScenarioResult(scenario, records, engine.base, network=g.name)


def run_scenarios(g: GridGraph, scenarios, workers=1, chunk_size=500) -> list[ScenarioResult]:
    """Several scenarios on one graph sharing a single worker pool."""
    engine = Engine(g)
    if workers <= 1:
        return [run_scenario(g, s, engine=engine) for s in scenarios]
    jobs = []
    for s in scenarios:
        removal_count(engine.total(s.kind), s.fraction)
        for start in range(0, s.runs, chunk_size):
            jobs.append((s, range(start, min(start + chunk_size, s.runs))))
    with ProcessPoolExecutor(workers, initializer=_worker_init, initargs=(g,)) as pool:
        parts = list(pool.map(_worker_chunk, [j[0] for j in jobs], [j[1] for j in jobs]))
    out = []
    for s in scenarios:
        recs = [r for (js, _), part in zip(jobs, parts) if js == s for r in part]
        out.append(ScenarioResult(s, recs, engine.base, network=g.name))
    return out


def enumerate_removals(g: GridGraph, kind, count=1):
    """Every victim set of size ``count`` with its record, in lexicographic index order."""
    engine = Engine(g)
    total = engine.total(kind)
    return [
        (combo, engine.evaluate(kind, combo))
        for combo in itertools.combinations(range(total), count)
    ]


def default_workers():
    return max(1, min(8, os.cpu_count() or 1))
