"""Cross-network standardization, composite scores and performance groups."""
from __future__ import annotations

import csv
import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.cluster import KMeans

from hvgrid.errors import DegenerateMetricWarning, ValidationError

HIGHER_BETTER = "higher_better"
LOWER_BETTER = "lower_better"

# Record field -> orientation.  LCC enters as a fraction of the intact node
# count so networks of different size are comparable.
ORIENTATION = {
    "edges_lost_share": LOWER_BETTER,
    "lcc_fraction": HIGHER_BETTER,
    "eff_drop": LOWER_BETTER,
    "clustering_drop": LOWER_BETTER,
}
GROUPS = ("I", "II", "III")


def standardize(values: dict, orientation=HIGHER_BETTER) -> dict:
    """Z-scores with sample std; ``lower_better`` flips the sign.

    NaN inputs are left out of mean and std and map to NaN.  Zero variance
    maps every network to 0.
    """
    if len(values) < 2:
        raise ValidationError("standardization needs at least two networks")
    if orientation not in (HIGHER_BETTER, LOWER_BETTER):
        raise ValidationError(f"unknown orientation {orientation!r}")
    keys = list(values)
    x = np.array([values[k] for k in keys], dtype=float)
    if np.isinf(x).any():
        raise ValidationError("values must be finite")
    ok = ~np.isnan(x)
    z = np.full(x.shape, np.nan)
    if ok.sum() >= 2:
        v = x[ok]
        # exact equality: the rounded mean of equal values can leave a tiny std
        z[ok] = 0.0 if v.min() == v.max() else (v - v.mean()) / v.std(ddof=1)
    elif ok.sum() == 1:
        z[ok] = 0.0
    if orientation == LOWER_BETTER:
        z = -z
    return {k: float(v) + 0.0 for k, v in zip(keys, z)}


@dataclass
class PerformanceTable:
    raw: dict
    z: dict
    node_composite: dict
    edge_composite: dict
    composite: dict
    group: dict = field(default_factory=dict)

    @property
    def networks(self):
        return sorted(self.composite)

    def z_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["network", "scenario", "metric", "raw", "z"])
        for key in sorted(self.z):
            net, scen, met = key
            w.writerow([net, scen, met, repr(self.raw[key]), repr(self.z[key])])
        return buf.getvalue()

    def composite_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["network", "node_composite", "edge_composite", "composite", "group"])
        for net in self.networks:
            w.writerow([net, repr(self.node_composite[net]), repr(self.edge_composite[net]),
                        repr(self.composite[net]), self.group.get(net, "")])
        return buf.getvalue()

    def scatter_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["network", "x_node_composite", "y_edge_composite", "group"])
        for net in self.networks:
            w.writerow([net, repr(self.node_composite[net]), repr(self.edge_composite[net]),
                        self.group.get(net, "")])
        return buf.getvalue()


def _scenario_kind(scenario):
    kind = scenario.split("_", 1)[0]
    if kind not in ("node", "edge"):
        raise ValidationError(f"scenario label {scenario!r} must start with node_ or edge_")
    return kind


def composite(raw: dict, scenarios=None, metrics=tuple(ORIENTATION)) -> PerformanceTable:
    """Standardize each (scenario, metric) column and sum per network.

    ``raw`` maps ``(network, scenario_label, metric)`` to the scenario mean.
    Every network must have every cell; a NaN cell (undefined metric) is
    excluded from its column and adds nothing to the composite.
    """
    networks = sorted({k[0] for k in raw})
    if scenarios is None:
        scenarios = sorted({k[1] for k in raw})
    for net in networks:
        for s in scenarios:
            for m in metrics:
                if (net, s, m) not in raw:
                    raise ValidationError(f"missing cell: network={net} scenario={s} metric={m}")
    z = {}
    node = dict.fromkeys(networks, 0.0)
    edge = dict.fromkeys(networks, 0.0)
    for s in scenarios:
        bucket = node if _scenario_kind(s) == "node" else edge
        for m in metrics:
            col = standardize({n: raw[(n, s, m)] for n in networks}, ORIENTATION[m])
            for n, v in col.items():
                z[(n, s, m)] = v
                if not math.isnan(v):
                    bucket[n] += v
    total = {n: node[n] + edge[n] for n in networks}
    table = PerformanceTable(
        raw={k: raw[k] for k in z}, z=z, node_composite=node, edge_composite=edge, composite=total
    )
    if len(networks) >= 3:
        table.group = group_assign(node, edge)
    return table


def group_assign(node_composite: dict, edge_composite: dict, seed=0, restarts=100) -> dict:
    """Three k-means groups on the (node, edge) composite plane.

    Labels I, II, III follow ascending mean total composite, so group III
    holds the best performers.
    """
    nets = sorted(node_composite)
    if len(nets) < 3:
        raise ValidationError("grouping needs at least three networks")
    X = np.array([[node_composite[n], edge_composite[n]] for n in nets], dtype=float)
    distinct = np.unique(X, axis=0)
    if len(distinct) < 3:
        if len(distinct) == 1:
            warnings.warn("all networks coincide: single degenerate group", DegenerateMetricWarning, stacklevel=2)
            return dict.fromkeys(nets, "I")
        k = len(distinct)
    else:
        k = 3
    km = KMeans(n_clusters=k, init="k-means++", n_init=restarts, random_state=seed).fit(X)
    labels = km.labels_
    score = X.sum(axis=1)
    order = sorted(range(k), key=lambda c: (score[labels == c].mean(), c))
    name = {c: GROUPS[r] for r, c in enumerate(order)}
    return {n: name[int(l)] for n, l in zip(nets, labels)}


def raw_from_summaries(summaries) -> dict:
    """Build the raw table from percolation summary documents (parsed JSON)."""
    raw = {}
    for doc in summaries:
        net = doc["network"]
        label = doc["scenario"]["label"]
        for m in ORIENTATION:
            raw[(net, label, m)] = doc["metrics"][m]["mean"]
    return raw
