"""Degree distributions and exponential decay fits ``P(k) = C exp(-k/gamma)``."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from hvgrid.errors import (
    EmptyVariantError,
    FitError,
    InsufficientSupportError,
    NonDecayingDistributionError,
    UndefinedMetricError,
)
from hvgrid.graph import CANONICAL_VARIANTS, GridGraph, derive_variant

# Decay constants below this value mark a grid as fragile in the literature.
FRAGILITY_THRESHOLD = 1.5


@dataclass
class DegreePdf:
    counts: dict

    @property
    def n(self):
        return sum(self.counts.values())

    @property
    def pdf(self):
        n = self.n
        return {k: c / n for k, c in sorted(self.counts.items())}

    def mean(self):
        return sum(k * c for k, c in self.counts.items()) / self.n

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "probability"])
        for k, p in self.pdf.items():
            w.writerow([k, repr(p)])
        return buf.getvalue()


@dataclass
class DegreeFit:
    gamma: float
    prefactor: float
    r_squared: float
    support: list

    def __post_init__(self):
        if not self.gamma > 0:
            raise NonDecayingDistributionError(f"gamma must be positive, got {self.gamma}")


def degree_pdf(g: GridGraph) -> DegreePdf:
    """Degree histogram counting parallel circuits separately."""
    if g.n_nodes == 0:
        raise UndefinedMetricError("degree distribution of an empty graph")
    counts = {}
    for d in g.degree().values():
        counts[d] = counts.get(d, 0) + 1
    return DegreePdf(dict(sorted(counts.items())))


def fit_exponential(pdf) -> DegreeFit:
    """Least squares line through ``(k, ln p(k))`` for occupied k >= 1.

    Accepts a ``DegreePdf`` or a plain ``{k: p}`` mapping.
    """
    probs = pdf.pdf if isinstance(pdf, DegreePdf) else dict(pdf)
    support = sorted(k for k, p in probs.items() if k >= 1 and p > 0)
    if len(support) < 3:
        raise InsufficientSupportError(f"need at least 3 occupied degrees, got {len(support)}")
    x = np.array(support, dtype=float)
    y = np.log([probs[k] for k in support])
    res = stats.linregress(x, y)
    if res.slope >= 0:
        raise NonDecayingDistributionError(f"fitted slope {res.slope:.4g} is not negative")
    return DegreeFit(
        gamma=float(-1.0 / res.slope),
        prefactor=math.exp(res.intercept),
        r_squared=float(res.rvalue**2),
        support=support,
    )


def gamma_suite(g: GridGraph, variants=CANONICAL_VARIANTS) -> dict:
    """Fit every variant of ``g``; errors name the failing variant."""
    out = {}
    for spec in variants:
        try:
            out[spec] = fit_exponential(degree_pdf(derive_variant(g, spec)))
        except (EmptyVariantError, FitError) as exc:
            raise type(exc)(f"{g.name or 'graph'} [{spec.label}]: {exc}") from None
    return out


def relative_decrease(suite: dict) -> tuple[float, float]:
    """Relative change of gamma from complete to simplified, (all-voltage, >=220 kV)."""
    hv_c, hv_s, tx_c, tx_s = (suite[v].gamma if isinstance(suite[v], DegreeFit) else suite[v]
                              for v in CANONICAL_VARIANTS)
    return (hv_s - hv_c) / hv_c, (tx_s - tx_c) / tx_c


GAMMA_COLUMNS = tuple(f"gamma_{v.label}" for v in CANONICAL_VARIANTS)


def suite_to_csv(suites: dict) -> str:
    """One row per network with the four decay constants in table order."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["network", *GAMMA_COLUMNS])
    for name in sorted(suites):
        w.writerow([name, *(repr(suites[name][v].gamma) for v in CANONICAL_VARIANTS)])
    return buf.getvalue()


def gamma_scope_partition(hv_gamma: dict, tx_gamma: dict, minor=0.1) -> dict:
    """Split networks by how the sub-transmission layer moves gamma.

    ``higher``: all-voltage gamma exceeds the >=220 kV gamma by at least
    ``minor``; ``lower``: the reverse; ``minor``: the gap is below ``minor``.
    """
    out = {"higher": set(), "lower": set(), "minor": set()}
    for net, hv in hv_gamma.items():
        diff = hv - tx_gamma[net]
        if abs(diff) < minor:
            out["minor"].add(net)
        elif diff > 0:
            out["higher"].add(net)
        else:
            out["lower"].add(net)
    return out
