"""Topology and random-failure robustness of high-voltage grid graphs."""

__version__ = "0.1.0"

from hvgrid.degree_fit import DegreeFit, DegreePdf, degree_pdf, fit_exponential, gamma_suite, relative_decrease
from hvgrid.graph import (
    CANONICAL_VARIANTS,
    GridGraph,
    VariantSpec,
    connected_components,
    derive_variant,
    parse_edge_list,
    read_edge_list,
    serialize_edge_list,
)
from hvgrid.metrics import MetricsReport, compute_report
from hvgrid.percolation import RemovalScenario, RunRecord, ScenarioResult, run_scenario
from hvgrid.scoring import PerformanceTable, composite, group_assign, standardize
