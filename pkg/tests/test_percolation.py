import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import path
from hvgrid.errors import ValidationError
from hvgrid.graph import GridGraph
from hvgrid.percolation import (
    DEFAULT_SEED,
    Engine,
    RemovalScenario,
    RunRecord,
    aggregate_pdf,
    apply_removal,
    canonical_scenarios,
    count_peaks,
    enumerate_removals,
    removal_count,
    run_metrics,
    run_scenario,
    run_scenarios,
    sample_victims,
)
from hvgrid.synthetic import synthetic_grid
from percolation_oracle import check_graph, small_graphs


@st.composite
def connected_graphs(draw, min_n=3, max_n=14):
    n = draw(st.integers(min_n, max_n))
    edges = [(i, draw(st.integers(0, i - 1))) for i in range(1, n)]
    extra = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=2 * n))
    edges += extra  # parallel circuits and self-loops allowed
    return GridGraph.from_edges([(f"v{a:02d}", f"v{b:02d}") for a, b in edges])


def same(a: RunRecord, b: RunRecord):
    for x, y in zip(a.__dict__.values(), b.__dict__.values()):
        if isinstance(x, float) and math.isnan(x):
            if not math.isnan(y):
                return False
        elif x != pytest.approx(y, abs=1e-12):
            return False
    return True


# --- counts and scenarios ---------------------------------------------------

@pytest.mark.parametrize("total,fraction,k", [
    (133, 0.01, 1), (521, 0.20, 104), (5, 0.01, 1), (150, 0.01, 2), (250, 0.01, 3),
    (10, 0.05, 1), (30, 0.05, 2), (4, 0.99, 3),
])
def test_removal_count(total, fraction, k):
    assert removal_count(total, fraction) == k


@pytest.mark.parametrize("fraction", [0.0, 1.0, -0.1, 1.5])
def test_removal_count_rejects_bad_fraction(fraction):
    with pytest.raises(ValidationError):
        removal_count(100, fraction)


def test_removal_count_needs_two():
    with pytest.raises(ValidationError):
        removal_count(1, 0.5)


def test_scenario_validation_and_labels():
    with pytest.raises(ValidationError):
        RemovalScenario("bridge", 0.1)
    with pytest.raises(ValidationError):
        RemovalScenario("node", 0.1, runs=0)
    s = canonical_scenarios(runs=5)
    assert [x.label for x in s][:5] == ["node_1pct", "node_2pct", "node_5pct", "node_10pct", "node_20pct"]
    assert len(s) == 10 and len({x.scenario_id for x in s}) == 10
    assert all(x.canonical for x in s)
    assert not RemovalScenario("edge", 0.3).canonical


# --- removal semantics ------------------------------------------------------

def test_apply_node_removal(p4):
    g = apply_removal(p4, "node", ["b"])
    assert g.nodes == {"a", "c", "d"}
    assert [(e.a, e.b) for e in g.edges] == [("c", "d")]


def test_apply_edge_removal_by_circuit_id(toy_multigraph):
    g = apply_removal(toy_multigraph, "edge", ["0"])
    assert g.nodes == toy_multigraph.nodes
    assert g.n_edges == 2


def test_apply_removal_unknown_victim(p4):
    with pytest.raises(ValidationError):
        apply_removal(p4, "node", ["zz"])
    with pytest.raises(ValidationError):
        apply_removal(p4, "edge", ["99"])


def test_p4_node_b(p4):
    rec = run_metrics(p4, apply_removal(p4, "node", ["b"]))
    # intact: 6 pairs at distances 1,1,1,2,2,3 -> eff0 = (3 + 1 + 1/3) / 6
    eff0 = (3 + 1 + 1 / 3) / 6
    assert eff0 == pytest.approx(0.7222, abs=1e-4)
    assert rec.edges_lost_share == pytest.approx(2 / 3)
    assert rec.lcc_size == 2
    assert rec.eff_drop == pytest.approx(1 - (1 / 6) / eff0)
    assert rec.eff_drop == pytest.approx(0.7692, abs=1e-4)
    assert math.isnan(rec.clustering_drop)


def test_p4_edge_bc(p4):
    cid = next(e.circuit_id for e in p4.edges if {e.a, e.b} == {"b", "c"})
    rec = run_metrics(p4, apply_removal(p4, "edge", [cid]))
    assert rec.edges_lost_share == pytest.approx(2 / 3)
    assert rec.lcc_size == 2
    assert rec.eff_drop == pytest.approx(0.5385, abs=1e-4)


def test_no_removal_is_zero_damage():
    g = synthetic_grid(60, seed=2)
    rec = run_metrics(g, g)
    assert rec == RunRecord(0.0, 60, 0.0, 0.0)


def test_engine_matches_p4_brute_force(p4):
    engine = Engine(p4)
    b = sorted(p4.nodes).index("b")
    assert same(engine.evaluate("node", [b]), run_metrics(p4, apply_removal(p4, "node", ["b"])))


@given(connected_graphs(), st.data())
def test_engine_matches_graph_route(g, data):
    engine = Engine(g)
    for kind in ("node", "edge"):
        total = engine.total(kind)
        if total < 2:
            continue
        victims = sorted(data.draw(st.sets(st.integers(0, total - 1), min_size=1, max_size=total - 1)))
        labels = engine.victim_labels(kind, victims)
        assert same(engine.evaluate(kind, victims), run_metrics(g, apply_removal(g, kind, labels)))


@pytest.mark.parametrize("kind", ["node", "edge"])
def test_enumeration_oracle_p4(p4, kind):
    found = [rec for _, rec in enumerate_removals(p4, kind)]
    if kind == "node":
        victims = sorted(p4.nodes)
    else:
        victims = [e.circuit_id for e in p4.edges]
    brute = [run_metrics(p4, apply_removal(p4, kind, [v])) for v in victims]
    assert all(same(a, b) for a, b in zip(found, brute))


def test_single_victim_oracle_on_small_graph_sample():
    graphs = small_graphs()[::25]
    for g in graphs:
        for kind in ("node", "edge"):
            if (g.n_nodes if kind == "node" else g.n_edges) < 2:
                continue
            exact_ok, sampled_ok, p = check_graph(g, kind, DEFAULT_SEED)
            assert exact_ok and sampled_ok
            assert p > 0.01


# --- sampling and determinism -----------------------------------------------

def test_victims_are_sorted_unique_and_keyed():
    s = RemovalScenario("node", 0.2, runs=3, master_seed=7)
    v = sample_victims(s, 100, 0)
    assert len(v) == 20 and list(v) == sorted(set(v.tolist()))
    assert np.array_equal(v, sample_victims(s, 100, 0))
    assert not np.array_equal(v, sample_victims(s, 100, 1))
    other = RemovalScenario("edge", 0.2, runs=3, master_seed=7)
    assert not np.array_equal(v, sample_victims(other, 100, 0))


def test_worker_count_does_not_change_results():
    g = synthetic_grid(80, seed=1)
    s = RemovalScenario("node", 0.05, runs=120, master_seed=3)
    one = run_scenario(g, s, workers=1)
    two = run_scenario(g, s, workers=2, chunk_size=25)
    assert one.records_csv() == two.records_csv()
    assert one.summary_json() == two.summary_json()


def test_run_scenarios_pool_matches_serial():
    g = synthetic_grid(60, seed=9)
    scen = canonical_scenarios(runs=30, master_seed=11, fractions=(0.05, 0.2))
    a = run_scenarios(g, scen, workers=1)
    b = run_scenarios(g, scen, workers=2, chunk_size=7)
    assert [r.records_csv() for r in a] == [r.records_csv() for r in b]


def test_replay_is_byte_identical():
    g = synthetic_grid(70, seed=4)
    s = RemovalScenario("edge", 0.1, runs=50, master_seed=DEFAULT_SEED)
    assert run_scenario(g, s).records_csv() == run_scenario(g, s).records_csv()


def test_runs_beyond_available_sets_still_work():
    g = path(3)
    s = RemovalScenario("node", 0.5, runs=20)
    res = run_scenario(g, s)
    assert len(res.records) == 20


# --- properties -------------------------------------------------------------

@given(connected_graphs(min_n=4), st.sampled_from(["node", "edge"]), st.data())
def test_nested_removal_monotone(g, kind, data):
    engine = Engine(g)
    total = engine.total(kind)
    order = data.draw(st.permutations(range(total)))
    prev = None
    for k in range(1, total):
        rec = engine.evaluate(kind, sorted(order[:k]))
        assert 0.0 <= rec.eff_drop <= 1.0 + 1e-12
        if prev is not None:
            assert rec.lcc_size <= prev.lcc_size
            assert rec.eff_drop >= prev.eff_drop - 1e-12
        prev = rec


def test_edges_lost_share_can_fall_when_victims_grow():
    # K4 on a..d hangs off hub h, which also starts a 5-node path p1..p5
    edges = [("h", "a"), ("h", "p1")]
    edges += [(x, y) for i, x in enumerate("abcd") for y in "abcd"[i + 1:]]
    edges += [(f"p{i}", f"p{i + 1}") for i in range(1, 5)]
    g = GridGraph.from_edges(edges)
    small = run_metrics(g, apply_removal(g, "node", ["h"]))
    large = run_metrics(g, apply_removal(g, "node", ["h", "p4", "p5"]))
    assert small.lcc_size == 5 and large.lcc_size == 4
    assert small.edges_lost_share == pytest.approx(1 - 4 / 12)
    assert large.edges_lost_share == pytest.approx(1 - 6 / 12)
    assert large.edges_lost_share < small.edges_lost_share


def test_edge_removal_keeps_nodes_and_loses_at_least_removed():
    g = synthetic_grid(120, seed=6)
    s = RemovalScenario("edge", 0.05, runs=200, master_seed=1)
    res = run_scenario(g, s)
    k = removal_count(g.n_edges, 0.05)
    lost = res.values("edges_lost_share")
    assert (lost >= k / g.n_edges - 1e-12).all()
    assert (res.values("lcc_size") <= g.n_nodes).all()


def test_clustering_drop_nan_when_baseline_has_no_triangles(p4):
    res = run_scenario(p4, RemovalScenario("node", 0.25, runs=5))
    assert np.isnan(res.values("clustering_drop")).all()
    assert "clustering_drop" not in res.histograms
    assert math.isnan(res.summary["clustering_drop"]["mean"])


# --- histograms and peaks ---------------------------------------------------

def _recs(values):
    return [RunRecord(v, 1, v, v) for v in values]


def test_histogram_unit_mass_and_right_closed():
    h = aggregate_pdf(_recs([0.0, 0.5, 1.0]), "eff_drop", bins=2)
    assert h.mass.tolist() == pytest.approx([2 / 3, 1 / 3])
    assert h.mass.sum() == pytest.approx(1.0)
    assert h.edges.tolist() == [0.0, 0.5, 1.0]


def test_histogram_all_zero_is_spike():
    h = aggregate_pdf(_recs([0.0] * 7), "eff_drop", bins=10)
    assert h.mass[0] == 1.0 and h.mass[1:].sum() == 0.0
    assert h.edges[-1] == 1.0


def test_histogram_csv_and_density():
    h = aggregate_pdf(_recs(np.linspace(0, 1, 101)), "eff_drop", bins=4)
    assert (h.density * np.diff(h.edges)).sum() == pytest.approx(1.0)
    assert h.to_csv().splitlines()[0].startswith("bin_left")


@pytest.mark.parametrize("values,half_width,expected", [
    ([0, 1, 0], 0, 1),
    ([0, 1, 0, 1, 0], 0, 2),
    ([0, 2, 2, 0, 3, 0], 0, 2),
    ([0, 0, 0], 0, 0),
    ([1, 0, 0, 0, 1], 0, 2),
    ([3, 2, 1], 0, 1),
    ([0, 5, 0, 5, 0, 0, 0, 0, 0, 0], 2, 1),
    ([0, 5, 0, 0, 0, 0, 0, 5, 0, 0], 2, 2),
])
def test_count_peaks(values, half_width, expected):
    assert count_peaks(values, half_width) == expected


def test_summary_has_lcc_fraction():
    g = synthetic_grid(50, seed=3)
    res = run_scenario(g, RemovalScenario("node", 0.1, runs=40))
    s = res.summary
    assert s["lcc_fraction"]["mean"] == pytest.approx(res.values("lcc_size").mean() / 50)
    assert set(s["eff_drop"]["quantiles"]) == {"0.05", "0.25", "0.5", "0.75", "0.95"}
