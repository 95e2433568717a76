import os
from pathlib import Path

import networkx as nx
import pytest
from hypothesis import settings

from hvgrid.graph import GridGraph

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

DATA_DIR = Path(os.environ.get("HVGRID_DATA_DIR", Path(__file__).resolve().parents[1] / "data" / "grids"))


def from_nx(G, voltage=400.0, name=""):
    """GridGraph from a networkx graph; multigraph edges stay parallel."""
    edges = [(str(u), str(v), voltage) for u, v in G.edges()]
    return GridGraph.from_edges(edges, name=name)


def path(n):
    return GridGraph.from_edges([("abcdefghij"[i], "abcdefghij"[i + 1]) for i in range(n - 1)])


@pytest.fixture
def p3():
    return path(3)


@pytest.fixture
def p4():
    return path(4)


@pytest.fixture
def k4():
    return from_nx(nx.complete_graph(4))


@pytest.fixture
def triangle():
    return GridGraph.from_edges([("a", "b"), ("b", "c"), ("a", "c")])


@pytest.fixture
def toy_multigraph():
    return GridGraph.from_edges([("a", "b", 400), ("a", "b", 400), ("b", "c", 110)])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
