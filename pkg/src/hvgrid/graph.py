"""Grid multigraph model, canonical CSV I/O and the four analysis variants.

A grid is an undirected multigraph: nodes are substations and every edge is
one circuit with its nominal voltage.  Parallel circuits are kept as separate
edges until a variant asks for simplification.
"""
from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple

import numpy as np

from hvgrid.errors import EmptyVariantError, ParseError, ValidationError

HEADER = ("from", "to", "voltage_kv", "circuit_id")


class Edge(NamedTuple):
    a: str
    b: str
    voltage_kv: float
    circuit_id: str

    def key(self):
        """Unordered endpoint pair, smaller identifier first."""
        return (self.a, self.b) if self.a <= self.b else (self.b, self.a)


@dataclass(frozen=True)
class VariantSpec:
    min_voltage_kv: float = 0.0
    simplify: bool = False

    def __post_init__(self):
        if self.min_voltage_kv < 0:
            raise ValidationError("min_voltage_kv must be non-negative")

    @property
    def label(self):
        scope = "hv" if self.min_voltage_kv == 0 else f"ge{self.min_voltage_kv:g}kv"
        return f"{scope}_{'simple' if self.simplify else 'complete'}"


# Table order: complete HV, simplified HV, >=220 kV, >=220 kV simplified.
CANONICAL_VARIANTS = (
    VariantSpec(0.0, False),
    VariantSpec(0.0, True),
    VariantSpec(220.0, False),
    VariantSpec(220.0, True),
)


@dataclass(frozen=True, eq=False)
class GridGraph:
    nodes: frozenset
    edges: tuple
    simple: bool = False
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", frozenset(self.nodes))
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        for e in self.edges:
            if e.a not in self.nodes or e.b not in self.nodes:
                raise ValidationError(f"edge {e.circuit_id} has an endpoint outside the node set")
            if not e.voltage_kv > 0:
                raise ValidationError(f"edge {e.circuit_id}: voltage must be positive, got {e.voltage_kv}")
        if self.simple:
            seen = set()
            for e in self.edges:
                k = e.key()
                if e.a == e.b or k in seen:
                    raise ValidationError("graph flagged simple has a loop or parallel edge")
                seen.add(k)

    def __eq__(self, other):
        if not isinstance(other, GridGraph):
            return NotImplemented
        return (
            self.nodes == other.nodes
            and self.simple == other.simple
            and self.edge_multiset() == other.edge_multiset()
        )

    def edge_multiset(self):
        """Edges with endpoints normalized, sorted; orientation is irrelevant."""
        return sorted(e.key() + (e.voltage_kv, e.circuit_id) for e in self.edges)

    def __hash__(self):
        return hash((self.nodes, self.simple, len(self.edges)))

    def __repr__(self):
        tag = f"{self.name!r}, " if self.name else ""
        return f"GridGraph({tag}N={self.n_nodes}, E={self.n_edges}, simple={self.simple})"

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    @classmethod
    def from_edges(cls, edges: Iterable, name="", simple=False):
        """Build a graph from ``(a, b[, voltage[, circuit_id]])`` tuples.

        Voltage defaults to 400 kV and circuit ids to the running index, which
        keeps toy graphs in tests short to write.
        """
        rows = []
        for i, e in enumerate(edges):
            a, b = str(e[0]), str(e[1])
            v = float(e[2]) if len(e) > 2 else 400.0
            cid = str(e[3]) if len(e) > 3 else str(i)
            rows.append(Edge(a, b, v, cid))
        nodes = {x for e in rows for x in (e.a, e.b)}
        return cls(frozenset(nodes), tuple(rows), simple=simple, name=name)

    @cached_property
    def topology(self) -> "Topology":
        return Topology(self)

    def degree(self):
        """Degree with multiplicity; a self-loop adds two."""
        deg = dict.fromkeys(self.nodes, 0)
        for e in self.edges:
            deg[e.a] += 1
            deg[e.b] += 1
        return deg

    def relabel(self, mapping):
        edges = [Edge(mapping[e.a], mapping[e.b], e.voltage_kv, e.circuit_id) for e in self.edges]
        return GridGraph(frozenset(mapping[n] for n in self.nodes), tuple(edges), self.simple, self.name)


class Topology:
    """Integer-indexed arrays for the numeric kernels.

    Nodes are indexed in sorted identifier order, so "smallest index" and
    "smallest identifier" coincide for every tie-break below.
    """

    def __init__(self, g: GridGraph):
        self.labels = sorted(g.nodes)
        index = {n: i for i, n in enumerate(self.labels)}
        self.index = index
        n = len(self.labels)
        self.n = n
        self.edge_u = np.array([index[e.a] for e in g.edges], dtype=np.int64)
        self.edge_v = np.array([index[e.b] for e in g.edges], dtype=np.int64)
        self.voltage = np.array([e.voltage_kv for e in g.edges], dtype=np.float64)

        pair_of = {}
        edge_pair = np.full(len(g.edges), -1, dtype=np.int64)
        for k, (u, v) in enumerate(zip(self.edge_u.tolist(), self.edge_v.tolist())):
            if u == v:
                continue
            key = (u, v) if u < v else (v, u)
            if key not in pair_of:
                pair_of[key] = len(pair_of)
            edge_pair[k] = pair_of[key]
        pairs = np.array(sorted(pair_of, key=pair_of.get), dtype=np.int64).reshape(-1, 2)
        self.pair_u = pairs[:, 0].copy()
        self.pair_v = pairs[:, 1].copy()
        self.edge_pair = edge_pair
        self.n_pairs = len(pairs)

        # CSR over the simple projection; slot_pair maps each slot to its pair.
        nbrs = [[] for _ in range(n)]
        for p, (u, v) in enumerate(zip(self.pair_u.tolist(), self.pair_v.tolist())):
            nbrs[u].append((v, p))
            nbrs[v].append((u, p))
        indptr = np.zeros(n + 1, dtype=np.int64)
        indices, slot_pair = [], []
        for i, lst in enumerate(nbrs):
            lst.sort()
            indptr[i + 1] = indptr[i] + len(lst)
            indices.extend(x for x, _ in lst)
            slot_pair.extend(p for _, p in lst)
        self.indptr = indptr
        self.indices = np.array(indices, dtype=np.int64)
        self.slot_pair = np.array(slot_pair, dtype=np.int64)
        self.simple_degree = np.diff(indptr)

        deg = np.zeros(n, dtype=np.int64)
        np.add.at(deg, self.edge_u, 1)
        np.add.at(deg, self.edge_v, 1)
        self.degree = deg

    @cached_property
    def triangles(self):
        """Every triangle of the simple projection as (nodes, pairs) arrays."""
        neigh = [set() for _ in range(self.n)]
        pair_id = {}
        for p, (u, v) in enumerate(zip(self.pair_u.tolist(), self.pair_v.tolist())):
            neigh[u].add(v)
            neigh[v].add(u)
            pair_id[(u, v)] = p
            pair_id[(v, u)] = p
        tri_nodes, tri_pairs = [], []
        for u in range(self.n):
            for v in sorted(neigh[u]):
                if v <= u:
                    continue
                for w in sorted(neigh[u] & neigh[v]):
                    if w <= v:
                        continue
                    tri_nodes.append((u, v, w))
                    tri_pairs.append((pair_id[(u, v)], pair_id[(v, w)], pair_id[(u, w)]))
        nodes = np.array(tri_nodes, dtype=np.int64).reshape(-1, 3)
        pairs = np.array(tri_pairs, dtype=np.int64).reshape(-1, 3)
        return nodes, pairs


def _parse_voltage(raw, line):
    try:
        v = float(raw)
    except ValueError:
        raise ValidationError(f"line {line}: voltage {raw!r} is not a number") from None
    if not np.isfinite(v) or v <= 0:
        raise ValidationError(f"line {line}: voltage must be positive, got {raw!r}")
    return v


def parse_edge_list(text, name="") -> GridGraph:
    """Read the canonical ``from,to,voltage_kv[,circuit_id]`` CSV.

    ``text`` may be a string or a text stream.  A header row is optional;
    rows without a circuit id get their 0-based data-row index.
    """
    if not isinstance(text, str):
        text = text.read()
    if text.startswith("﻿"):
        text = text[1:]
    reader = csv.reader(io.StringIO(text))
    edges = []
    width = None
    for line_no, row in enumerate(reader, start=1):
        if not row or all(not c.strip() for c in row):
            continue
        row = [c.strip() for c in row]
        if line_no == 1 and row[0].lower() == "from":
            if tuple(c.lower() for c in row) not in (HEADER[:3], HEADER):
                raise ParseError(f"unexpected header {row}", line_no)
            width = len(row)
            continue
        if len(row) not in (3, 4) or (width is not None and len(row) != width):
            raise ParseError(f"expected {width or '3 or 4'} columns, got {len(row)}", line_no)
        a, b = row[0], row[1]
        if not a or not b:
            raise ParseError("empty node identifier", line_no)
        v = _parse_voltage(row[2], line_no)
        cid = row[3] if len(row) == 4 and row[3] else str(len(edges))
        edges.append(Edge(a, b, v, cid))
    if not edges:
        raise ValidationError("edge list is empty")
    nodes = frozenset(x for e in edges for x in (e.a, e.b))
    return GridGraph(nodes, tuple(edges), simple=False, name=name)


def read_edge_list(path, name=None) -> GridGraph:
    from pathlib import Path

    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        try:
            return parse_edge_list(fh, name=name if name is not None else path.stem.upper())
        except (ParseError, ValidationError) as exc:
            raise type(exc)(f"{path.name}: {exc}") from None


def _fmt_voltage(v):
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def serialize_edge_list(g: GridGraph) -> str:
    """Write ``g`` in the canonical CSV with a deterministic row order."""
    rows = sorted(
        (e.key() + (e.voltage_kv, e.circuit_id) for e in g.edges),
    )
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for a, b, v, cid in rows:
        w.writerow([a, b, _fmt_voltage(v), cid])
    return buf.getvalue()


def derive_variant(g: GridGraph, spec: VariantSpec) -> GridGraph:
    """Apply a voltage floor and optional simplification.

    Nodes left without edges are dropped.  A collapsed bundle of parallel
    circuits keeps the highest voltage (ties: smallest circuit id).
    """
    kept = [e for e in g.edges if e.voltage_kv >= spec.min_voltage_kv]
    if spec.simplify:
        bundles = defaultdict(list)
        for e in kept:
            if e.a != e.b:
                bundles[e.key()].append(e)
        kept = []
        for (a, b), group in bundles.items():
            rep = min(group, key=lambda e: (-e.voltage_kv, e.circuit_id))
            kept.append(Edge(a, b, rep.voltage_kv, rep.circuit_id))
    if not kept:
        raise EmptyVariantError(
            f"no edges at or above {spec.min_voltage_kv:g} kV in {g.name or 'graph'}"
        )
    nodes = frozenset(x for e in kept for x in (e.a, e.b))
    return GridGraph(nodes, tuple(kept), simple=spec.simplify or g.simple, name=g.name)


def connected_components(g: GridGraph) -> list[set]:
    """Components by size descending, ties by smallest node identifier."""
    adj = defaultdict(set)
    for e in g.edges:
        adj[e.a].add(e.b)
        adj[e.b].add(e.a)
    seen = set()
    comps = []
    for start in sorted(g.nodes):
        if start in seen:
            continue
        comp = {start}
        stack = [start]
        seen.add(start)
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    comp.add(w)
                    stack.append(w)
        comps.append(comp)
    comps.sort(key=lambda c: (-len(c), min(c)))
    return comps
