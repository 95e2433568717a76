"""
Ranking robustness across networks
==================================

Standardizes scenario means across networks, sums them into node and
circuit composites and sorts the networks into three groups.
"""

# %%
import json

from _data import grids

from hvgrid import composite
from hvgrid.percolation import canonical_scenarios, run_scenarios
from hvgrid.scoring import raw_from_summaries

nets = grids(("AL", "BA", "BE", "CZ", "DK"))

# %%
# A light sweep: all ten canonical scenarios, few runs each.
docs = []
for name, g in nets.items():
    for res in run_scenarios(g, canonical_scenarios(runs=300)):
        docs.append(json.loads(res.summary_json()))

# %%
# Every (scenario, metric) column becomes z-scores with the sign flipped where
# smaller is better, so a positive composite means above-average robustness.
table = composite(raw_from_summaries(docs))
for name in sorted(table.networks, key=table.composite.get, reverse=True):
    print(f"{name:4s} node={table.node_composite[name]:+7.2f} "
          f"edge={table.edge_composite[name]:+7.2f} total={table.composite[name]:+7.2f} "
          f"group={table.group.get(name, '-')}")
