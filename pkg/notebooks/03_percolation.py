"""
Random failures
===============

Removes random substations or circuits many times over and looks at how
the surviving grid holds together.
"""

# %%
import numpy as np
from _data import grids

from hvgrid import RemovalScenario, run_scenario
from hvgrid.percolation import DEFAULT_SEED, count_peaks

name, g = next(iter(grids().items()))

# %%
# A scenario is a removal kind, a share of elements and a run count.  Each run
# draws its victims from a stream keyed on (seed, scenario, run), so any run
# can be replayed on its own and worker count never changes the result.
scenario = RemovalScenario("node", 0.05, runs=2000, master_seed=DEFAULT_SEED)
res = run_scenario(g, scenario)
print(scenario.label, "on", name, "-", len(res.records), "runs")

# %%
for metric in ("edges_lost_share", "lcc_size", "eff_drop", "clustering_drop"):
    v = res.values(metric)
    v = v[~np.isnan(v)]
    if v.size:
        print(f"{metric:17s} mean={v.mean():8.4f} 5%={np.quantile(v, .05):8.4f} 95%={np.quantile(v, .95):8.4f}")

# %%
# The efficiency loss histogram, and its local maxima after smoothing over
# five bins.  Several maxima mean a few specific substations dominate damage.
hist = res.histograms["eff_drop"]
print("local maxima:", count_peaks(hist.mass, half_width=2))
top = np.argsort(hist.mass)[::-1][:5]
for i in sorted(top):
    print(f"[{hist.edges[i]:.3f}, {hist.edges[i + 1]:.3f}] {hist.mass[i]:.3f}")

# %%
# Circuit removal at the same share is much milder.
edge = run_scenario(g, RemovalScenario("edge", 0.05, runs=2000, master_seed=DEFAULT_SEED))
print("mean eff_drop: node", round(res.values("eff_drop").mean(), 4),
      "edge", round(edge.values("eff_drop").mean(), 4))
