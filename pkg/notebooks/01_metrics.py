"""
Structural metrics of a high-voltage grid
=========================================

Walks one network through the metric set: size, density, distances,
clustering, communities, efficiency and the two small-world coefficients.
"""

# %%
# Load a grid.  Each row of an edge list is one circuit, so two circuits on
# the same pair of substations stay as parallel edges.
from _data import grids

from hvgrid import compute_report, derive_variant
from hvgrid.graph import CANONICAL_VARIANTS

name, g = next(iter(grids().items()))
print(name, g)

# %%
# Counting measures use every circuit; distances and clustering only see
# whether two substations are linked at all.
r = compute_report(g)
print(f"N={r.n_nodes} E={r.n_edges} density={r.density:.4f} <k>={r.mean_degree:.3f}")
print(f"diameter={r.diameter} L={r.avg_path_length:.3f} eff={r.efficiency:.4f}")
print(f"C={r.clustering:.4f} Q={r.modularity:.3f}")

# %%
# sigma compares C and L with a random graph of the same size and mean degree;
# omega uses a rewired, clustering-maximized copy as the lattice end.
print(f"sigma={r.sigma:.3f} omega={r.omega:.3f} (C_lattice={r.lattice_clustering:.3f})")

# %%
# The pair-distance distribution.  Grids are long and thin, so most of the
# mass sits well away from distance 1.
pdf = r.distances.pdf
peak = max(pdf, key=pdf.get)
print("most common distance:", peak, f"({pdf[peak]:.3f} of reachable pairs)")

# %%
# The same network seen through each variant.
for spec in CANONICAL_VARIANTS:
    v = derive_variant(g, spec)
    print(f"{spec.label:18s} N={v.n_nodes:4d} E={v.n_edges:4d}")
