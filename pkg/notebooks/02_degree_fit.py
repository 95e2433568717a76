"""
Exponential degree distributions
================================

Fits ``P(k) = C exp(-k / gamma)`` to each variant and shows what
collapsing parallel circuits does to the decay constant.
"""

# %%
from _data import grids

from hvgrid import degree_pdf, gamma_suite, relative_decrease
from hvgrid.degree_fit import FRAGILITY_THRESHOLD

nets = grids()

# %%
# The raw histogram of one network.
name, g = next(iter(nets.items()))
for k, p in degree_pdf(g).pdf.items():
    print(f"k={k:2d} {p:.4f} " + "#" * int(200 * p))

# %%
# A straight line through ``(k, ln p)`` gives gamma as minus the inverse slope.
for name, g in nets.items():
    suite = gamma_suite(g)
    gammas = "  ".join(f"{spec.label}={fit.gamma:.3f}" for spec, fit in suite.items())
    hv, tx = relative_decrease(suite)
    print(f"{name}: {gammas}")
    print(f"    relative change on simplification: all-voltage {hv:+.3f}, >=220 kV {tx:+.3f}")

# %%
# Values under the threshold mark degree tails that fall off fast, a sign of
# grids that lean on few well-connected substations.
print("fragility threshold:", FRAGILITY_THRESHOLD)
