"""
=====================================
Gradients on a saturating scalar net
=====================================

``F(x) = 1 - relu(1 - x)`` rises linearly up to x = 1 and is flat after it.
At x = 2 the plain gradient is zero, IG spreads credit evenly along the path
and the importance-weighted integral only counts the part of the path where
the output actually moves.
"""

# %%
# The network and its logit-alpha curve
# -------------------------------------

import numpy as np

from decigrad import gradient_map, idg_uniform, integrated_gradients, left_ig
from decigrad.experiments import saturation_report
from decigrad.zoo import build_example1

net = build_example1()
x = np.array([2.0])

report = saturation_report(net, x, resolution=20)
for a, f, g in report.curve_rows():
    print(f"alpha={a:4.2f}  F={f:4.2f}  dF/dalpha={g:4.2f}")

# %%
# Attributions
# ------------
# IG satisfies completeness, so it sums to F(2) - F(0) = 1. The weighted
# variant multiplies each gradient by dF/dalpha, which is 2 on the rising half
# of the path and 0 on the plateau.

print("gradient      ", gradient_map(net, x, 0).values)
print("IG (512)      ", integrated_gradients(net, x, m=512).values)
print("Left-IG (0.9) ", left_ig(net, x, m=512, tau=0.9).values)
print("IDG (512)     ", idg_uniform(net, x, m=512).values)

# %%
# Decision region
# ---------------
# The shortest interval holding 90% of the rise is [0, 0.45]; the plateau
# beyond 0.5 contributes no importance mass at all.

print(f"decision region [{report.region.lo}, {report.region.hi}]")
print(f"importance mass inside: {report.inside_fraction:.3f}")
