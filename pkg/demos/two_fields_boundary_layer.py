"""
Boundary layer of the two-fields penalty
========================================

The two-fields penalty drives both N and Gamma to zero in the limiter.
Near the interface the density decays over a layer whose width shrinks
with eps, and the limiter error converges only like sqrt(eps) in L2.
The reference is the same scheme run with eps = 1e-20.
"""

import numpy as np

from penaltyfv import RunConfig, SweepConfig
from penaltyfv.experiments import sweep_eps

cfg = RunConfig(scheme="two_fields", n_cells=500)
sweep = SweepConfig(cfg, eps=(1e-1, 10**-1.5, 1e-2, 10**-2.5, 1e-3, 1e-4))
result = sweep_eps(sweep)

# %%
# Layer thickness: distance past the interface where N falls to 1% of its
# interface value.
print(f"{'eps':>9} {'thickness':>10} {'L2 N limiter':>13}")
for eps, layer, report in zip(sweep.eps, result.boundary_layers, result.reports):
    flag = " (saturated)" if layer.saturated else ""
    print(f"{eps:>9.2e} {layer.thickness:>10.5f} {report.get('N', 'limiter', 'L2'):>13.3e}{flag}")

# %%
# Rates over the resolved part of the sweep.
dx = result.grid.dx
print("L2 slope of N in the limiter, eps >= 10 dx:",
      round(result.fit("N", "limiter", "L2", eps_min=10 * dx).slope, 3))

# %%
# A coarse picture of the final density around the interface.
x = result.grid.centers
near = (x > 0.38) & (x < 0.45)
for eps, state in zip(sweep.eps[::2], result.states[::2]):
    bars = "".join(" .:-=+*#%@"[min(9, int(9 * v / state.N[near].max()))] for v in state.N[near])
    print(f"eps={eps:8.1e} |{bars}|")
print("             x = 0.38" + " " * (int(np.sum(near)) - 15) + "0.45")
