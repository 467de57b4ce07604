"""
A stationary plasma stays put
=============================

A constant particle source S balanced by outflow at Mach M0 gives a steady
profile.  Started from it, the optimal scheme should leave the plasma
essentially unchanged.  This script reports the drift after one time unit.
"""

import numpy as np

from penaltyfv import RunConfig
from penaltyfv.cases import case_stationary
from penaltyfv.experiments import run_config

cfg = RunConfig(scheme="optimal", case="stationary", M0=0.99, eps=1e-3, n_cells=500, snapshot_every=200)
result = run_config(cfg)
start = case_stationary(1.0, 0.99).initial_state(result.grid)
plasma = result.mask.chi == 0
scale = np.abs(start.N[plasma]).max()
for snap in result.snapshots:
    drift = np.abs(snap.N - start.N)[plasma].max() / scale
    print(f"t = {snap.t:6.3f}   relative drift of N in the plasma: {drift:.2e}")
