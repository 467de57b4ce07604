"""
The Isoardi penalty loses control of the Mach number
====================================================

Inside the limiter the Isoardi penalty damps the density at rate 1/eps but
leaves the flux alone.  Gamma / N therefore grows roughly like t / eps and
the run is stopped by the blow-up detector once |M| passes 10.  Refining the
mesh makes it happen sooner.
"""

from penaltyfv import RunConfig
from penaltyfv.experiments import mesh_study, run_config

# %%
# One configuration, three meshes.  The isoardi case imposes M0 = 1.
cfg = RunConfig(scheme="isoardi", case="isoardi", M0=1.0, eps=1e-3, n_cells=1280)
study = mesh_study(cfg, (1280, 2560, 10240))

# %%
# Stop time, where the detector fired, and the Mach number it saw.
print(f"{'cells':>6} {'t_stop':>10} {'x':>8} {'|M|':>8}")
for n, event in zip(study.meshes, study.blow_ups):
    dx = 0.5 / n
    x = (event.cell_index + 0.5) * dx
    print(f"{n:>6} {event.time:>10.5f} {x:>8.4f} {event.max_abs_M:>8.2f}")

# %%
# For comparison, the optimal penalty on the coarsest mesh holds the Mach
# number near M0 well past the Isoardi stop times.
ok = run_config(RunConfig(scheme="optimal", eps=1e-3, n_cells=1280, t_end=0.05))
print("optimal scheme, max |M| at t =", ok.state.t, ":", float(abs(ok.state.Gamma / ok.state.N).max()))
