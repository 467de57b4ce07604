"""End-to-end acceptance criteria, each run at its stated tolerance.

Every test prints one ``PASS criterion k: ...`` or ``FAIL criterion k: ...``
line, and the lines are repeated in a summary section at the end of the
pytest report.  Criteria that this implementation cannot meet are marked
``xfail(strict=True)``: they still run and assert the full tolerance, so an
unexpected pass turns the suite red.
"""

import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from penaltyfv.analysis import fit_rate
from penaltyfv.cases import case_isoardi, case_regular, case_stationary
from penaltyfv.cli import EXIT_OK, main
from penaltyfv.config import RunConfig, SweepConfig
from penaltyfv.experiments import mesh_study, run_config, slope_window_holds, sweep_eps
from penaltyfv.flux import physical_flux, rusanov_flux, vfroe_ncv_flux
from penaltyfv.grid import ONE_SIDED

from test_cases import pde_residuals

pytestmark = pytest.mark.acceptance

REGIONS = ("plasma", "limiter")
WINDOW = (0.8, 1.2)


def verdict(k, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def _slopes(result, norm="L1", **kw):
    return {
        (v, r): result.fit(v, r, norm, **kw).slope for v in ("N", "Gamma") for r in REGIONS
    }


def _fmt_slopes(slopes):
    return ", ".join(f"{v}/{r}={s:.3f}" for (v, r), s in slopes.items())


def _in_window(slopes):
    return all(WINDOW[0] <= s <= WINDOW[1] for s in slopes.values())


def test_criterion_1_flux_consistency():
    rng = np.random.default_rng(20261015)
    N = 10.0 ** rng.uniform(-2, 2, 10_000)
    G = rng.uniform(-3, 3, 10_000) * N
    t0 = time.perf_counter()
    fN, fG = physical_flux(N, G)
    worst = 0.0
    for flux in (vfroe_ncv_flux(N, G, N, G), rusanov_flux(N, G, N, G)):
        diff = np.hypot(flux.f_N - fN, flux.f_Gamma - fG)
        worst = max(worst, float(np.max(diff / np.hypot(fN, fG))))
    elapsed = time.perf_counter() - t0
    verdict(1, worst <= 1e-12 and elapsed < 1.0,
            f"max relative |F(v,v) - f(v)| = {worst:.2e} over 10^4 states in {elapsed:.3f} s")


def test_criterion_2_spatial_accuracy():
    t0 = time.perf_counter()
    cfg = RunConfig(geometry="plasma_only", scheme="none", n_cells=200, t_end=0.1)
    study = mesh_study(cfg, (200, 400, 800))
    orders = study.orders
    elapsed = time.perf_counter() - t0
    verdict(2, min(orders) >= 1.5 and elapsed < 60,
            f"observed orders of L1(N) = {', '.join(f'{p:.3f}' for p in orders)} ({elapsed:.1f} s)")


@pytest.mark.xfail(
    strict=True,
    reason="Gamma plasma error floors at the dx=1e-3 discretization error (about 2e-6) "
    "before the O(eps) penalty error dominates; see the decisions ledger",
)
def test_criterion_3_optimal_rate():
    t0 = time.perf_counter()
    sweep = SweepConfig(RunConfig(scheme="optimal", n_cells=500), eps=(1e-1, 1e-2, 1e-3, 1e-4))
    result = sweep_eps(sweep)
    slopes = _slopes(result)
    elapsed = time.perf_counter() - t0
    verdict(3, _in_window(slopes) and elapsed < 600,
            f"L1 slopes {_fmt_slopes(slopes)} ({elapsed:.1f} s)")


def test_criterion_4_two_fields_boundary_layer():
    t0 = time.perf_counter()
    # half decades give three sweep values in the resolved regime eps >= 10 dx
    eps = (1e-1, 10**-1.5, 1e-2, 10**-2.5, 1e-3, 1e-4)
    sweep = SweepConfig(RunConfig(scheme="two_fields", n_cells=500), eps=eps)
    result = sweep_eps(sweep)
    dx = result.grid.dx
    l2 = result.fit("N", "limiter", "L2", eps_min=10 * dx).slope
    # a thickness below one cell cannot be measured, so the fit keeps the
    # unsaturated layers with eps >= dx
    pts = [(e, bl.thickness) for e, bl in zip(eps, result.boundary_layers)
           if not bl.saturated and e >= dx * (1 - 1e-12)]
    bl = fit_rate(*zip(*pts)).slope
    elapsed = time.perf_counter() - t0
    ok = 0.4 <= l2 <= 0.6 and 0.8 <= bl <= 1.2 and elapsed < 600
    verdict(4, ok, f"N limiter L2 slope {l2:.3f} (eps >= 10 dx), boundary-layer slope {bl:.3f} "
                   f"over {len(pts)} layers ({elapsed:.1f} s)")


@pytest.mark.xfail(
    strict=True,
    reason="the Mach number diverges inside the limiter where M grows like t/eps, "
    "about 20 cells from the interface at 1280 cells; see the decisions ledger",
)
def test_criterion_5_isoardi_singularity():
    t0 = time.perf_counter()
    cfg = RunConfig(scheme="isoardi", case="isoardi", M0=1.0, eps=1e-3, n_cells=1280)
    study = mesh_study(cfg, (1280, 2560, 10240))
    elapsed = time.perf_counter() - t0
    fired = all(ev is not None for ev in study.blow_ups)
    times = [ev.time for ev in study.blow_ups] if fired else []
    distances = []
    for n, ev in zip(study.meshes, study.blow_ups):
        if ev is not None:
            grid, _ = ONE_SIDED.build(n)
            distances.append(abs(grid.centers[ev.cell_index] - 0.4) / grid.dx)
    decreasing = fired and all(a > b for a, b in zip(times, times[1:]))
    near = fired and max(distances) <= 10
    verdict(5, fired and decreasing and near and elapsed < 300,
            f"stop times {', '.join(f'{t:.5f}' for t in times)}; max-|M| cell "
            f"{', '.join(f'{d:.1f}' for d in distances)} cells from the interface ({elapsed:.1f} s)")


def test_criterion_6_stationary_preservation():
    t0 = time.perf_counter()
    cfg = RunConfig(scheme="optimal", case="stationary", M0=0.99, eps=1e-3, n_cells=500, t_end=1.0)
    result = run_config(cfg)
    initial = case_stationary(1.0, 0.99).initial_state(result.grid)
    plasma = result.mask.chi == 0
    drift = np.max(np.abs(result.state.N - initial.N)[plasma]) / np.max(np.abs(initial.N[plasma]))
    elapsed = time.perf_counter() - t0
    verdict(6, not result.blown_up and drift <= 0.05 and elapsed < 120,
            f"relative L-inf drift of N in the plasma {drift:.4f} ({elapsed:.1f} s)")


def test_criterion_7_two_sided_boundedness():
    t0 = time.perf_counter()
    details, ok = [], True
    for eps in (1e-1, 1e-5):
        peaks = []
        for n in (1000, 2000):
            cfg = RunConfig(geometry="two_sided", scheme="optimal_two_sided", eps=eps, n_cells=n)
            result = run_config(cfg)
            peaks.append(float(np.max(result.state.N)))
            ok &= not result.blown_up
        ratio = peaks[1] / peaks[0]
        ok &= bool(np.all(np.isfinite(peaks))) and ratio <= 1.2
        details.append(f"eps={eps:g}: max N {peaks[0]:.2f} -> {peaks[1]:.2f} (ratio {ratio:.3f})")
    elapsed = time.perf_counter() - t0
    verdict(7, ok and elapsed < 600, "; ".join(details) + f" ({elapsed:.1f} s)")


@pytest.mark.xfail(
    strict=True,
    reason="with M0=0.99 the relaxation front moves at speed 1-M0=0.01, so the plasma "
    "Gamma error stays at its discretization floor; see the decisions ledger",
)
def test_criterion_8_eta_robustness():
    t0 = time.perf_counter()
    sweep = SweepConfig(RunConfig(scheme="optimal", M0=0.99, n_cells=5000), eps=(1e-3, 1e-4, 1e-5))
    result = sweep_eps(sweep)
    slopes = _slopes(result, eps_max=1e-3)
    holds = slope_window_holds(result, eps_max=1e-3)
    elapsed = time.perf_counter() - t0
    verdict(8, holds and elapsed < 600,
            f"M0=0.99, dx=1e-4, eps <= 1e-3: L1 slopes {_fmt_slopes(slopes)} ({elapsed:.1f} s)")


def test_criterion_9_analysis_oracles():
    t0 = time.perf_counter()
    eps = np.logspace(-1, -7, 7)
    slope_err = max(abs(fit_rate(eps, 2.0 * eps**p).slope - p) for p in (1.0, 0.5, -0.25))
    plasma = np.linspace(0.0, 0.4, 41)
    two_sided = np.concatenate([-np.linspace(0.1, 0.5, 21), np.linspace(0.1, 0.5, 21)])
    # the stationary fields are continued by constants past x = 0.4, a kink
    # the finite-difference stencil must not straddle
    open_plasma = np.linspace(0.0, 0.395, 41)
    cases = [
        (case_regular(0.9), plasma),
        (case_regular(0.99), plasma),
        (case_regular(0.9, two_sided=True), two_sided),
        (case_isoardi(), plasma),
        (case_stationary(1.0, 0.99), open_plasma),
    ]
    worst = 0.0
    for case, xs in cases:
        for t in np.linspace(0.05, 1.0, 20):
            rN, rG = pde_residuals(case, t, xs)
            worst = max(worst, float(np.max(np.abs(rN))), float(np.max(np.abs(rG))))
    elapsed = time.perf_counter() - t0
    verdict(9, slope_err <= 1e-10 and worst <= 1e-6 and elapsed < 10,
            f"planted-slope error {slope_err:.1e}, worst source residual {worst:.1e} ({elapsed:.2f} s)")


def test_criterion_10_determinism(tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text(
        "run:\n  scheme: two_fields\n  eps: 1e-3\n  n_cells: 200\n  t_end: 0.2\n  snapshot_every: 25\n"
    )
    blobs = []
    for k in range(2):
        out = tmp_path / f"out{k}"
        assert main(["run", "--config", str(config), "--out", str(out)]) == EXIT_OK
        blobs.append((out / "snapshots.csv").read_bytes())
    verdict(10, blobs[0] == blobs[1],
            f"two runs wrote {len(blobs[0])} and {len(blobs[1])} bytes, identical={blobs[0] == blobs[1]}")
