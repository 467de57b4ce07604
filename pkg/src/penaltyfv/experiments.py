"""Experiment orchestration: single runs, eps sweeps, mesh and eta studies,
plus the CSV / manifest writers used by the command line."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import NORMS, boundary_layer_thickness, error_norms, fit_rate, observed_orders
from .boundary import BoundaryCondition
from .cases import AnalyticReference, NumericalReference, case_isoardi, case_regular, case_stationary
from .config import RunConfig, SweepConfig, run_config_dict
from .errors import BlowUpError
from .grid import CUTOFF_OUTER, ONE_SIDED, PLASMA_ONLY, TWO_SIDED
from .schemes import BlowUpHook, PenaltyScheme, SchemeKind, run_until

GEOMETRY = {"one_sided": ONE_SIDED, "two_sided": TWO_SIDED, "plasma_only": PLASMA_ONLY}
SNAPSHOT_HEADER = ("t", "x", "N", "Gamma", "M")
ERROR_HEADER = ("scheme", "eps", "dx", "variable", "region", "norm", "error")
BLOWUP_HEADER = ("scheme", "eps", "n_cells", "t_stop", "cell_index", "max_abs_M")
RATE_HEADER = ("scheme", "variable", "region", "norm", "slope", "intercept", "residual", "n_points")
SLOPE_WINDOW = (0.8, 1.2)


class SweepAborted(RuntimeError):
    """A member run of a sweep blew up; ``rows`` holds what was computed before."""

    def __init__(self, eps, event, rows):
        super().__init__(f"sweep aborted at eps={eps:g}: blow-up at t={event.time:.6g}")
        self.eps = eps
        self.event = event
        self.rows = rows


def build_case(cfg: RunConfig):
    if cfg.case == "isoardi":
        return case_isoardi()
    if cfg.case == "stationary":
        return case_stationary(S=cfg.source_amplitude, M0=cfg.M0)
    return case_regular(cfg.M0, two_sided=cfg.geometry == "two_sided")


def build_problem(cfg: RunConfig):
    """``(grid, mask, scheme, case, bc)`` for a run configuration."""
    grid, mask = GEOMETRY[cfg.geometry].build(cfg.n_cells)
    case = build_case(cfg)
    scheme = PenaltyScheme(
        kind=cfg.scheme,
        mask=mask,
        eps=cfg.eps,
        M0=cfg.M0,
        paper_literal_rusanov=cfg.paper_literal_rusanov,
        two_fields_form=cfg.two_fields_form,
        stepping=cfg.stepping,
    )
    bc = BoundaryCondition(cfg.left_bc, cfg.right_bc, case=case, M0=cfg.M0)
    return grid, mask, scheme, case, bc


@dataclass
class RunResult:
    config: RunConfig
    grid: object
    mask: object
    state: object
    log: object
    snapshots: list = field(default_factory=list)
    blow_up: object = None

    @property
    def blown_up(self) -> bool:
        return self.blow_up is not None


class _SnapshotHook:
    def __init__(self, every):
        self.every = every
        self.count = 0
        self.snapshots = []

    def __call__(self, state, report):
        self.count += 1
        if self.every and self.count % self.every == 0:
            self.snapshots.append(state.copy())


def run_config(cfg: RunConfig, extra_hooks=()) -> RunResult:
    """Run one configuration to ``t_end`` or until the blow-up detector fires.

    A blow-up is not an error here: the result carries the event and the
    state at the stop time.
    """
    grid, mask, scheme, case, bc = build_problem(cfg)
    initial = case.initial_state(grid)
    snap = _SnapshotHook(cfg.snapshot_every)
    hooks = [BlowUpHook(cfg.blow_up_threshold), snap, *extra_hooks]
    try:
        state, log = run_until(initial, cfg.t_end, grid, scheme, case, bc, cfl=cfg.cfl, hooks=hooks)
        event = None
    except BlowUpError as exc:
        state, log, event = exc.state, exc.log, exc.event
    # with a cadence: initial state, every k-th step, final state
    snapshots = [initial, *snap.snapshots] if cfg.snapshot_every else []
    if not snapshots or snapshots[-1].t != state.t:
        snapshots.append(state)
    return RunResult(cfg, grid, mask, state, log, snapshots, event)


def _run_quiet(cfg):
    r = run_config(cfg)
    return r.state, r.log, r.blow_up


def _run_many(configs, workers):
    """Run configurations, in parallel when ``workers > 1``; results keep input order."""
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_run_quiet, configs))
    return [_run_quiet(c) for c in configs]


def reference_for(sweep: SweepConfig, grid):
    if sweep.reference_policy == "analytic":
        return AnalyticReference(build_case(sweep.base))
    ref_cfg = sweep.base.replace(eps=sweep.eps_ref)
    state, _, event = _run_quiet(ref_cfg)
    if event is not None:
        raise SweepAborted(sweep.eps_ref, event, [])
    return NumericalReference(grid, state.N, state.Gamma, state.t, sweep.eps_ref)


@dataclass
class SweepResult:
    sweep: SweepConfig
    rows: list  # dicts keyed by ERROR_HEADER
    reports: list  # ErrorReport per eps
    states: list
    boundary_layers: list = field(default_factory=list)
    grid: object = None
    mask: object = None

    def errors(self, variable, region, norm="L1", eps_max=None, eps_min=None):
        """``(eps, errors)`` arrays for one error series, optionally restricted."""
        eps = np.array(self.sweep.eps)
        vals = np.array([r.get(variable, region, norm) for r in self.reports])
        keep = np.ones(eps.size, dtype=bool)
        if eps_max is not None:
            keep &= eps <= eps_max * (1 + 1e-12)
        if eps_min is not None:
            keep &= eps >= eps_min * (1 - 1e-12)
        return eps[keep], vals[keep]

    def fit(self, variable, region, norm="L1", eps_max=None, eps_min=None):
        return fit_rate(*self.errors(variable, region, norm, eps_max, eps_min))

    def fits(self, norms=NORMS):
        out = {}
        regions = sorted({(r["variable"], r["region"], r["norm"]) for r in self.rows})
        for var, region, norm in regions:
            if norm in norms:
                out[(var, region, norm)] = self.fit(var, region, norm)
        return out


def default_exclusion(cfg: RunConfig):
    """The two-sided study leaves out the cells where the flux cutoff is below 1."""
    if cfg.geometry == "two_sided":
        return ((-CUTOFF_OUTER, CUTOFF_OUTER),)
    return ()


def sweep_eps(sweep: SweepConfig, workers=1, exclude=None) -> SweepResult:
    """Run the base configuration for every eps and tabulate errors.

    With the numerical reference policy the eps_ref run goes first and is
    reused for every member.
    """
    grid, mask = GEOMETRY[sweep.base.geometry].build(sweep.base.n_cells)
    reference = reference_for(sweep, grid)
    if exclude is None:
        exclude = default_exclusion(sweep.base)
    configs = [sweep.base.replace(eps=e) for e in sweep.eps]
    outcomes = _run_many(configs, workers)
    rows, reports, states, layers = [], [], [], []
    two_fields = sweep.base.scheme == SchemeKind.TWO_FIELDS.value
    for eps, (state, _log, event) in zip(sweep.eps, outcomes):
        if event is not None:
            raise SweepAborted(eps, event, rows)
        report = error_norms(state, reference, grid, mask, exclude=exclude, meta={"eps": eps})
        reports.append(report)
        states.append(state)
        for var, region, norm, value in report.rows():
            rows.append(
                dict(scheme=sweep.base.scheme, eps=eps, dx=grid.dx, variable=var,
                     region=region, norm=norm, error=value)
            )
        if two_fields:
            layers.append(boundary_layer_thickness(state, grid, mask, target=0.0))
    return SweepResult(sweep, rows, reports, states, layers, grid, mask)


def slope_window_holds(result: SweepResult, eps_max=None, window=SLOPE_WINDOW):
    """True when every L1 slope (N, Gamma; plasma, limiter) lies in ``window``
    over the sweep values not above ``eps_max``."""
    lo, hi = window
    for var in ("N", "Gamma"):
        for region in ("plasma", "limiter"):
            slope = result.fit(var, region, "L1", eps_max=eps_max).slope
            if not lo <= slope <= hi:
                return False
    return True


def largest_eps_in_window(result: SweepResult, window=SLOPE_WINDOW):
    """Largest eps such that the L1 slope window holds over all sweep values
    not above it (at least 3 of them), or None."""
    eps = result.sweep.eps
    for k in range(len(eps) - 2):
        if slope_window_holds(result, eps_max=eps[k], window=window):
            return eps[k]
    return None


@dataclass
class EtaStudyResult:
    etas: tuple
    sweeps: list
    largest_eps: list


def eta_study(sweep: SweepConfig, etas, workers=1) -> EtaStudyResult:
    if len(etas) == 0:
        raise ValueError("eta study needs at least one eta")
    if any(not 0 < e < 1 for e in etas):
        raise ValueError("every eta must lie in (0, 1)")
    sweeps, largest = [], []
    for eta in etas:
        member = sweep.replace(base=sweep.base.replace(M0=1.0 - eta))
        res = sweep_eps(member, workers=workers)
        sweeps.append(res)
        largest.append(largest_eps_in_window(res))
    return EtaStudyResult(tuple(etas), sweeps, largest)


@dataclass
class MeshStudyResult:
    config: RunConfig
    meshes: tuple
    blow_ups: list = field(default_factory=list)  # BlowUpEvent or None per mesh
    reports: list = field(default_factory=list)
    dx: list = field(default_factory=list)

    @property
    def orders(self):
        """Pairwise observed orders of the plasma L1(N) error."""
        errs = [r.get("N", "plasma", "L1") for r in self.reports]
        return observed_orders(self.dx, errs)


def mesh_study(cfg: RunConfig, meshes, workers=1) -> MeshStudyResult:
    """Blow-up times for the Isoardi scheme, final-time errors otherwise."""
    meshes = tuple(int(n) for n in meshes)
    if len(meshes) < 3:
        raise ValueError(f"a mesh study needs at least 3 meshes, got {len(meshes)}")
    configs = [cfg.replace(n_cells=n) for n in meshes]
    outcomes = _run_many(configs, workers)
    out = MeshStudyResult(cfg, meshes)
    for c, (state, _log, event) in zip(configs, outcomes):
        grid, mask = GEOMETRY[c.geometry].build(c.n_cells)
        out.dx.append(grid.dx)
        out.blow_ups.append(event)
        if cfg.scheme != SchemeKind.ISOARDI.value:
            if event is not None:
                raise SweepAborted(c.eps, event, [])
            reference = AnalyticReference(build_case(c))
            out.reports.append(error_norms(state, reference, grid, mask, exclude=default_exclusion(c)))
    return out


# ------------------------------------------------------------------ output


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if isinstance(row, dict):
            row = [row[h] for h in header]
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def snapshot_rows(grid, snapshots):
    x = grid.centers
    for s in snapshots:
        M = s.Gamma / s.N
        for i in range(grid.n_cells):
            yield (s.t, x[i], s.N[i], s.Gamma[i], M[i])


def blowup_row(cfg: RunConfig, event):
    return (cfg.scheme, cfg.eps, cfg.n_cells, event.time, event.cell_index, event.max_abs_M)


def rate_rows(scheme, fits):
    for (var, region, norm), f in sorted(fits.items()):
        yield (scheme, var, region, norm, f.slope, f.intercept, f.residual, len(f.eps))


class OutputDir:
    """Collects files written for one command and produces the manifest.

    Each file is written to a temporary name and renamed into place.
    """

    def __init__(self, path):
        self.path = os.fspath(path)
        self.files = []

    def write(self, name, text):
        os.makedirs(self.path, exist_ok=True)
        target = os.path.join(self.path, name)
        tmp = target + ".tmp"
        data = text.encode("utf-8")
        with open(tmp, "wb") as fh:
            fh.write(data)
        os.replace(tmp, target)
        self.files.append(
            {"path": name, "sha256": hashlib.sha256(data).hexdigest(), "bytes": len(data)}
        )
        return target

    def write_csv(self, name, header, rows):
        return self.write(name, csv_text(header, rows))

    def manifest(self, command, status, config=None, **extra):
        doc = {"command": command, "status": status, "files": list(self.files)}
        if config is not None:
            doc["config"] = run_config_dict(config) if isinstance(config, RunConfig) else config
        doc.update(extra)
        text = json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n"
        os.makedirs(self.path, exist_ok=True)
        path = os.path.join(self.path, "manifest.json")
        tmp = path + ".tmp"
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
        return path


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "__dataclass_fields__"):
        return asdict(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def gnuplot_profiles(csv_name, t_final):
    return (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set xlabel 'x'\n"
        f"# final snapshot at t = {t_final!r}\n"
        f"plot '{csv_name}' using 2:3 with lines title 'N', "
        f"'' using 2:4 with lines title 'Gamma', "
        f"'' using 2:5 with lines title 'M'\n"
        "pause -1\n"
    )


def gnuplot_errors(csv_name, series):
    lines = [
        "set datafile separator ','",
        "set logscale xy",
        "set xlabel 'eps'",
        "set ylabel 'error'",
        "set key left top",
    ]
    plots = []
    for var, region, norm in series:
        sel = f'(strcol(4) eq "{var}" && strcol(5) eq "{region}" && strcol(6) eq "{norm}")'
        plots.append(
            f"'{csv_name}' using ($2):({sel} ? $7 : 1/0) with linespoints title '{norm} {var} {region}'"
        )
    lines.append("plot " + ", \\\n     ".join(plots))
    lines.append("pause -1")
    return "\n".join(lines) + "\n"
