"""Command line: ``penaltyfv {run,sweep-eps,mesh-study,eta-study} --config FILE``.

Exit codes: 0 success, 2 invalid configuration or arguments, 3 stopped by
the blow-up detector (the expected outcome of Isoardi experiments), 1 any
other failure.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config
from .experiments import (
    BLOWUP_HEADER,
    ERROR_HEADER,
    RATE_HEADER,
    SNAPSHOT_HEADER,
    OutputDir,
    SweepAborted,
    blowup_row,
    eta_study,
    gnuplot_errors,
    gnuplot_profiles,
    mesh_study,
    rate_rows,
    run_config,
    snapshot_rows,
    sweep_eps,
)
from .schemes import SchemeKind

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_INVALID = 2
EXIT_BLOW_UP = 3

log = logging.getLogger("penaltyfv")


def _out_dir(args, study):
    return args.out or study.run.out or "out"


def _error_series(rows):
    keys = sorted({(r["variable"], r["region"], r["norm"]) for r in rows if r["norm"] == "L1"})
    return [k for k in keys if k[0] in ("N", "Gamma")]


def _write_sweep(out, result, prefix=""):
    out.write_csv(f"{prefix}errors.csv", ERROR_HEADER, result.rows)
    fits = result.fits()
    out.write_csv(f"{prefix}rates.csv", RATE_HEADER, rate_rows(result.sweep.base.scheme, fits))
    if result.boundary_layers:
        rows = [
            (e, bl.thickness, int(bl.saturated))
            for e, bl in zip(result.sweep.eps, result.boundary_layers)
        ]
        out.write_csv(f"{prefix}boundary_layer.csv", ("eps", "thickness", "saturated"), rows)
    return fits


def cmd_run(args, study) -> int:
    cfg = study.run
    result = run_config(cfg)
    out = OutputDir(_out_dir(args, study))
    out.write_csv("snapshots.csv", SNAPSHOT_HEADER, snapshot_rows(result.grid, result.snapshots))
    status = "completed"
    if result.blown_up:
        out.write_csv("blowup.csv", BLOWUP_HEADER, [blowup_row(cfg, result.blow_up)])
        status = "blow_up"
    if args.emit_plots:
        out.write("profiles.gp", gnuplot_profiles("snapshots.csv", result.state.t))
    out.manifest(
        "run", status, cfg,
        t_final=result.state.t, n_steps=result.log.n_steps,
        entropy_fix_count=result.log.entropy_fix_count,
        positivity_fallback_count=result.log.positivity_fallback_count,
    )
    if result.blown_up:
        ev = result.blow_up
        log.warning("stopped by blow-up detector at t=%.6g, cell %d, max|M|=%.4g",
                    ev.time, ev.cell_index, ev.max_abs_M)
        return EXIT_BLOW_UP
    return EXIT_OK


def _sweep_config(study):
    if study.sweep is None:
        raise ConfigError("this command needs a 'sweep' section")
    return study.sweep


def cmd_sweep_eps(args, study) -> int:
    sweep = _sweep_config(study)
    out = OutputDir(_out_dir(args, study))
    try:
        result = sweep_eps(sweep, workers=args.workers)
    except SweepAborted as exc:
        out.write_csv("errors.csv", ERROR_HEADER, exc.rows)
        out.write_csv("blowup.csv", BLOWUP_HEADER, [blowup_row(sweep.base.replace(eps=exc.eps), exc.event)])
        out.manifest("sweep-eps", "aborted", sweep.base, eps=list(sweep.eps), aborted_at=exc.eps)
        log.warning("%s", exc)
        return EXIT_BLOW_UP
    fits = _write_sweep(out, result)
    if args.emit_plots:
        out.write("errors.gp", gnuplot_errors("errors.csv", _error_series(result.rows)))
    for (var, region, norm), f in sorted(fits.items()):
        if norm == "L1" and var in ("N", "Gamma"):
            log.info("L1 %s %s slope %.3f", var, region, f.slope)
    out.manifest("sweep-eps", "completed", sweep.base, eps=list(sweep.eps),
                 reference=sweep.reference_policy)
    return EXIT_OK


def cmd_mesh_study(args, study) -> int:
    cfg = study.run
    if len(study.meshes) < 3:
        raise ConfigError(f"mesh_study.meshes needs at least 3 meshes, got {len(study.meshes)}")
    out = OutputDir(_out_dir(args, study))
    try:
        result = mesh_study(cfg, study.meshes, workers=args.workers)
    except SweepAborted as exc:
        out.write_csv("blowup.csv", BLOWUP_HEADER, [blowup_row(cfg, exc.event)])
        out.manifest("mesh-study", "aborted", cfg, meshes=list(study.meshes))
        return EXIT_BLOW_UP
    if cfg.scheme == SchemeKind.ISOARDI.value:
        rows = [
            blowup_row(cfg.replace(n_cells=n), ev)
            for n, ev in zip(result.meshes, result.blow_ups) if ev is not None
        ]
        out.write_csv("blowup.csv", BLOWUP_HEADER, rows)
        missing = [n for n, ev in zip(result.meshes, result.blow_ups) if ev is None]
        out.manifest("mesh-study", "completed", cfg, meshes=list(study.meshes), no_blow_up=missing)
        return EXIT_OK
    rows = []
    for n, dx, rep in zip(result.meshes, result.dx, result.reports):
        for var, region, norm, value in rep.rows():
            rows.append(dict(scheme=cfg.scheme, eps=cfg.eps, dx=dx, variable=var,
                             region=region, norm=norm, error=value))
    out.write_csv("errors.csv", ERROR_HEADER, rows)
    orders = [(n, dx, rep.get("N", "plasma", "L1")) for n, dx, rep in zip(result.meshes, result.dx, result.reports)]
    order_rows = [(n, dx, e, "" if k == 0 else result.orders[k - 1]) for k, (n, dx, e) in enumerate(orders)]
    out.write_csv("orders.csv", ("n_cells", "dx", "L1_N_plasma", "order"), order_rows)
    out.manifest("mesh-study", "completed", cfg, meshes=list(study.meshes))
    return EXIT_OK


def cmd_eta_study(args, study) -> int:
    sweep = _sweep_config(study)
    if not study.etas:
        raise ConfigError("eta_study.etas must list at least one eta")
    out = OutputDir(_out_dir(args, study))
    try:
        result = eta_study(sweep, study.etas, workers=args.workers)
    except SweepAborted as exc:
        out.manifest("eta-study", "aborted", sweep.base, etas=list(study.etas), aborted_at=exc.eps)
        log.warning("%s", exc)
        return EXIT_BLOW_UP
    summary = []
    for eta, res, largest in zip(result.etas, result.sweeps, result.largest_eps):
        _write_sweep(out, res, prefix=f"eta_{eta!r}_")
        summary.append((eta, 1.0 - eta, "" if largest is None else largest))
    out.write_csv("eta_summary.csv", ("eta", "M0", "largest_eps_in_window"), summary)
    if args.emit_plots:
        for eta, res in zip(result.etas, result.sweeps):
            name = f"eta_{eta!r}_errors.csv"
            out.write(f"eta_{eta!r}_errors.gp", gnuplot_errors(name, _error_series(res.rows)))
    out.manifest("eta-study", "completed", sweep.base, etas=list(study.etas), eps=list(sweep.eps))
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "sweep-eps": cmd_sweep_eps,
    "mesh-study": cmd_mesh_study,
    "eta-study": cmd_eta_study,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="penaltyfv",
        description="Penalized finite-volume experiments for the 1D plasma transport model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML config file")
        p.add_argument("--out", default=None, help="output directory (default: config 'out' or ./out)")
        p.add_argument("--emit-plots", action="store_true", help="also write gnuplot scripts")
        p.add_argument("--workers", type=int, default=1, help="parallel runs for sweeps and studies")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on bad usage
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    try:
        # parse and validate everything before any output is written
        study = load_config(args.config)
        if args.command in ("sweep-eps", "eta-study"):
            _sweep_config(study)
        return COMMANDS[args.command](args, study)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001 - last-resort reporting
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
