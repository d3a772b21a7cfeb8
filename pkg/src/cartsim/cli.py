"""Command-line runner: one binary, six subcommands.

Exit codes: 0 success, 2 configuration problem (unparseable file,
unknown key, wrong type), 3 domain violation (parameter or range
outside its admissible set).  Numerical termination (Blowup/Tolerance)
is a result, not a failure: it is recorded in run_meta.json and the run
exits 0.  Every run writes resolved_config.json (the full configuration
with all defaults materialized; feeding it back through --config
reproduces the outputs) next to a run_meta.json result summary.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    apply_set,
    grid_from_config,
    init_from_config,
    load_config,
    params_from_config,
    plan_from_config,
    resolved_config,
    run_from_config,
    validate_config,
)
from .integrate import detect_peaks, integrate
from .model import equilibria as model_equilibria
from .output import (
    clamp_tiny,
    grid_meta,
    write_json,
    write_matrix,
    write_pawn_distributions,
    write_pawn_ks,
    write_pawn_summary,
    write_peaks,
    write_region,
    write_surface,
    write_trajectory,
)
from .pawn import pawn_indices
from .stability import classify, region_classify, thresholds
from .sweeps import REGION_CODES, SURFACE_MODES, peak_surface, region_map

COMMANDS = ("simulate", "equilibria", "region", "sweep", "peaks", "pawn")

T_END_DEFAULTS = {
    "simulate": 365.0,
    "peaks": 7300.0,
    "sweep": 7300.0,
    "pawn": 1825.0,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON configuration file")
    common.add_argument("--out", metavar="DIR", default="out",
                        help="output directory (created if absent)")
    common.add_argument("--set", metavar="KEY=VALUE", action="append",
                        default=[], dest="overrides",
                        help="override one config entry, repeatable "
                             "(e.g. --set I0=2.1e9, --set grid.x.count=11)")
    common.add_argument("--seed", type=int, help="random seed")
    common.add_argument("--workers", type=int, help="parallel worker cap")
    common.add_argument("--rel-tol", type=float, dest="rel_tol",
                        help="integrator relative tolerance")
    common.add_argument("--abs-tol", type=float, dest="abs_tol",
                        help="integrator absolute tolerance (cells)")

    parser = argparse.ArgumentParser(
        prog="cartsim",
        description="Simulate and analyze a three-population model of "
                    "CAR T-cell therapy in leukemia.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common],
                       help="integrate one trajectory to CSV")
    p.add_argument("--t-end", type=float, dest="t_end",
                   help="integration horizon in days (default 365)")

    sub.add_parser("equilibria", parents=[common],
                   help="equilibrium coordinates, eigenvalues and region")

    sub.add_parser("region", parents=[common],
                   help="region labels over an I0 x tauC_rhoC grid")

    p = sub.add_parser("sweep", parents=[common],
                       help="k-th peak statistic over a 2-parameter grid")
    p.add_argument("--t-end", type=float, dest="t_end",
                   help="per-cell horizon in days (default 7300)")
    p.add_argument("--k", type=int, help="peak index (default 1)")
    p.add_argument("--mode", choices=SURFACE_MODES,
                   help="surface statistic (default magnitude)")

    p = sub.add_parser("peaks", parents=[common],
                       help="tumor-load maxima of one trajectory")
    p.add_argument("--t-end", type=float, dest="t_end",
                   help="integration horizon in days (default 7300)")
    p.add_argument("--max-peaks", type=int, dest="max_peaks",
                   help="stop after this many maxima (default 10)")

    p = sub.add_parser("pawn", parents=[common],
                       help="distribution-based sensitivity indices")
    p.add_argument("--t-end", type=float, dest="t_end",
                   help="evaluation horizon in days (default 1825)")
    p.add_argument("--distributions", action="store_true",
                   help="also dump raw output samples for CDF plotting")

    return parser


def _resolve_run(cfg: dict, args) -> dict:
    run = run_from_config(cfg)
    for key in ("seed", "workers", "rel_tol", "abs_tol", "t_end",
                "max_peaks", "k", "mode"):
        value = getattr(args, key, None)
        if value is not None:
            run[key] = value
    if run["t_end"] is None:
        run["t_end"] = T_END_DEFAULTS.get(args.command)
    return run


def _point_report(point, params) -> dict:
    entry = {
        "kind": point.kind,
        "defined": point.defined,
        "coords": list(point.coords),
        "conditioning_warning": point.conditioning_warning,
    }
    if point.defined:
        rep = classify(point, params)
        entry.update({
            "eigenvalues": [[ev.real, ev.imag] for ev in rep.eigenvalues],
            "stable": rep.stable,
            "dim_stable": rep.dim_stable,
            "dim_unstable": rep.dim_unstable,
            "non_hyperbolic": rep.non_hyperbolic,
            "biological": rep.biological,
        })
    return entry


def _cmd_simulate(outdir, run, params, init):
    traj = integrate(params, init, run["t_end"],
                     rel_tol=run["rel_tol"], abs_tol=run["abs_tol"])
    write_trajectory(outdir / "trajectory.csv", traj, run["abs_tol"])
    final = traj.final_state()
    return {
        "terminated": traj.terminated,
        "blowup_time": traj.blowup_time,
        "n_samples": len(traj.t),
        "final_state": {"t": final.t,
                        "C": clamp_tiny(final.C, run["abs_tol"]),
                        "L": clamp_tiny(final.L, run["abs_tol"]),
                        "B": clamp_tiny(final.B, run["abs_tol"])},
    }, ["trajectory.csv"]


def _cmd_equilibria(outdir, run, params, init):
    label, on_boundary = region_classify(params)
    thr = thresholds(params)
    report = {
        "region": label.value,
        "on_boundary": on_boundary,
        "thresholds": {"blue": thr.blue, "red": thr.red, "green": thr.green},
        "equilibria": [_point_report(pt, params)
                       for pt in model_equilibria(params)],
    }
    write_json(outdir / "equilibria.json", report)
    return {"region": label.value}, ["equilibria.json"]


def _cmd_region(outdir, run, cfg, params, init):
    grid = grid_from_config(cfg, params, init)
    rm = region_map(grid)
    write_region(outdir / "region.csv", rm)
    codes = rm.codes()
    write_matrix(outdir / "region_codes.txt", codes)
    write_matrix(outdir / "region_boundary.txt", rm.boundary)
    counts = {lab.value: int((codes == code).sum())
              for lab, code in REGION_CODES.items()}
    meta = {"grid": grid_meta(grid), "region_counts": counts,
            "boundary_cells": int(rm.boundary.sum())}
    return meta, ["region.csv", "region_codes.txt", "region_boundary.txt"]


def _cmd_sweep(outdir, run, cfg, params, init):
    grid = grid_from_config(cfg, params, init)
    surf = peak_surface(grid, k=run["k"], mode=run["mode"],
                        t_end=run["t_end"], rel_tol=run["rel_tol"],
                        abs_tol=run["abs_tol"], workers=run["workers"])
    files = write_surface(outdir, surf)
    meta = {"k": surf.k, "mode": surf.mode, "t_end": surf.t_end,
            "missing_cells": int(surf.missing.sum()),
            "cells": int(surf.values.size)}
    return meta, files


def _cmd_peaks(outdir, run, params, init):
    series = detect_peaks(params, init, run["t_end"],
                          max_peaks=run["max_peaks"],
                          rel_tol=run["rel_tol"], abs_tol=run["abs_tol"])
    write_peaks(outdir / "peaks.csv", series)
    return {"n_peaks": len(series), "l3": series.l3}, ["peaks.csv"]


def _cmd_pawn(outdir, run, cfg, args):
    plan = plan_from_config(cfg, run["seed"])
    res = pawn_indices(plan, t_end=run["t_end"], rel_tol=run["rel_tol"],
                       abs_tol=run["abs_tol"], workers=run["workers"])
    write_pawn_ks(outdir / "pawn_ks.csv", res)
    write_pawn_summary(outdir / "pawn_summary.csv", res)
    files = ["pawn_ks.csv", "pawn_summary.csv"]
    if args.distributions:
        files += write_pawn_distributions(outdir, res)
    meta = {
        "ks_critical_05": res.ks_critical_05,
        "unconditional_coverage": list(res.unconditional_coverage),
        "coverage": res.coverage.tolist(),
        "parameters": list(res.parameters),
        "outputs": list(res.outputs),
    }
    return meta, files


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else {}
        for assignment in args.overrides:
            apply_set(cfg, assignment)
        if args.overrides:
            validate_config(cfg)
        run = _resolve_run(cfg, args)
    except ConfigError as e:
        print(f"cartsim: config error: {e}", file=sys.stderr)
        return 2

    try:
        params = params_from_config(cfg)
        init = init_from_config(cfg)
        outdir = Path(args.out)
        outdir.mkdir(parents=True, exist_ok=True)
        if args.command == "simulate":
            meta, files = _cmd_simulate(outdir, run, params, init)
        elif args.command == "equilibria":
            meta, files = _cmd_equilibria(outdir, run, params, init)
        elif args.command == "region":
            meta, files = _cmd_region(outdir, run, cfg, params, init)
        elif args.command == "sweep":
            meta, files = _cmd_sweep(outdir, run, cfg, params, init)
        elif args.command == "peaks":
            meta, files = _cmd_peaks(outdir, run, params, init)
        else:
            meta, files = _cmd_pawn(outdir, run, cfg, args)
    except ValueError as e:
        print(f"cartsim: invalid value: {e}", file=sys.stderr)
        return 3

    sidecar = resolved_config(cfg, args.command, run, params, init)
    write_json(outdir / "resolved_config.json", sidecar)
    run_meta = {"command": args.command, "version": __version__,
                "artifacts": sorted(files + ["resolved_config.json",
                                             "run_meta.json"])}
    run_meta.update(meta)
    write_json(outdir / "run_meta.json", run_meta)
    return 0


if __name__ == "__main__":
    sys.exit(main())
