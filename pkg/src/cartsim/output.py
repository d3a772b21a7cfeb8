"""File writers: CSV data, plain-text matrices, JSON sidecars.

Every numeric CSV cell is serialized with 17 significant digits so a
binary64 value survives the round trip exactly; repeated runs with the
same inputs therefore produce bitwise-identical files.  Lines always end
in a bare newline regardless of platform.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .integrate import PeakSeries, Trajectory
from .pawn import PawnResult
from .sweeps import PeakSurface, RegionMap

REGION_CSV_HEADER = ("I0", "tauC_rhoC", "region", "blue", "red", "green")
TRAJECTORY_CSV_HEADER = ("t", "C", "L", "B")
PEAKS_CSV_HEADER = ("n", "t_peak", "L_peak", "delta_t", "ratio")
SURFACE_CSV_HEADER = ("x", "y", "value", "mask")
PAWN_KS_CSV_HEADER = ("output", "parameter", "conditioning_value", "ks")
PAWN_SUMMARY_CSV_HEADER = ("output", "parameter", "median_ks",
                           "relative_index", "ks_critical")


def fmt(value) -> str:
    """One CSV cell: floats at .17g, bools as 0/1, the rest via str."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")


def write_matrix(path, array) -> None:
    """Plain-text matrix, one grid row per line, for plotting tools."""
    a = np.asarray(array)
    if a.dtype == bool:
        a = a.astype(int)
    lines = [" ".join(fmt(v) for v in row) for row in a]
    Path(path).write_text("\n".join(lines) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def write_json(path, obj) -> None:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True,
                      allow_nan=False)
    Path(path).write_text(text + "\n")


def clamp_tiny(value: float, abs_tol: float) -> float:
    """Zero out sub-tolerance negative values at the reporting boundary."""
    return 0.0 if -abs_tol < value < 0.0 else value


def write_trajectory(path, traj: Trajectory, abs_tol: float) -> None:
    rows = ((t, clamp_tiny(c, abs_tol), clamp_tiny(l, abs_tol),
             clamp_tiny(b, abs_tol))
            for t, c, l, b in zip(traj.t, traj.C, traj.L, traj.B))
    write_csv(path, TRAJECTORY_CSV_HEADER, rows)


def write_peaks(path, series: PeakSeries) -> None:
    rows = []
    for i, (t, v) in enumerate(zip(series.times, series.values)):
        dt = series.times[i] - series.times[i - 1] if i else math.nan
        ratio = series.values[i] / series.values[i - 1] if i else math.nan
        rows.append((i + 1, t, v, dt, ratio))
    write_csv(path, PEAKS_CSV_HEADER, rows)


def write_region(path, rm: RegionMap) -> None:
    grid = rm.grid
    xs, ys = grid.x_values(), grid.y_values()
    rows = []
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            i0, tcrc = (x, y) if grid.x_name == "I0" else (y, x)
            rows.append((i0, tcrc, rm.labels[ix, iy].value,
                         rm.blue[ix, iy], rm.red[ix, iy], rm.green[ix, iy]))
    write_csv(path, REGION_CSV_HEADER, rows)


def grid_meta(grid) -> dict:
    p, s = grid.params, grid.init
    return {
        "x": {"name": grid.x_name, "min": grid.x_min, "max": grid.x_max,
              "count": grid.x_count},
        "y": {"name": grid.y_name, "min": grid.y_min, "max": grid.y_max,
              "count": grid.y_count},
        "allow_outside_ranges": grid.allow_outside_ranges,
        "params": {"rho_C": p.rho_C, "tau_C": p.tau_C, "rho_L": p.rho_L,
                   "alpha": p.alpha, "I0": p.I0, "tau_I": p.tau_I,
                   "tau_B": p.tau_B},
        "init": {"C0": s.C, "L0": s.L, "B0": s.B},
    }


def write_surface(outdir, surf: PeakSurface) -> list[str]:
    """surface.csv plus matrix and metadata sidecars; returns filenames."""
    outdir = Path(outdir)
    grid = surf.grid
    xs, ys = grid.x_values(), grid.y_values()
    rows = []
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            missing = bool(surf.missing[ix, iy])
            rows.append((x, y, surf.values[ix, iy], int(missing)))
    write_csv(outdir / "surface.csv", SURFACE_CSV_HEADER, rows)
    write_matrix(outdir / "surface_values.txt", surf.values)
    write_matrix(outdir / "surface_mask.txt", surf.missing)
    meta = grid_meta(grid)
    meta.update({
        "k": surf.k,
        "mode": surf.mode,
        "t_end": surf.t_end,
        "rel_tol": surf.rel_tol,
        "abs_tol": surf.abs_tol,
        "mask_convention": "1 = fewer than the required peaks before the "
                           "horizon (value is NaN there)",
        "horizon_policy": f"each cell integrates to t_end = {surf.t_end} "
                          "days or until the required peak count is "
                          "reached, whichever comes first",
    })
    write_json(outdir / "surface_meta.json", meta)
    return ["surface.csv", "surface_values.txt", "surface_mask.txt",
            "surface_meta.json"]


def write_pawn_ks(path, res: PawnResult) -> None:
    rows = []
    for oi, out in enumerate(res.outputs):
        for pi, name in enumerate(res.parameters):
            for ci in range(res.conditioning_values.shape[1]):
                rows.append((out, name, res.conditioning_values[pi, ci],
                             res.ks[pi, ci, oi]))
    write_csv(path, PAWN_KS_CSV_HEADER, rows)


def write_pawn_summary(path, res: PawnResult) -> None:
    rows = []
    for oi, out in enumerate(res.outputs):
        for pi, name in enumerate(res.parameters):
            rows.append((out, name, res.median_ks[pi, oi],
                         res.relative_index[pi, oi], res.ks_critical_05))
    write_csv(path, PAWN_SUMMARY_CSV_HEADER, rows)


def write_pawn_distributions(outdir, res: PawnResult) -> list[str]:
    """Raw output samples for external CDF plotting."""
    outdir = Path(outdir)
    write_csv(outdir / "pawn_unconditional.csv", res.outputs,
              res.unconditional_outputs)
    header = ("parameter", "conditioning_value") + tuple(res.outputs)
    rows = []
    for pi, name in enumerate(res.parameters):
        for ci in range(res.conditioning_values.shape[1]):
            cv = res.conditioning_values[pi, ci]
            for row in res.conditional_outputs[pi, ci]:
                rows.append((name, cv) + tuple(row))
    write_csv(outdir / "pawn_conditional.csv", header, rows)
    return ["pawn_unconditional.csv", "pawn_conditional.csv"]
