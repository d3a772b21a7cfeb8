"""Configuration documents for the command-line runner.

A config is one JSON document.  The ten model keys (rho_C, tau_C, rho_L,
alpha, I0, tau_I, tau_B, C0, L0, B0) live at top level; orchestration
settings go in the reserved sections "run", "grid" and "pawn".  Unknown
keys are rejected, never ignored, with key-path and line diagnostics;
absent keys fall back to the standard values.  Structural problems
(unknown key, wrong type, malformed JSON) raise ConfigError; semantic
violations (negative rates, axis ranges out of bounds) surface later as
ValueError when the domain objects are built, so the runner can exit
with distinct codes for the two failure kinds.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

from .model import RANGES, STANDARD_INIT, STANDARD_PARAMS, ModelParams, SimState
from .pawn import DUMMY_NAME, VARIED_NAMES, SamplingPlan
from .sweeps import DEFAULT_GRID_COUNT, GridSpec, axis_bounds

PARAM_KEYS = tuple(STANDARD_PARAMS)
INIT_KEYS = tuple(STANDARD_INIT)
SECTION_KEYS = ("run", "grid", "pawn")

RUN_DEFAULTS = {
    "seed": 0,
    "workers": 1,
    "rel_tol": 1e-9,
    "abs_tol": 1e-3,
    "t_end": None,  # per-command default
    "max_peaks": 10,
    "k": 1,
    "mode": "magnitude",
}

PAWN_DEFAULTS = {
    "n_unconditional": 2000,
    "n_conditioning_points": 10,
    "n_conditional": 500,
    "include_dummy": False,
}


class ConfigError(Exception):
    """Structural configuration problem (parse, unknown key, bad type)."""


def _line_hint(text: str | None, key: str) -> str:
    if not text:
        return ""
    for lineno, line in enumerate(text.splitlines(), 1):
        if f'"{key}"' in line:
            return f" (line {lineno})"
    return ""


def _want_number(value, where, text):
    # bool is an int subclass; a bare true/false here is a mistake
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got "
                          f"{value!r}{_line_hint(text, where.split('.')[-1])}")
    if not math.isfinite(value):
        raise ConfigError(f"{where} must be finite, got {value!r}")
    return float(value)


def _want_int(value, where, text):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got "
                          f"{value!r}{_line_hint(text, where.split('.')[-1])}")
    return value


def _want_bool(value, where, text):
    if not isinstance(value, bool):
        raise ConfigError(f"{where} must be true or false, got "
                          f"{value!r}{_line_hint(text, where.split('.')[-1])}")
    return value


def _reject_unknown(mapping, allowed, where, text):
    for key in mapping:
        if key not in allowed:
            hint = _line_hint(text, key)
            raise ConfigError(f"unknown key {where}{key!r}{hint}; "
                              f"allowed: {', '.join(sorted(allowed))}")


def validate_config(cfg: dict, text: str | None = None) -> None:
    """Structural validation: key vocabulary and value types."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"config root must be an object, got "
                          f"{type(cfg).__name__}")
    allowed = set(PARAM_KEYS) | set(INIT_KEYS) | set(SECTION_KEYS)
    _reject_unknown(cfg, allowed, "", text)
    for key in PARAM_KEYS + INIT_KEYS:
        if key in cfg:
            _want_number(cfg[key], key, text)

    run = cfg.get("run", {})
    if not isinstance(run, dict):
        raise ConfigError(f"run must be an object{_line_hint(text, 'run')}")
    _reject_unknown(run, set(RUN_DEFAULTS), "run.", text)
    for key in ("seed", "workers", "max_peaks", "k"):
        if key in run:
            _want_int(run[key], f"run.{key}", text)
    for key in ("rel_tol", "abs_tol"):
        if key in run:
            _want_number(run[key], f"run.{key}", text)
    if run.get("t_end") is not None and "t_end" in run:
        _want_number(run["t_end"], "run.t_end", text)
    if "mode" in run and not isinstance(run["mode"], str):
        raise ConfigError(f"run.mode must be a string, got {run['mode']!r}")

    grid = cfg.get("grid", {})
    if not isinstance(grid, dict):
        raise ConfigError(f"grid must be an object{_line_hint(text, 'grid')}")
    _reject_unknown(grid, {"x", "y", "allow_outside_ranges"}, "grid.", text)
    if "allow_outside_ranges" in grid:
        _want_bool(grid["allow_outside_ranges"], "grid.allow_outside_ranges",
                   text)
    for ax in ("x", "y"):
        if ax not in grid:
            continue
        axis = grid[ax]
        if not isinstance(axis, dict):
            raise ConfigError(f"grid.{ax} must be an object")
        _reject_unknown(axis, {"name", "min", "max", "count"},
                        f"grid.{ax}.", text)
        if "name" in axis and not isinstance(axis["name"], str):
            raise ConfigError(f"grid.{ax}.name must be a string, "
                              f"got {axis['name']!r}")
        for key in ("min", "max"):
            if key in axis:
                _want_number(axis[key], f"grid.{ax}.{key}", text)
        if "count" in axis:
            _want_int(axis["count"], f"grid.{ax}.count", text)

    pawn = cfg.get("pawn", {})
    if not isinstance(pawn, dict):
        raise ConfigError(f"pawn must be an object{_line_hint(text, 'pawn')}")
    _reject_unknown(pawn, set(PAWN_DEFAULTS) | {"varied"}, "pawn.", text)
    for key in ("n_unconditional", "n_conditioning_points", "n_conditional"):
        if key in pawn:
            _want_int(pawn[key], f"pawn.{key}", text)
    if "include_dummy" in pawn:
        _want_bool(pawn["include_dummy"], "pawn.include_dummy", text)
    varied = pawn.get("varied", {})
    if not isinstance(varied, dict):
        raise ConfigError("pawn.varied must be an object of name: [min, max]")
    for name, rng in varied.items():
        if name not in VARIED_NAMES and name != DUMMY_NAME:
            raise ConfigError(
                f"unknown key pawn.varied.{name!r}{_line_hint(text, name)}; "
                f"allowed: {', '.join(VARIED_NAMES)}, {DUMMY_NAME}")
        if (not isinstance(rng, (list, tuple)) or len(rng) != 2):
            raise ConfigError(f"pawn.varied.{name} must be [min, max], "
                              f"got {rng!r}")
        for v in rng:
            _want_number(v, f"pawn.varied.{name}", text)


def load_config(path) -> dict:
    """Parse and structurally validate a config file."""
    path = Path(path)
    text = path.read_text()
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None
    validate_config(cfg, text)
    return cfg


def apply_set(cfg: dict, assignment: str) -> None:
    """Apply one ``--set path.to.key=value`` override in place.

    The value parses as JSON when possible and falls back to a bare
    string (so ``--set grid.x.name=I0`` works unquoted).
    """
    key, sep, raw = assignment.partition("=")
    if not sep or not key:
        raise ConfigError(f"--set needs key=value, got {assignment!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        nxt = node.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"--set cannot descend into {part!r} "
                              f"(not an object) in {assignment!r}")
        node = nxt
    node[parts[-1]] = value


def params_from_config(cfg: dict) -> ModelParams:
    """Model parameters with absent keys at standard values."""
    return ModelParams(**{k: cfg.get(k, STANDARD_PARAMS[k])
                          for k in PARAM_KEYS})


def init_from_config(cfg: dict) -> SimState:
    """Initial state with absent keys at standard values."""
    vals = {k: cfg.get(k, STANDARD_INIT[k]) for k in INIT_KEYS}
    return SimState(C=vals["C0"], L=vals["L0"], B=vals["B0"], t=0.0)


def run_from_config(cfg: dict) -> dict:
    """The run section with every default filled in."""
    out = dict(RUN_DEFAULTS)
    out.update(cfg.get("run", {}))
    return out


def _default_grid_section(params: ModelParams) -> dict:
    x_lo, x_hi = RANGES["I0"]
    y_lo, y_hi = axis_bounds("tauC_rhoC", params)
    return {
        "x": {"name": "I0", "min": x_lo, "max": x_hi,
              "count": DEFAULT_GRID_COUNT},
        "y": {"name": "tauC_rhoC", "min": y_lo, "max": y_hi,
              "count": DEFAULT_GRID_COUNT},
        "allow_outside_ranges": False,
    }


def grid_section(cfg: dict, params: ModelParams) -> dict:
    """The grid section with defaults (I0 x tauC_rhoC over full ranges)."""
    out = _default_grid_section(params)
    user = cfg.get("grid", {})
    if "allow_outside_ranges" in user:
        out["allow_outside_ranges"] = user["allow_outside_ranges"]
    for ax in ("x", "y"):
        if ax not in user:
            continue
        axis = dict(out[ax])
        new = dict(user[ax])
        if "name" in new and new["name"] != axis["name"]:
            # Renaming an axis invalidates the default range.
            bounds = axis_bounds(new["name"], params) \
                if new["name"] in ("I0", "tauC_rhoC", "L0", "B0", "C0") \
                else (math.nan, math.nan)
            axis = {"name": new["name"], "min": bounds[0], "max": bounds[1],
                    "count": axis["count"]}
        axis.update(new)
        out[ax] = axis
    return out


def grid_from_config(cfg: dict, params: ModelParams,
                     init: SimState) -> GridSpec:
    """Build the GridSpec (semantic errors raise ValueError)."""
    g = grid_section(cfg, params)
    return GridSpec(
        x_name=g["x"]["name"], x_min=g["x"]["min"], x_max=g["x"]["max"],
        x_count=g["x"]["count"],
        y_name=g["y"]["name"], y_min=g["y"]["min"], y_max=g["y"]["max"],
        y_count=g["y"]["count"],
        params=params, init=init,
        allow_outside_ranges=g["allow_outside_ranges"],
    )


def pawn_section(cfg: dict) -> dict:
    """The pawn section with defaults and the full varied mapping."""
    out = dict(PAWN_DEFAULTS)
    user = cfg.get("pawn", {})
    for key in PAWN_DEFAULTS:
        if key in user:
            out[key] = user[key]
    varied = {name: list(RANGES[name]) for name in VARIED_NAMES}
    if out["include_dummy"]:
        varied[DUMMY_NAME] = [0.0, 1.0]
    for name, rng in user.get("varied", {}).items():
        varied[name] = [float(rng[0]), float(rng[1])]
    out["varied"] = varied
    return out


def plan_from_config(cfg: dict, seed: int) -> SamplingPlan:
    """Build the SamplingPlan (semantic errors raise ValueError)."""
    p = pawn_section(cfg)
    names = list(VARIED_NAMES)
    if DUMMY_NAME in p["varied"] and DUMMY_NAME not in names:
        names.append(DUMMY_NAME)
    varied = tuple((n, p["varied"][n][0], p["varied"][n][1]) for n in names)
    return SamplingPlan(
        varied=varied,
        n_unconditional=p["n_unconditional"],
        n_conditioning_points=p["n_conditioning_points"],
        n_conditional=p["n_conditional"],
        seed=seed,
    )


def resolved_config(cfg: dict, command: str, run: dict,
                    params: ModelParams, init: SimState) -> dict:
    """The fully-resolved document written as the reproducibility sidecar.

    Feeding it back through ``--config`` reproduces the run bit for bit:
    every default is materialized, including the sections the command
    consumed.
    """
    out = {}
    for key in PARAM_KEYS:
        out[key] = getattr(params, key)
    out["C0"], out["L0"], out["B0"] = init.C, init.L, init.B
    out["run"] = dict(run)
    if command in ("region", "sweep"):
        out["grid"] = grid_section(cfg, params)
    if command == "pawn":
        out["pawn"] = pawn_section(cfg)
    return out
