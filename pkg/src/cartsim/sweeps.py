"""Biparametric grids, focus-convergence reports and remission analysis.

Grids vary two quantities out of {I0, tauC_rhoC, L0, B0, C0} while
everything else is held at the values in the embedded GridSpec.  The
composite axis tauC_rhoC moves rho_C with tau_C held fixed, so a grid
sweeps the product the same way the stability thresholds consume it.
Cells are independent work items; evaluation order never affects the
assembled result.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import (
    DEFAULT_ABS_TOL,
    DEFAULT_REL_TOL,
    PeakSeries,
    detect_peaks,
    distance_series,
    integrate,
)
from .model import (
    RANGES,
    ModelParams,
    SimState,
    equilibria,
    standard_init,
    standard_params,
)
from .parallel import run_indexed
from .stability import FocusParams, RegionLabel, focus_params, label_region

AXIS_NAMES = ("I0", "tauC_rhoC", "L0", "B0", "C0")

SURFACE_MODES = ("magnitude", "first_time", "inter_peak_time")

# Integer codes for matrix export of region labels.
REGION_CODES = {
    RegionLabel.NON_BIOLOGICAL: 0,
    RegionLabel.R1: 1,
    RegionLabel.R2: 2,
    RegionLabel.R3: 3,
    RegionLabel.R4: 4,
}

DEFAULT_GRID_COUNT = 51
DEFAULT_HORIZON = 7300.0  # 20 years
DEFAULT_THRESHOLD_FRACTION = 0.05


def axis_bounds(name: str, params: ModelParams) -> tuple[float, float]:
    """Admissible range of a grid axis.

    Direct parameters and initial conditions use their table ranges; the
    composite tauC_rhoC range is the rho_C range scaled by the grid's
    fixed tau_C.
    """
    if name == "tauC_rhoC":
        lo, hi = RANGES["rho_C"]
        return (lo * params.tau_C, hi * params.tau_C)
    if name not in AXIS_NAMES:
        raise ValueError(f"unknown axis {name!r}, expected one of "
                         f"{', '.join(AXIS_NAMES)}")
    return RANGES[name]


@dataclass(frozen=True)
class GridSpec:
    """Two swept axes plus the fixed parameters and initial state.

    Axis names come from {I0, tauC_rhoC, L0, B0, C0} and must differ.
    Axis ranges must sit inside the admissible bounds (see
    :func:`axis_bounds`) unless ``allow_outside_ranges`` is set.
    """

    x_name: str
    x_min: float
    x_max: float
    x_count: int = DEFAULT_GRID_COUNT
    y_name: str = "tauC_rhoC"
    y_min: float = 0.0
    y_max: float = 0.0
    y_count: int = DEFAULT_GRID_COUNT
    params: ModelParams = field(default_factory=standard_params)
    init: SimState = field(default_factory=standard_init)
    allow_outside_ranges: bool = False

    def __post_init__(self):
        for name in (self.x_name, self.y_name):
            if name not in AXIS_NAMES:
                raise ValueError(
                    f"axis {name!r} not one of {', '.join(AXIS_NAMES)}")
        if self.x_name == self.y_name:
            raise ValueError(f"both axes named {self.x_name!r}")
        for ax in ("x", "y"):
            lo = getattr(self, ax + "_min")
            hi = getattr(self, ax + "_max")
            n = getattr(self, ax + "_count")
            name = getattr(self, ax + "_name")
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{ax} axis needs finite min < max, "
                                 f"got [{lo!r}, {hi!r}]")
            if n < 2:
                raise ValueError(f"{ax}_count must be >= 2, got {n}")
            if not self.allow_outside_ranges:
                blo, bhi = axis_bounds(name, self.params)
                if lo < blo or hi > bhi:
                    raise ValueError(
                        f"{ax} axis {name} range [{lo:g}, {hi:g}] outside "
                        f"admissible [{blo:g}, {bhi:g}]; set "
                        f"allow_outside_ranges to override")

    def x_values(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.x_count)

    def y_values(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.y_count)

    def cell(self, ix: int, iy: int) -> tuple[ModelParams, SimState]:
        """Parameters and initial state at grid indices (ix, iy)."""
        x = float(self.x_values()[ix])
        y = float(self.y_values()[iy])
        params, init = _apply_axis(self.params, self.init, self.x_name, x)
        return _apply_axis(params, init, self.y_name, y)


def _apply_axis(params: ModelParams, init: SimState, name: str,
                value: float) -> tuple[ModelParams, SimState]:
    if name == "I0":
        return dataclasses.replace(params, I0=value), init
    if name == "tauC_rhoC":
        return dataclasses.replace(params, rho_C=value / params.tau_C), init
    field_name = {"L0": "L", "B0": "B", "C0": "C"}[name]
    return params, dataclasses.replace(init, **{field_name: value})


@dataclass(frozen=True)
class RegionMap:
    """Region labels over an (I0, tauC_rhoC) grid.

    Arrays are indexed [ix, iy].  ``boundary`` marks cells that land
    exactly on a threshold curve; ``blue``/``red``/``green`` hold the
    three threshold values of I0 at each cell's composite value.
    """

    grid: GridSpec
    labels: np.ndarray
    boundary: np.ndarray
    blue: np.ndarray
    red: np.ndarray
    green: np.ndarray

    def codes(self) -> np.ndarray:
        """Labels as small integers (NonBiological=0, R1..R4=1..4)."""
        flat = [REGION_CODES[lab] for lab in self.labels.ravel()]
        return np.array(flat, dtype=int).reshape(self.labels.shape)


def region_map(grid: GridSpec) -> RegionMap:
    """Classify every grid cell of an I0 x tauC_rhoC grid.

    The grid axes must be exactly {I0, tauC_rhoC} (either orientation).
    Labels match region_classify pointwise; the threshold curves are
    evaluated per cell so boundary positions are exact, not grid-limited.
    """
    if {grid.x_name, grid.y_name} != {"I0", "tauC_rhoC"}:
        raise ValueError("region map needs axes {I0, tauC_rhoC}, got "
                         f"{{{grid.x_name}, {grid.y_name}}}")
    p = grid.params
    xs, ys = grid.x_values(), grid.y_values()
    shape = (grid.x_count, grid.y_count)
    labels = np.empty(shape, dtype=object)
    boundary = np.zeros(shape, dtype=bool)
    blue = np.empty(shape)
    red = np.empty(shape)
    green = np.empty(shape)
    for ix, x in enumerate(xs):
        for iy, y in enumerate(ys):
            i0, tcrc = (x, y) if grid.x_name == "I0" else (y, x)
            lab, on_edge = label_region(i0, tcrc, p.rho_L, p.tau_I, p.tau_B)
            labels[ix, iy] = lab
            boundary[ix, iy] = on_edge
            g = math.inf if tcrc == 0.0 else 1.0 / tcrc
            blue[ix, iy] = g * (1.0 - p.tau_B / (p.tau_B + p.tau_I))
            red[ix, iy] = g * (1.0 - p.tau_B / (
                p.tau_B + p.tau_I * (1.0 + p.tau_B * p.rho_L)))
            green[ix, iy] = g
    return RegionMap(grid, labels, boundary, blue, red, green)


@dataclass(frozen=True)
class PeakSurface:
    """Per-cell k-th peak statistic over a grid.

    ``values[ix, iy]`` holds L-hat_k (magnitude mode, cells), t-hat_k
    (first_time mode, days) or t-hat_k - t-hat_{k-1} (inter_peak_time
    mode, days).  ``missing`` is True where the trajectory produced
    fewer than k peaks before the horizon (blowup or collapse); values
    are NaN exactly there and finite elsewhere.
    """

    grid: GridSpec
    k: int
    mode: str
    values: np.ndarray
    missing: np.ndarray
    t_end: float
    rel_tol: float
    abs_tol: float


def _surface_cell(args):
    (ptup, itup, k, t_end, rel_tol, abs_tol) = args
    params = ModelParams(*ptup)
    init = SimState(*itup)
    pk = detect_peaks(params, init, t_end, max_peaks=k,
                      rel_tol=rel_tol, abs_tol=abs_tol)
    n = len(pk)
    t_prev = pk.times[k - 2] if n >= k and k >= 2 else math.nan
    t_k = pk.times[k - 1] if n >= k else math.nan
    v_k = pk.values[k - 1] if n >= k else math.nan
    return (n, t_prev, t_k, v_k)


def peak_surface(grid: GridSpec, k: int = 1, mode: str = "magnitude", *,
                 t_end: float = DEFAULT_HORIZON,
                 rel_tol: float = DEFAULT_REL_TOL,
                 abs_tol: float = DEFAULT_ABS_TOL,
                 workers: int = 1) -> PeakSurface:
    """Evaluate the k-th tumor peak statistic on every grid cell.

    Each cell runs peak detection up to the k-th peak or the horizon,
    whichever comes first.  Deterministic for a given grid, tolerances
    and k regardless of ``workers``.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if mode not in SURFACE_MODES:
        raise ValueError(f"mode must be one of {', '.join(SURFACE_MODES)}, "
                         f"got {mode!r}")
    if mode == "inter_peak_time" and k < 2:
        raise ValueError("inter_peak_time needs k >= 2")

    items = []
    for ix in range(grid.x_count):
        for iy in range(grid.y_count):
            params, init = grid.cell(ix, iy)
            items.append((dataclasses.astuple(params),
                          (init.C, init.L, init.B, init.t),
                          k, t_end, rel_tol, abs_tol))
    cells = run_indexed(_surface_cell, items, workers=workers)

    shape = (grid.x_count, grid.y_count)
    values = np.full(shape, math.nan)
    missing = np.ones(shape, dtype=bool)
    for flat, (n, t_prev, t_k, v_k) in enumerate(cells):
        ix, iy = divmod(flat, grid.y_count)
        if n < k:
            continue
        missing[ix, iy] = False
        if mode == "magnitude":
            values[ix, iy] = v_k
        elif mode == "first_time":
            values[ix, iy] = t_k
        else:
            values[ix, iy] = t_k - t_prev
    return PeakSurface(grid, k, mode, values, missing, t_end, rel_tol, abs_tol)


@dataclass(frozen=True)
class FocusReport:
    """Observed vs predicted spiral convergence onto P3.

    ``deviation_ratios[n]`` is (L-hat_{n+1} - L3)/(L-hat_n - L3); the
    spiral linearization predicts it tends to ``ratio_theory`` =
    exp(2*pi*alpha/omega) < 1, and the inter-peak intervals tend to
    ``period_theory`` = 2*pi/omega.
    """

    params: ModelParams
    init: SimState
    focus: FocusParams
    l3: float
    peaks: PeakSeries
    deviation_ratios: np.ndarray
    ratio_theory: float
    period_theory: float

    def ratio_errors(self) -> np.ndarray:
        """Relative error of each deviation ratio against theory."""
        return np.abs(self.deviation_ratios - self.ratio_theory) / self.ratio_theory

    def period_errors(self) -> np.ndarray:
        """Relative error of each inter-peak interval against theory."""
        return np.abs(self.peaks.deltas - self.period_theory) / self.period_theory


def focus_convergence(params: ModelParams, n_peaks: int = 8,
                      init: SimState | None = None, *,
                      t_end: float | None = None,
                      rel_tol: float = DEFAULT_REL_TOL,
                      abs_tol: float = DEFAULT_ABS_TOL) -> FocusReport:
    """Measure the oscillatory approach to P3 against spiral theory.

    Rejects parameter points where P3 is not a focus.  When ``init`` is
    omitted the run starts from P3 displaced along L by half of L3
    (C = C3, L = 1.5*L3, B = B3): close enough to the focus that the
    linearization already governs the first recorded peaks, so the
    asymptotic ratio and period are visible within a few oscillations.
    Starting far away works too but needs many more peaks before the
    transient dies out.
    """
    fp = focus_params(params)
    if not fp.is_focus:
        raise ValueError("P3 is not a focus for these parameters "
                         "(characteristic roots all real)")
    p3 = equilibria(params)[2]
    c3, l3, b3 = p3.coords
    if init is None:
        if l3 <= 0.0:
            raise ValueError("P3 is not biological here (L3 <= 0); "
                             "pass an explicit initial state")
        init = SimState(C=c3, L=1.5 * l3, B=b3, t=0.0)
    period = 2.0 * math.pi / fp.omega
    if t_end is None:
        t_end = init.t + 1.25 * (n_peaks + 2) * period
    pk = detect_peaks(params, init, t_end, max_peaks=n_peaks,
                      rel_tol=rel_tol, abs_tol=abs_tol)
    dev = pk.values - l3
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = dev[1:] / dev[:-1]
    return FocusReport(
        params=params,
        init=init,
        focus=fp,
        l3=l3,
        peaks=pk,
        deviation_ratios=ratios,
        ratio_theory=math.exp(2.0 * math.pi * fp.alpha_re / fp.omega),
        period_theory=period,
    )


def remission_duration(params: ModelParams, init: SimState,
                       threshold_fraction: float = DEFAULT_THRESHOLD_FRACTION,
                       *, t_end: float = DEFAULT_HORIZON,
                       rel_tol: float = DEFAULT_REL_TOL,
                       abs_tol: float = DEFAULT_ABS_TOL) -> float:
    """Longest contiguous dwell time near P2, in days.

    Near means Euclidean distance below threshold_fraction * ||P2||.
    Interval edges are refined by linear interpolation of the distance
    between adjacent samples; a dwell still in progress at the horizon
    is truncated there.  Returns 0.0 when the orbit never enters the
    neighborhood.  Raises ValueError when P2 is undefined.
    """
    if not (0.0 < threshold_fraction < 1.0):
        raise ValueError(f"threshold_fraction must be in (0, 1), "
                         f"got {threshold_fraction!r}")
    p2 = equilibria(params)[1]
    if not p2.defined:
        raise ValueError("P2 is undefined at I0 = 1/(tau_C*rho_C)")
    thr = threshold_fraction * math.sqrt(sum(c * c for c in p2.coords))

    # Dense sampling keeps the decimation stride low so the edge
    # interpolation stays well inside a day even in the slow phase.
    tr = integrate(params, init, t_end, rel_tol=rel_tol, abs_tol=abs_tol,
                   max_samples=32768)
    d = distance_series(tr, p2)
    t = tr.t
    below = d < thr
    if not below.any():
        return 0.0

    def cross(i: int, j: int) -> float:
        # threshold crossing time between samples i and j
        di, dj = d[i], d[j]
        if dj == di:
            return float(t[j])
        w = (thr - di) / (dj - di)
        return float(t[i] + w * (t[j] - t[i]))

    best = 0.0
    n = len(below)
    i = 0
    while i < n:
        if not below[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and below[j + 1]:
            j += 1
        entry = float(t[0]) if i == 0 else cross(i - 1, i)
        exit_ = float(t[-1]) if j == n - 1 else cross(j, j + 1)
        best = max(best, exit_ - entry)
        i = j + 1
    return best
