"""Adaptive-step integration of the model with event detection.

Wraps the compiled Dormand-Prince 5(4) kernel: dense output, detection
of local maxima of L (down-crossings of g(t) = rho_L - alpha*C, refined
by bisection to 1e-6 day), a divergence guard that terminates runs when
any component exceeds a cap, and a Tolerance termination when the step
size underflows.  Long runs store decimated samples so multi-year
horizons stay at a fixed memory footprint.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _dp45
from .model import ModelParams, SimState, equilibria

TERMINATED_TIME_END = "TimeEnd"
TERMINATED_BLOWUP = "Blowup"
TERMINATED_TOLERANCE = "Tolerance"

_STATUS_NAMES = {
    _dp45.STATUS_TIME_END: TERMINATED_TIME_END,
    _dp45.STATUS_BLOWUP: TERMINATED_BLOWUP,
    _dp45.STATUS_TOLERANCE: TERMINATED_TOLERANCE,
}

# Default numerical policy.  The tight relative tolerance keeps peak
# ratios accurate over multi-year spirals; the absolute tolerance is a
# fraction of one cell.  The divergence cap and step floor define the
# Blowup and Tolerance terminations.
DEFAULT_REL_TOL = 1e-9
DEFAULT_ABS_TOL = 1e-3
DEFAULT_CAP = 1e15
DEFAULT_MIN_STEP = 1e-12
# Cap on the step so late ultra-smooth stretches cannot skip a whole
# oscillation hump between event checks.
DEFAULT_MAX_STEP = 10.0

# Oscillations about P3 with peak deviation below this fraction of L3
# stop peak collection (the amplitude floor).
PEAK_FLOOR_REL = 1e-3

# integrate() annotates at most this many peak events per run.
_ANNOTATE_PEAK_CAP = 256


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of one run.

    ``t`` is strictly increasing; ``C``, ``L``, ``B`` are the component
    samples.  ``events`` holds (time, kind) annotations with kind "peak"
    or "blowup".  ``terminated`` is one of TimeEnd, Blowup, Tolerance;
    ``blowup_time`` is the refined first cap-exceedance time (NaN when
    the run did not blow up).
    """

    t: np.ndarray
    C: np.ndarray
    L: np.ndarray
    B: np.ndarray
    terminated: str
    blowup_time: float = math.nan
    events: list = field(default_factory=list)

    @property
    def samples(self) -> list[SimState]:
        """The samples as SimState values (built on demand)."""
        return [SimState(C=float(c), L=float(l), B=float(b), t=float(t))
                for t, c, l, b in zip(self.t, self.C, self.L, self.B)]

    def final_state(self) -> SimState:
        return SimState(C=float(self.C[-1]), L=float(self.L[-1]),
                        B=float(self.B[-1]), t=float(self.t[-1]))


@dataclass(frozen=True)
class PeakSeries:
    """Ordered local maxima of L: times t_hat_n and magnitudes L_hat_n.

    ``l3`` is the L-coordinate of P3 for the run's parameters (NaN when
    P3 is undefined); deviations from it drive the amplitude floor and
    the focus-convergence diagnostics.
    """

    times: np.ndarray
    values: np.ndarray
    l3: float = math.nan

    def __len__(self) -> int:
        return len(self.times)

    @property
    def peaks(self) -> list[tuple[float, float]]:
        return list(zip(self.times.tolist(), self.values.tolist()))

    @property
    def deltas(self) -> np.ndarray:
        """Inter-peak times t_hat_{n+1} - t_hat_n."""
        return np.diff(self.times)

    @property
    def ratios(self) -> np.ndarray:
        """Successive magnitude quotients L_hat_{n+1} / L_hat_n."""
        return self.values[1:] / self.values[:-1]


def _validated(params: ModelParams, init: SimState, t_end: float):
    for name, v in (("C", init.C), ("L", init.L), ("B", init.B)):
        if not (math.isfinite(v) and v >= 0.0):
            raise ValueError(f"initial {name} must be finite and >= 0, got {v!r}")
    if not t_end > init.t:
        raise ValueError(f"t_end must exceed the initial time, got {t_end!r}")
    return float(init.C), float(init.L), float(init.B), float(init.t), float(t_end)


def _l3_of(params: ModelParams) -> float:
    p3 = equilibria(params)[2]
    return p3.coords[1] if p3.defined else math.nan


def _run_kernel(params, init, t_end, rel_tol, abs_tol, cap, min_step,
                max_step, max_peaks, stop_after_peaks, max_samples):
    c0, l0, b0, t0, t_end = _validated(params, init, t_end)
    l3 = _l3_of(params)
    floor_l3 = l3 if math.isfinite(l3) and l3 > 0.0 else 0.0
    p = params
    return l3, _dp45.dp45_run(
        p.rho_C, p.tau_C, p.rho_L, p.alpha, p.I0, p.tau_I, p.tau_B,
        c0, l0, b0, t0, t_end,
        float(rel_tol), float(abs_tol), float(cap), float(min_step),
        float(max_step), int(max_peaks), bool(stop_after_peaks),
        floor_l3, PEAK_FLOOR_REL, int(max_samples),
    )


def integrate(params: ModelParams, init: SimState, t_end: float,
              rel_tol: float = DEFAULT_REL_TOL,
              abs_tol: float = DEFAULT_ABS_TOL, *,
              cap: float = DEFAULT_CAP,
              min_step: float = DEFAULT_MIN_STEP,
              max_step: float = DEFAULT_MAX_STEP,
              max_samples: int = 4096) -> Trajectory:
    """Integrate from ``init`` to ``t_end`` days.

    Local error per step is bounded by rel_tol*|y| + abs_tol per
    component.  The run terminates early with status Blowup when any
    component exceeds ``cap`` cells (the crossing time is refined and
    reported), or Tolerance when the required step underflows
    ``min_step`` days.  Peak events are annotated on the trajectory.
    """
    _, out = _run_kernel(params, init, t_end, rel_tol, abs_tol, cap,
                         min_step, max_step, _ANNOTATE_PEAK_CAP, False,
                         max_samples)
    status, ts, ys, peak_t, _, blow_t = out
    events = [(float(t), "peak") for t in peak_t]
    if not math.isnan(blow_t):
        events.append((float(blow_t), "blowup"))
    events.sort()
    return Trajectory(
        t=ts, C=ys[:, 0], L=ys[:, 1], B=ys[:, 2],
        terminated=_STATUS_NAMES[int(status)],
        blowup_time=float(blow_t),
        events=events,
    )


def detect_peaks(params: ModelParams, init: SimState, t_end: float,
                 max_peaks: int = 10,
                 rel_tol: float = DEFAULT_REL_TOL,
                 abs_tol: float = DEFAULT_ABS_TOL, *,
                 cap: float = DEFAULT_CAP,
                 min_step: float = DEFAULT_MIN_STEP,
                 max_step: float = DEFAULT_MAX_STEP) -> PeakSeries:
    """Locate the first ``max_peaks`` local maxima of L up to ``t_end``.

    A maximum is a + to - crossing of g(t) = rho_L - alpha*C(t) with
    L > 0, refined by bisection on the dense output to 1e-6 day.  Fewer
    peaks are returned when the run terminates first or once peak
    deviations fall below the amplitude floor (|L_hat - L3| below
    0.1% of L3, for L3 > 0).  Integration stops as soon as the request
    is satisfied.
    """
    if max_peaks < 1:
        raise ValueError("max_peaks must be >= 1")
    l3, out = _run_kernel(params, init, t_end, rel_tol, abs_tol, cap,
                          min_step, max_step, max_peaks, True, 512)
    _, _, _, peak_t, peak_states, _ = out
    return PeakSeries(times=peak_t, values=peak_states[:, 1], l3=l3)


def distance_series(trajectory: Trajectory, point) -> np.ndarray:
    """Euclidean distance from each sample to an equilibrium point."""
    coords = getattr(point, "coords", point)
    c, l, b = (float(x) for x in coords)
    return np.sqrt((trajectory.C - c) ** 2 + (trajectory.L - l) ** 2
                   + (trajectory.B - b) ** 2)


def check_blowup(trajectory: Trajectory) -> tuple[bool, float]:
    """(did the run blow up, first cap-exceedance time or NaN)."""
    return (trajectory.terminated == TERMINATED_BLOWUP,
            trajectory.blowup_time)
