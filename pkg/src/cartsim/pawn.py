"""Moment-independent global sensitivity of peak outputs (PAWN).

Four scalar outputs per model run: magnitude and time of the first two
tumor peaks.  Sensitivity of an input is measured by how much fixing it
shifts the output distribution: for each conditioning value the
Kolmogorov-Smirnov statistic between the conditional and unconditional
empirical CDFs is computed, and the median over conditioning values is
the index.  Inputs vary jointly uniform over their admissible ranges;
everything else stays at the standard values.

Missing peaks (blowup or collapse before the second maximum) make an
output invalid for that draw; invalid draws are excluded listwise per
output and the surviving fraction is reported as coverage.  A
parameter/output pair aborts (NaN index) when more than half of its
conditioning points cannot form a KS comparison with at least
``MIN_SIDE`` valid samples on each side.

Randomness is counter-based (Philox) with one dedicated stream per
(parameter, conditioning point) plus one for the unconditional set, all
derived from the plan seed, so results are bitwise reproducible and
independent of evaluation order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .integrate import DEFAULT_ABS_TOL, DEFAULT_REL_TOL, detect_peaks
from .model import RANGES, STANDARD_INIT, STANDARD_PARAMS, ModelParams, SimState
from .parallel import run_indexed

# Canonical order of the varied inputs.
VARIED_NAMES = ("rho_C", "tau_C", "I0", "C0", "L0")
DUMMY_NAME = "dummy"

OUTPUT_NAMES = ("first_peak_mag", "second_peak_mag",
                "first_peak_time", "second_peak_time")

DEFAULT_EVAL_HORIZON = 1825.0  # days

# Fewest valid samples on either side of a KS comparison before the
# conditioning point is declared non-computable (the plan count floor).
MIN_SIDE = 10

# Asymptotic two-sample critical constants c(level).
KS_CRITICAL_CONSTANTS = {0.10: 1.22, 0.05: 1.36, 0.025: 1.48, 0.01: 1.63}


def _default_varied() -> tuple[tuple[str, float, float], ...]:
    return tuple((n, RANGES[n][0], RANGES[n][1]) for n in VARIED_NAMES)


@dataclass(frozen=True)
class SamplingPlan:
    """Which inputs vary, over what ranges, and how many draws.

    ``varied`` defaults to the five standard inputs over their full
    admissible ranges; a ``dummy`` entry (drawn but never fed to the
    model) may be appended as a sanity control.  Non-dummy ranges must
    sit inside the admissible bounds; all counts must be >= 10.
    """

    varied: tuple[tuple[str, float, float], ...] = field(
        default_factory=_default_varied)
    n_unconditional: int = 2000
    n_conditioning_points: int = 10
    n_conditional: int = 500
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "varied",
                           tuple((str(n), float(lo), float(hi))
                                 for n, lo, hi in self.varied))
        names = [v[0] for v in self.varied]
        if not names:
            raise ValueError("plan varies no inputs")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate varied names in {names}")
        allowed = set(VARIED_NAMES) | {DUMMY_NAME}
        for name, lo, hi in self.varied:
            if name not in allowed:
                raise ValueError(f"cannot vary {name!r}; allowed: "
                                 f"{', '.join(sorted(allowed))}")
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{name} needs finite min < max, "
                                 f"got [{lo!r}, {hi!r}]")
            if name != DUMMY_NAME:
                blo, bhi = RANGES[name]
                if lo < blo or hi > bhi:
                    raise ValueError(
                        f"{name} range [{lo:g}, {hi:g}] outside admissible "
                        f"[{blo:g}, {bhi:g}]")
        for attr in ("n_unconditional", "n_conditioning_points",
                     "n_conditional"):
            if getattr(self, attr) < 10:
                raise ValueError(f"{attr} must be >= 10, "
                                 f"got {getattr(self, attr)}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v[0] for v in self.varied)


def default_plan(seed: int = 0, include_dummy: bool = False,
                 **counts) -> SamplingPlan:
    """The standard plan, optionally with a trailing dummy input."""
    varied = _default_varied()
    if include_dummy:
        varied = varied + ((DUMMY_NAME, 0.0, 1.0),)
    return SamplingPlan(varied=varied, seed=seed, **counts)


@dataclass(frozen=True)
class OutputQuad:
    """The four peak outputs of one run, NaN where invalid.

    ``valid`` flags follow OUTPUT_NAMES order; a flag is False when the
    required peak did not exist before the evaluation horizon.
    """

    first_peak_mag: float
    second_peak_mag: float
    first_peak_time: float
    second_peak_time: float
    valid: tuple[bool, bool, bool, bool]

    def values(self) -> tuple[float, float, float, float]:
        return (self.first_peak_mag, self.second_peak_mag,
                self.first_peak_time, self.second_peak_time)


def evaluate_outputs(params: ModelParams, init: SimState, *,
                     t_end: float = DEFAULT_EVAL_HORIZON,
                     rel_tol: float = DEFAULT_REL_TOL,
                     abs_tol: float = DEFAULT_ABS_TOL) -> OutputQuad:
    """Peak magnitudes and times of the first two tumor maxima."""
    pk = detect_peaks(params, init, t_end, max_peaks=2,
                      rel_tol=rel_tol, abs_tol=abs_tol)
    n = len(pk)
    m1 = float(pk.values[0]) if n >= 1 else math.nan
    t1 = float(pk.times[0]) if n >= 1 else math.nan
    m2 = float(pk.values[1]) if n >= 2 else math.nan
    t2 = float(pk.times[1]) if n >= 2 else math.nan
    return OutputQuad(m1, m2, t1, t2, (n >= 1, n >= 2, n >= 1, n >= 2))


@dataclass(frozen=True)
class EmpiricalCDF:
    """Right-continuous step function F(x) = (#samples <= x)/n."""

    x: np.ndarray  # sorted
    n: int

    def eval(self, v) -> np.ndarray:
        """F evaluated at scalar or array ``v``."""
        return np.searchsorted(self.x, v, side="right") / self.n

    @property
    def heights(self) -> np.ndarray:
        """Step heights at the sorted sample points."""
        return np.arange(1, self.n + 1) / self.n


def ecdf(samples) -> EmpiricalCDF:
    """Empirical CDF of a nonempty, all-finite sample."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("ecdf needs at least one sample")
    if not np.isfinite(x).all():
        raise ValueError("ecdf samples must all be finite")
    return EmpiricalCDF(x=np.sort(x), n=x.size)


def ks_statistic(a, b) -> float:
    """Sup-norm distance between two empirical CDFs.

    Arguments may be EmpiricalCDF values or raw sample arrays.  The sup
    is taken over the union of jump points, where step functions attain
    their extreme differences.
    """
    if not isinstance(a, EmpiricalCDF):
        a = ecdf(a)
    if not isinstance(b, EmpiricalCDF):
        b = ecdf(b)
    grid = np.union1d(a.x, b.x)
    return float(np.max(np.abs(a.eval(grid) - b.eval(grid))))


def ks_critical(n: int, m: int, level: float = 0.05) -> float:
    """Asymptotic two-sample KS critical value c(level)*sqrt((n+m)/(n*m))."""
    if n < 1 or m < 1:
        raise ValueError("sample sizes must be >= 1")
    try:
        c = KS_CRITICAL_CONSTANTS[level]
    except KeyError:
        levels = ", ".join(str(k) for k in sorted(KS_CRITICAL_CONSTANTS))
        raise ValueError(f"level must be one of {levels}, got {level!r}")
    return c * math.sqrt((n + m) / (n * m))


@dataclass(frozen=True)
class PawnResult:
    """Indices, raw KS values, samples and coverage of one analysis.

    Arrays are indexed [parameter, conditioning point, output] with the
    trailing axes dropped where they do not apply.  ``ks`` is NaN at
    non-computable conditioning points; ``median_ks`` and
    ``relative_index`` are NaN for aborted pairs.  Relative indices sum
    to 1 per output over the non-aborted parameters.
    """

    parameters: tuple[str, ...]
    outputs: tuple[str, ...]
    conditioning_values: np.ndarray  # (k, n_conditioning_points)
    ks: np.ndarray                   # (k, points, 4)
    median_ks: np.ndarray            # (k, 4)
    relative_index: np.ndarray       # (k, 4)
    coverage: np.ndarray             # (k, 4) valid fraction per pair
    unconditional_coverage: np.ndarray  # (4,)
    valid_conditional: np.ndarray    # (k, points, 4) counts
    valid_unconditional: np.ndarray  # (4,) counts
    unconditional_outputs: np.ndarray   # (n_unconditional, 4)
    conditional_outputs: np.ndarray  # (k, points, n_conditional, 4)
    ks_critical_05: float
    plan: SamplingPlan

    def ranking(self, output: str) -> tuple[str, ...]:
        """Parameter names by descending median KS for one output."""
        o = self.outputs.index(output)
        med = self.median_ks[:, o]
        order = sorted(range(len(self.parameters)),
                       key=lambda i: (math.isnan(med[i]), -med[i]))
        return tuple(self.parameters[i] for i in order)


def _draw(seed: int, spawn_key: tuple[int, ...], shape) -> np.ndarray:
    ss = np.random.SeedSequence(seed, spawn_key=spawn_key)
    return np.random.Generator(np.random.Philox(ss)).random(shape)


def _eval_block(args) -> np.ndarray:
    rows, names, t_end, rel_tol, abs_tol = args
    out = np.empty((rows.shape[0], 4))
    for r in range(rows.shape[0]):
        pkw = dict(STANDARD_PARAMS)
        ikw = dict(STANDARD_INIT)
        for name, v in zip(names, rows[r]):
            if name in pkw:
                pkw[name] = v
            elif name != DUMMY_NAME:
                ikw[name] = v
        params = ModelParams(**pkw)
        init = SimState(C=ikw["C0"], L=ikw["L0"], B=ikw["B0"])
        out[r] = evaluate_outputs(params, init, t_end=t_end,
                                  rel_tol=rel_tol, abs_tol=abs_tol).values()
    return out


def pawn_indices(plan: SamplingPlan, *,
                 t_end: float = DEFAULT_EVAL_HORIZON,
                 rel_tol: float = DEFAULT_REL_TOL,
                 abs_tol: float = DEFAULT_ABS_TOL,
                 workers: int = 1) -> PawnResult:
    """Run the full sampling plan and compute PAWN indices.

    All random draws are materialized up front from dedicated streams,
    then evaluated (in parallel when ``workers`` > 1) and reduced in a
    fixed order, so identical plans give bitwise-identical results.
    """
    names = plan.names
    k = len(names)
    lo = np.array([v[1] for v in plan.varied])
    hi = np.array([v[2] for v in plan.varied])
    n_pts = plan.n_conditioning_points

    x_unc = lo + _draw(plan.seed, (0, 0), (plan.n_unconditional, k)) * (hi - lo)
    cond_values = np.empty((k, n_pts))
    blocks = [(x_unc, names, t_end, rel_tol, abs_tol)]
    for i in range(k):
        cond_values[i] = np.linspace(lo[i], hi[i], n_pts)
        for j in range(n_pts):
            x = lo + _draw(plan.seed, (i + 1, j),
                           (plan.n_conditional, k)) * (hi - lo)
            x[:, i] = cond_values[i, j]
            blocks.append((x, names, t_end, rel_tol, abs_tol))
    results = run_indexed(_eval_block, blocks, workers=workers)

    u_out = results[0]
    c_out = np.empty((k, n_pts, plan.n_conditional, 4))
    for i in range(k):
        for j in range(n_pts):
            c_out[i, j] = results[1 + i * n_pts + j]

    ks = np.full((k, n_pts, 4), math.nan)
    valid_c = np.zeros((k, n_pts, 4), dtype=int)
    u_finite = np.isfinite(u_out)
    valid_u = u_finite.sum(axis=0)
    u_cdfs = [ecdf(u_out[u_finite[:, o], o]) if valid_u[o] >= 1 else None
              for o in range(4)]
    for o in range(4):
        for i in range(k):
            for j in range(n_pts):
                s = c_out[i, j, :, o]
                s = s[np.isfinite(s)]
                valid_c[i, j, o] = s.size
                if s.size >= MIN_SIDE and valid_u[o] >= MIN_SIDE:
                    ks[i, j, o] = ks_statistic(ecdf(s), u_cdfs[o])

    median_ks = np.full((k, 4), math.nan)
    for i in range(k):
        for o in range(4):
            vals = ks[i, :, o]
            vals = vals[np.isfinite(vals)]
            # More than half the conditioning points non-computable
            # aborts the pair.
            if vals.size >= n_pts - n_pts // 2:
                median_ks[i, o] = np.median(vals)

    relative = np.full((k, 4), math.nan)
    for o in range(4):
        med = median_ks[:, o]
        ok = np.isfinite(med)
        total = med[ok].sum()
        if ok.any() and total > 0.0:
            relative[ok, o] = med[ok] / total

    coverage = valid_c.sum(axis=1) / (n_pts * plan.n_conditional)
    return PawnResult(
        parameters=names,
        outputs=OUTPUT_NAMES,
        conditioning_values=cond_values,
        ks=ks,
        median_ks=median_ks,
        relative_index=relative,
        coverage=coverage,
        unconditional_coverage=valid_u / plan.n_unconditional,
        valid_conditional=valid_c,
        valid_unconditional=valid_u,
        unconditional_outputs=u_out,
        conditional_outputs=c_out,
        ks_critical_05=ks_critical(plan.n_unconditional, plan.n_conditional),
        plan=plan,
    )
