"""Simulation and analysis of a three-population CAR T-cell therapy model."""

from .model import (
    ModelParams,
    SimState,
    EquilibriumPoint,
    STANDARD_PARAMS,
    STANDARD_INIT,
    RANGES,
    standard_params,
    standard_init,
    rhs,
    vector_field,
    equilibria,
    jacobian,
    no_therapy_solution,
    is_biological,
    equilibrium_residual,
)
from .stability import (
    RegionLabel,
    Thresholds,
    EquilibriumReport,
    FocusParams,
    eigenvalues_p1,
    eigenvalues_p2,
    char_poly_p3,
    cubic_roots,
    cubic_discriminant,
    routh_hurwitz_stable,
    classify,
    thresholds,
    label_region,
    region_classify,
    hopf_l1,
    focus_params,
    focus_curve,
    real_eigenvalue_boundary,
    p2_realness_quartic,
    p2_pair_is_real,
)
from .integrate import (
    Trajectory,
    PeakSeries,
    integrate,
    detect_peaks,
    distance_series,
    check_blowup,
)
from .sweeps import (
    GridSpec,
    RegionMap,
    PeakSurface,
    FocusReport,
    axis_bounds,
    region_map,
    peak_surface,
    focus_convergence,
    remission_duration,
)
from .pawn import (
    SamplingPlan,
    OutputQuad,
    EmpiricalCDF,
    PawnResult,
    default_plan,
    evaluate_outputs,
    ecdf,
    ks_statistic,
    ks_critical,
    pawn_indices,
)
from .parallel import run_indexed
from .config import ConfigError, load_config

__version__ = "0.1.0"
