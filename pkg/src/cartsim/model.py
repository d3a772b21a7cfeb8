"""Three-population model of CAR T-cell therapy in B-cell leukemia.

The state holds three cell counts: CAR T-cells ``C``, leukemic cells ``L``
and healthy B-cells ``B``, all in cells, with time in days.  The vector
field is

    dC/dt = C * (rho_C * (L + B + I0) - 1 / tau_C)
    dL/dt = rho_L * L - alpha * C * L
    dB/dt = I0 / tau_I - B * (alpha * C + 1 / tau_B)

CAR T-cells expand on contact with their target antigen, carried by both
tumor cells and healthy B-cells, and die with lifetime ``tau_C``.  The
tumor grows exponentially at rate ``rho_L`` and is killed at rate
``alpha * C``.  B-cells enter from the bone marrow at constant rate
``I0 / tau_I``, are killed like the tumor, and die with lifetime
``tau_B``.  Setting ``I0 = 0`` gives the reduced model without marrow
input; it is the same code path.

The closed-form equilibria P1 (tumor-free, therapy extinct), P2
(tumor-free, therapy sustained by marrow output) and P3 (tumor-therapy
coexistence) are produced by :func:`equilibria`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# Standard values and admissible ranges, in cells and days.
STANDARD_PARAMS = {
    "rho_C": 1e-11,
    "tau_C": 20.0,
    "rho_L": 0.2,
    "alpha": 1e-11,
    "I0": 1e9,
    "tau_I": 4.0,
    "tau_B": 45.0,
}

STANDARD_INIT = {"C0": 5e7, "L0": 5e10, "B0": 5e8}

RANGES = {
    "rho_C": (5e-12, 5e-11),
    "tau_C": (14.0, 30.0),
    "rho_L": (0.1, 0.3),
    "alpha": (5e-12, 5e-11),
    "I0": (5e8, 5e9),
    "tau_I": (1.0, 7.0),
    "tau_B": (30.0, 60.0),
    "C0": (1e7, 1e8),
    "L0": (1e10, 1e11),
    "B0": (1e8, 1e9),
}

# P2 is reported with a conditioning warning when I0 is within this
# relative distance of the singular value 1/(tau_C*rho_C).
P2_CONDITIONING_REL = 1e-6


@dataclass(frozen=True, slots=True)
class ModelParams:
    """The seven rate and lifetime parameters of the model.

    Rates ``rho_C`` and ``alpha`` are per day per cell, ``rho_L`` per
    day; lifetimes ``tau_C``, ``tau_I``, ``tau_B`` are days; ``I0`` is
    a cell count.  Rates and ``I0`` must be nonnegative and lifetimes
    strictly positive (the precondition for forward invariance of the
    nonnegative octant).
    """

    rho_C: float = STANDARD_PARAMS["rho_C"]
    tau_C: float = STANDARD_PARAMS["tau_C"]
    rho_L: float = STANDARD_PARAMS["rho_L"]
    alpha: float = STANDARD_PARAMS["alpha"]
    I0: float = STANDARD_PARAMS["I0"]
    tau_I: float = STANDARD_PARAMS["tau_I"]
    tau_B: float = STANDARD_PARAMS["tau_B"]

    def __post_init__(self):
        for name in ("rho_C", "rho_L", "alpha", "I0"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and >= 0, got {v!r}")
        for name in ("tau_C", "tau_I", "tau_B"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v!r}")

    @property
    def tauC_rhoC(self) -> float:
        """Product tau_C*rho_C, the composite stimulation axis."""
        return self.tau_C * self.rho_C


@dataclass(frozen=True, slots=True)
class SimState:
    """Cell counts (C, L, B) at time t, in cells and days."""

    C: float
    L: float
    B: float
    t: float = 0.0


@dataclass(frozen=True, slots=True)
class EquilibriumPoint:
    """A fixed point of the vector field.

    ``kind`` is one of "P1", "P2", "P3".  ``defined`` is False when the
    closed form divides by zero (P2 at I0 = 1/(tau_C*rho_C), or P2/P3
    when alpha or rho_C vanish); the coordinates are then NaN.
    ``conditioning_warning`` marks a defined P2 computed close enough to
    its singularity that the coordinates lose relative accuracy.
    """

    kind: str
    coords: tuple[float, float, float]
    defined: bool = True
    conditioning_warning: bool = False


def standard_params() -> ModelParams:
    """Standard parameter column as a ModelParams."""
    return ModelParams(**STANDARD_PARAMS)


def standard_init() -> SimState:
    """Standard initial state (C0, L0, B0) at t = 0."""
    s = STANDARD_INIT
    return SimState(C=s["C0"], L=s["L0"], B=s["B0"], t=0.0)


def rhs(state: SimState, params: ModelParams) -> tuple[float, float, float]:
    """Time derivative (dC/dt, dL/dt, dB/dt) at ``state``, in cell/day."""
    c, l, b = state.C, state.L, state.B
    p = params
    dc = c * (p.rho_C * (l + b + p.I0) - 1.0 / p.tau_C)
    dl = p.rho_L * l - p.alpha * c * l
    db = p.I0 / p.tau_I - b * (p.alpha * c + 1.0 / p.tau_B)
    return (dc, dl, db)


def vector_field(y, params: ModelParams) -> np.ndarray:
    """Vector field on a length-3 array-like (C, L, B).

    Array-valued variant of :func:`rhs`, shaped for generic ODE or
    root-finding callers.
    """
    y = np.asarray(y, dtype=float)
    c, l, b = y[0], y[1], y[2]
    p = params
    return np.array(
        [
            c * (p.rho_C * (l + b + p.I0) - 1.0 / p.tau_C),
            p.rho_L * l - p.alpha * c * l,
            p.I0 / p.tau_I - b * (p.alpha * c + 1.0 / p.tau_B),
        ]
    )


def equilibria(params: ModelParams) -> list[EquilibriumPoint]:
    """The three closed-form equilibria [P1, P2, P3].

    P1 = (0, 0, I0*tau_B/tau_I) always exists.  With g = 1/(tau_C*rho_C):

        P2 = ((1/alpha)*(I0/(tau_I*(g - I0)) - 1/tau_B), 0, g - I0)
        P3 = (rho_L/alpha,
              g - I0*(1 + tau_B/(tau_I*(1 + tau_B*rho_L))),
              I0/(tau_I*(rho_L + 1/tau_B)))

    P2 is undefined on the singular locus I0 = g and both P2 and P3 are
    undefined when alpha = 0 or rho_C = 0; undefined points carry NaN
    coordinates and defined=False rather than raising, so grid sweeps
    can record the singularity.
    """
    p = params
    nan3 = (math.nan, math.nan, math.nan)
    p1 = EquilibriumPoint("P1", (0.0, 0.0, p.I0 * p.tau_B / p.tau_I))

    if p.rho_C == 0.0 or p.alpha == 0.0:
        return [p1, EquilibriumPoint("P2", nan3, defined=False),
                EquilibriumPoint("P3", nan3, defined=False)]

    g = 1.0 / (p.tau_C * p.rho_C)
    b2 = g - p.I0
    if b2 == 0.0:
        p2 = EquilibriumPoint("P2", nan3, defined=False)
    else:
        c2 = (p.I0 / (p.tau_I * b2) - 1.0 / p.tau_B) / p.alpha
        warn = abs(b2) < P2_CONDITIONING_REL * g
        p2 = EquilibriumPoint("P2", (c2, 0.0, b2), conditioning_warning=warn)

    c3 = p.rho_L / p.alpha
    l3 = g - p.I0 * (1.0 + p.tau_B / (p.tau_I * (1.0 + p.tau_B * p.rho_L)))
    b3 = p.I0 / (p.tau_I * (p.rho_L + 1.0 / p.tau_B))
    p3 = EquilibriumPoint("P3", (c3, l3, b3))
    return [p1, p2, p3]


def jacobian(point, params: ModelParams) -> np.ndarray:
    """Jacobian of the vector field at coordinates (C, L, B).

    Row by row:

        [rho_C*(L+B+I0) - 1/tau_C,  rho_C*C,        rho_C*C        ]
        [-alpha*L,                  rho_L - alpha*C, 0              ]
        [-alpha*B,                  0,               -alpha*C - 1/tau_B]
    """
    c, l, b = float(point[0]), float(point[1]), float(point[2])
    p = params
    return np.array(
        [
            [p.rho_C * (l + b + p.I0) - 1.0 / p.tau_C, p.rho_C * c, p.rho_C * c],
            [-p.alpha * l, p.rho_L - p.alpha * c, 0.0],
            [-p.alpha * b, 0.0, -p.alpha * c - 1.0 / p.tau_B],
        ]
    )


def no_therapy_solution(params: ModelParams, init: SimState, t):
    """Exact solution from ``init`` with no CAR T-cells, ``t`` days later.

    With C = 0 the system decouples: the tumor grows exponentially and
    the B-cell pool relaxes to its marrow-fed level,

        L(t) = L0 * exp(rho_L * t)
        B(t) = I0*tau_B/tau_I + exp(-t/tau_B) * (B0 - I0*tau_B/tau_I)

    ``t`` may be a scalar or an array (the returned SimState then holds
    array components).  Rejects initial states with C != 0.
    """
    if init.C != 0.0:
        raise ValueError(f"closed form requires C = 0, got C = {init.C!r}")
    p = params
    beq = p.I0 * p.tau_B / p.tau_I
    l = init.L * np.exp(p.rho_L * np.asarray(t, dtype=float))
    b = beq + np.exp(-np.asarray(t, dtype=float) / p.tau_B) * (init.B - beq)
    if np.ndim(t) == 0:
        return SimState(C=0.0, L=float(l), B=float(b), t=init.t + float(t))
    return SimState(C=np.zeros_like(l), L=l, B=b, t=init.t + np.asarray(t, dtype=float))


def is_biological(point: EquilibriumPoint) -> bool:
    """True iff the point is defined and all coordinates are >= 0."""
    return point.defined and all(c >= 0.0 for c in point.coords)


def equilibrium_residual(point: EquilibriumPoint, params: ModelParams) -> float:
    """Residual of the fixed-point condition, relative to point magnitude.

    max|rhs(point)| / max(1, max|coords|); NaN for undefined points.
    """
    if not point.defined:
        return math.nan
    r = vector_field(point.coords, params)
    scale = max(1.0, max(abs(c) for c in point.coords))
    return float(np.max(np.abs(r))) / scale
