"""Stability and bifurcation analysis of the model equilibria.

Closed-form eigenvalues at P1 and P2, the characteristic cubic at P3, a
robust cubic solver, Routh-Hurwitz classification, the three threshold
curves in I0 that organize the (I0, tau_C*rho_C) plane into regions R1
to R4, the first Lyapunov coefficient of the Hopf point at I0 = 0, and
the spiral parameters (alpha, omega) that govern the oscillatory
approach to P3 when it is a focus-node.

The three thresholds, increasing in I0:

    blue  = (1/(tau_C*rho_C)) * (1 - tau_B/(tau_B + tau_I))
    red   = (1/(tau_C*rho_C)) * (1 - tau_B/(tau_B + tau_I*(1 + tau_B*rho_L)))
    green = 1/(tau_C*rho_C)

Crossing blue flips the sign of P1's third eigenvalue (transcritical
exchange with P2 entering the biological octant); crossing red transfers
stability from P3 to P2 as L3 reaches zero (transcritical exchange P2/P3,
clinically the relapse threshold); above green, P2 leaves the biological
octant and trajectories blow up in C.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np

from .model import EquilibriumPoint, ModelParams, equilibria, is_biological

# |Re(lambda)| below this, relative to max(1, |lambda|), counts as a zero
# real part: the report is flagged non-hyperbolic instead of assigning the
# eigenvalue to a manifold.
ZERO_RE_REL = 1e-10


class RegionLabel(str, Enum):
    """Stability regions of the (I0, tau_C*rho_C) plane."""

    R1 = "R1"
    R2 = "R2"
    R3 = "R3"
    R4 = "R4"
    NON_BIOLOGICAL = "NonBiological"


class Thresholds(NamedTuple):
    """The three region-boundary values of I0, in cells."""

    blue: float
    red: float
    green: float


@dataclass(frozen=True)
class EquilibriumReport:
    """Classification of one equilibrium.

    ``dim_stable``/``dim_unstable`` count eigenvalues with strictly
    negative/positive real part; they sum to 3 unless ``non_hyperbolic``
    is set, in which case at least one real part vanished to tolerance
    and no manifold dimension is assigned to it.  ``stable`` is True iff
    all three real parts are strictly negative.
    """

    point: EquilibriumPoint
    eigenvalues: np.ndarray
    dim_stable: int
    dim_unstable: int
    biological: bool
    stable: bool
    non_hyperbolic: bool


@dataclass(frozen=True)
class FocusParams:
    """Spiral parameters of P3.

    When the characteristic cubic has one real root and a complex pair
    (``is_focus``), ``alpha_re`` and ``omega`` are the real part and
    absolute imaginary part of the pair and ``strong_eig`` is the real
    root (the strongly contracting direction).  Otherwise ``alpha_re``
    and ``omega`` are NaN and ``strong_eig`` is the most negative real
    eigenvalue.
    """

    alpha_re: float
    omega: float
    strong_eig: float
    is_focus: bool


def eigenvalues_p1(params: ModelParams) -> np.ndarray:
    """Closed-form eigenvalues at P1: (rho_L, -1/tau_B, stimulation excess).

    The third value, rho_C*I0*(1 + tau_B/tau_I) - 1/tau_C, changes sign
    at the blue threshold.
    """
    p = params
    lam3 = p.rho_C * p.I0 * (1.0 + p.tau_B / p.tau_I) - 1.0 / p.tau_C
    return np.array([p.rho_L, -1.0 / p.tau_B, lam3])


def eigenvalues_p2(params: ModelParams) -> np.ndarray:
    """Closed-form eigenvalues at P2 as a complex triple.

    lambda_1 = rho_L - alpha*C2 along the tumor direction, and the pair

        lambda_{2,3} = (-I0/(tau_I*B2) +- sqrt((I0/(tau_I*B2))^2
                        - 4*alpha*rho_C*B2*C2)) / 2

    in the (C, B) plane.  Raises ValueError when P2 is undefined.
    """
    p2 = equilibria(params)[1]
    if not p2.defined:
        raise ValueError("P2 is undefined at I0 = 1/(tau_C*rho_C)")
    c2, _, b2 = p2.coords
    p = params
    lam1 = p.rho_L - p.alpha * c2
    a = p.I0 / (p.tau_I * b2)
    disc = a * a - 4.0 * p.alpha * p.rho_C * b2 * c2
    sq = cmath.sqrt(complex(disc, 0.0))
    return np.array([lam1, 0.5 * (-a + sq), 0.5 * (-a - sq)], dtype=complex)


def char_poly_p3(params: ModelParams) -> tuple[float, float, float, float]:
    """Monic characteristic polynomial of the Jacobian at P3.

    Coefficients (1, a2, a1, a0) of lambda^3 + a2*lambda^2 + a1*lambda + a0:

        a2 = 1/tau_B + rho_L
        a1 = rho_C*rho_L*(1/(rho_C*tau_C) - I0)
        a0 = rho_C*rho_L*L3*(1/tau_B + rho_L)
    """
    p = params
    if p.rho_C == 0.0:
        raise ValueError("P3 characteristic polynomial requires rho_C > 0")
    g = 1.0 / (p.tau_C * p.rho_C)
    l3 = g - p.I0 * (1.0 + p.tau_B / (p.tau_I * (1.0 + p.tau_B * p.rho_L)))
    a2 = 1.0 / p.tau_B + p.rho_L
    a1 = p.rho_C * p.rho_L * (g - p.I0)
    a0 = p.rho_C * p.rho_L * l3 * a2
    return (1.0, a2, a1, a0)


def cubic_discriminant(coeffs) -> float:
    """Discriminant (q/2)^2 + (p/3)^3 of the depressed form of a monic cubic.

    Positive means one real root and a complex-conjugate pair; negative
    means three distinct real roots; zero means a repeated root.
    """
    _, a2, a1, a0 = (float(c) for c in coeffs)
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    return (q / 2.0) ** 2 + (p / 3.0) ** 3


def _polish(root: complex, a2: float, a1: float, a0: float) -> complex:
    # One Newton step on the original cubic; restores accuracy lost to
    # cancellation in the closed forms when coefficients span decades.
    f = ((root + a2) * root + a1) * root + a0
    df = (3.0 * root + 2.0 * a2) * root + a1
    if df != 0.0:
        root = root - f / df
    return root


def cubic_roots(coeffs) -> np.ndarray:
    """Roots of a monic cubic, sorted by descending real part.

    Closed-form solution of the depressed cubic (Cardano for one real
    root, the trigonometric form for three), then one Newton polish per
    root.  Complex roots are returned as an exact conjugate pair; ties
    in real part sort by descending imaginary part.
    """
    one, a2, a1, a0 = (float(c) for c in coeffs)
    if one != 1.0:
        raise ValueError("cubic must be monic")
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
    shift = -a2 / 3.0

    if disc > 0.0:
        s = math.sqrt(disc)
        u = math.copysign(abs(-q / 2.0 + s) ** (1.0 / 3.0), -q / 2.0 + s)
        v = math.copysign(abs(-q / 2.0 - s) ** (1.0 / 3.0), -q / 2.0 - s)
        y_real = u + v
        re = -y_real / 2.0
        im = math.sqrt(3.0) / 2.0 * (u - v)
        r_real = _polish(complex(y_real + shift, 0.0), a2, a1, a0)
        pair = _polish(complex(re + shift, im), a2, a1, a0)
        roots = [complex(r_real.real, 0.0), pair, pair.conjugate()]
    elif p == 0.0:
        # disc <= 0 with p = 0 forces q = 0: a triple real root.
        roots = [complex(shift, 0.0)] * 3
    else:
        m = 2.0 * math.sqrt(-p / 3.0)
        arg = 3.0 * q / (p * m)
        arg = min(1.0, max(-1.0, arg))
        theta = math.acos(arg) / 3.0
        roots = []
        for k in range(3):
            y = m * math.cos(theta - 2.0 * math.pi * k / 3.0)
            r = _polish(complex(y + shift, 0.0), a2, a1, a0)
            roots.append(complex(r.real, 0.0))

    roots.sort(key=lambda z: (-z.real, -z.imag))
    return np.array(roots, dtype=complex)


def routh_hurwitz_stable(coeffs) -> bool:
    """Routh-Hurwitz test for a monic cubic (1, a2, a1, a0).

    True iff a2 > 0, a0 > 0 and a2*a1 > a0, which is equivalent to all
    roots having strictly negative real part.
    """
    one, a2, a1, a0 = (float(c) for c in coeffs)
    if one != 1.0:
        raise ValueError("cubic must be monic")
    return a2 > 0.0 and a0 > 0.0 and a2 * a1 > a0


def classify(point: EquilibriumPoint, params: ModelParams) -> EquilibriumReport:
    """Eigenvalues, manifold dimensions and stability of one equilibrium.

    Uses the closed forms at P1 and P2 and the characteristic cubic at
    P3.  Raises ValueError for undefined points (propagates the P2
    singularity).
    """
    if not point.defined:
        raise ValueError(f"{point.kind} is undefined for these parameters")
    if point.kind == "P1":
        eigs = eigenvalues_p1(params).astype(complex)
    elif point.kind == "P2":
        eigs = eigenvalues_p2(params)
    elif point.kind == "P3":
        eigs = cubic_roots(char_poly_p3(params))
    else:
        raise ValueError(f"unknown equilibrium kind {point.kind!r}")

    re = eigs.real
    zero = np.abs(re) < ZERO_RE_REL * np.maximum(1.0, np.abs(eigs))
    dim_s = int(np.sum((re < 0.0) & ~zero))
    dim_u = int(np.sum((re > 0.0) & ~zero))
    return EquilibriumReport(
        point=point,
        eigenvalues=eigs,
        dim_stable=dim_s,
        dim_unstable=dim_u,
        biological=is_biological(point),
        stable=dim_s == 3,
        non_hyperbolic=bool(zero.any()),
    )


def thresholds(params: ModelParams) -> Thresholds:
    """The blue, red and green threshold values of I0 (see module docs).

    blue < red < green for all valid parameters with rho_C > 0.
    """
    p = params
    if p.rho_C == 0.0:
        return Thresholds(math.inf, math.inf, math.inf)
    g = 1.0 / (p.tau_C * p.rho_C)
    blue = g * (1.0 - p.tau_B / (p.tau_B + p.tau_I))
    red = g * (1.0 - p.tau_B / (p.tau_B + p.tau_I * (1.0 + p.tau_B * p.rho_L)))
    return Thresholds(blue, red, g)


def label_region(i0: float, tauC_rhoC: float, rho_L: float, tau_I: float,
                 tau_B: float) -> tuple[RegionLabel, bool]:
    """Region label for raw threshold inputs, plus a boundary flag.

    The label depends only on (I0, tau_C*rho_C, rho_L, tau_I, tau_B).
    Exactly-on-threshold inputs return the label of the higher-I0 side
    with the flag set; I0 = 0 returns R1 with the flag set (the Hopf
    point); negative I0 is NonBiological.
    """
    if i0 < 0.0:
        return (RegionLabel.NON_BIOLOGICAL, False)
    g = math.inf if tauC_rhoC == 0.0 else 1.0 / tauC_rhoC
    blue = g * (1.0 - tau_B / (tau_B + tau_I))
    red = g * (1.0 - tau_B / (tau_B + tau_I * (1.0 + tau_B * rho_L)))
    if i0 == 0.0:
        return (RegionLabel.R1, True)
    if i0 < blue:
        return (RegionLabel.R1, False)
    if i0 == blue:
        return (RegionLabel.R2, True)
    if i0 < red:
        return (RegionLabel.R2, False)
    if i0 == red:
        return (RegionLabel.R3, True)
    if i0 < g:
        return (RegionLabel.R3, False)
    if i0 == g:
        return (RegionLabel.R4, True)
    return (RegionLabel.R4, False)


def region_classify(params: ModelParams) -> tuple[RegionLabel, bool]:
    """Region label for a parameter set, plus a bifurcation-boundary flag."""
    p = params
    return label_region(p.I0, p.tauC_rhoC, p.rho_L, p.tau_I, p.tau_B)


def hopf_l1(params: ModelParams) -> float:
    """First Lyapunov coefficient of the Hopf point at I0 = 0.

    l1 = tau_C^(3/2) * rho_C^2 / (3*sqrt(rho_L)) > 0: the bifurcation is
    subcritical, shedding unstable periodic orbits for small I0 > 0.
    """
    p = params
    if p.rho_L == 0.0:
        raise ValueError("hopf_l1 requires rho_L > 0")
    return p.tau_C**1.5 * p.rho_C**2 / (3.0 * math.sqrt(p.rho_L))


def focus_params(params: ModelParams) -> FocusParams:
    """Spiral parameters (alpha, omega) of P3 from its characteristic cubic."""
    coeffs = char_poly_p3(params)
    roots = cubic_roots(coeffs)
    if cubic_discriminant(coeffs) > 0.0:
        pair = roots[roots.imag != 0.0]
        real = roots[roots.imag == 0.0]
        return FocusParams(
            alpha_re=float(pair[0].real),
            omega=float(abs(pair[0].imag)),
            strong_eig=float(real[0].real),
            is_focus=True,
        )
    return FocusParams(
        alpha_re=math.nan,
        omega=math.nan,
        strong_eig=float(roots.real.min()),
        is_focus=False,
    )


def focus_curve(t, alpha_re: float, omega: float, K: float = 1.0,
                k_s: float = 1.0, k_c: float = 1.0, d: float = 0.0,
                x3: float = 0.0):
    """Damped-spiral approximation about an equilibrium coordinate x3.

        x(t) = K*exp(alpha_re*t)*(k_s*sin(omega*t + d)
                                  + k_c*cos(omega*t + d)) + x3

    Vectorized in ``t``.  Describes one component of the asymptotic
    approach to P3 in the focus regime; (K, k_s, k_c, d) are fit
    constants for a given trajectory.
    """
    t = np.asarray(t, dtype=float)
    ph = omega * t + d
    return K * np.exp(alpha_re * t) * (k_s * np.sin(ph) + k_c * np.cos(ph)) + x3


def real_eigenvalue_boundary(params: ModelParams, tcrc_lo: float,
                             tcrc_hi: float, rel_tol: float = 1e-6) -> float:
    """Locate the all-real-eigenvalues boundary of P3 along tau_C*rho_C.

    Bisects the sign change of the characteristic-cubic discriminant
    between the two composite values (tau_C held fixed, rho_C adjusted),
    to ``rel_tol`` relative.  Raises ValueError when the discriminant
    does not change sign over the bracket.
    """

    def disc_at(tcrc: float) -> float:
        import dataclasses

        p = dataclasses.replace(params, rho_C=tcrc / params.tau_C)
        return cubic_discriminant(char_poly_p3(p))

    lo, hi = float(tcrc_lo), float(tcrc_hi)
    f_lo, f_hi = disc_at(lo), disc_at(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise ValueError("discriminant does not change sign over the bracket")
    while hi - lo > rel_tol * 0.5 * (hi + lo):
        mid = 0.5 * (lo + hi)
        f_mid = disc_at(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def p2_realness_quartic(params: ModelParams) -> float:
    """Diagnostic quantity whose positivity makes the P2 pair real.

        4/(tau_B*tau_C^3*rho_C^2)
        - (4*I0/(tau_C^2*rho_C))*(1/tau_I + 3/tau_B)
        + I0^2*(1/tau_I^2 + 8/(tau_I*tau_C) + 12/(tau_B*tau_C))
        - 4*rho_C*I0^3*(1/tau_I + 1/tau_B)

    Equals the discriminant of the lambda_{2,3} quadratic scaled by
    B2^2, so its sign decides real pair vs complex pair at P2.
    """
    p = params
    if p.rho_C == 0.0:
        raise ValueError("requires rho_C > 0")
    return (
        4.0 / (p.tau_B * p.tau_C**3 * p.rho_C**2)
        - (4.0 * p.I0 / (p.tau_C**2 * p.rho_C)) * (1.0 / p.tau_I + 3.0 / p.tau_B)
        + p.I0**2 * (1.0 / p.tau_I**2 + 8.0 / (p.tau_I * p.tau_C)
                     + 12.0 / (p.tau_B * p.tau_C))
        - 4.0 * p.rho_C * p.I0**3 * (1.0 / p.tau_I + 1.0 / p.tau_B)
    )


def p2_pair_is_real(params: ModelParams) -> bool:
    """True when the P2 eigenvalue pair lambda_{2,3} is real."""
    return p2_realness_quartic(params) > 0.0
