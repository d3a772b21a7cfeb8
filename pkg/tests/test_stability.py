import math
from dataclasses import replace

import numpy as np
import pytest

from cartsim import (
    RegionLabel,
    char_poly_p3,
    classify,
    cubic_discriminant,
    cubic_roots,
    eigenvalues_p1,
    eigenvalues_p2,
    equilibria,
    focus_params,
    hopf_l1,
    label_region,
    p2_pair_is_real,
    real_eigenvalue_boundary,
    region_classify,
    routh_hurwitz_stable,
    standard_params,
    thresholds,
)

STD = standard_params()

BLUE = 2e10 / 49
RED = 4e10 / 17
GREEN = 5e9


def test_p1_eigenvalues_standard():
    lam = eigenvalues_p1(STD)
    assert lam[0] == pytest.approx(0.2, rel=1e-14)
    assert lam[1] == pytest.approx(-1.0 / 45.0, rel=1e-14)
    assert lam[2] == pytest.approx(0.0725, rel=1e-14)


def test_p2_eigenvalues_standard():
    lam = eigenvalues_p2(STD)
    real = [ev for ev in lam if ev.imag == 0.0]
    pair = sorted((ev for ev in lam if ev.imag != 0.0), key=lambda z: z.imag)
    assert len(real) == 1 and len(pair) == 2
    assert real[0].real == pytest.approx(23.0 / 144.0, rel=1e-12)
    assert pair[1].real == pytest.approx(-0.03125, rel=1e-12)
    assert pair[1].imag == pytest.approx(0.025190248333653062, rel=1e-12)
    assert pair[0] == pair[1].conjugate()


def test_p3_characteristic_polynomial_standard():
    c = char_poly_p3(STD)
    expect = (1.0, 2.0 / 9.0, 8.0e-3, 23.0 / 18000.0)
    for got, exp in zip(c, expect):
        assert got == pytest.approx(exp, rel=1e-12)


def test_cubic_roots_known_factorization():
    r = cubic_roots((1.0, -6.0, 11.0, -6.0))  # (x-1)(x-2)(x-3)
    assert np.allclose(sorted(r.real), [1.0, 2.0, 3.0], rtol=1e-12)
    assert np.all(r.imag == 0.0)


def test_cubic_roots_random_properties():
    rng = np.random.default_rng(30)
    for _ in range(200):
        a2, a1, a0 = rng.uniform(-2.0, 2.0, 3)
        r = cubic_roots((1.0, a2, a1, a0))
        # residual of the monic polynomial at each root
        for z in r:
            res = abs(((z + a2) * z + a1) * z + a0)
            assert res < 1e-9 * max(1.0, abs(z) ** 3)
        cplx = r[r.imag != 0.0]
        if len(cplx):
            assert len(cplx) == 2
            assert cplx[0] == cplx[1].conjugate()  # exact, not approximate
        # discriminant sign agrees with the root structure
        disc = cubic_discriminant((1.0, a2, a1, a0))
        if disc > 0.0:
            assert len(cplx) == 2
        elif disc < 0.0:
            assert len(cplx) == 0


def test_routh_hurwitz_against_roots():
    rng = np.random.default_rng(31)
    for _ in range(300):
        a2, a1, a0 = rng.uniform(-2.0, 2.0, 3)
        coeffs = (1.0, a2, a1, a0)
        direct = bool(np.all(cubic_roots(coeffs).real < 0.0))
        assert routh_hurwitz_stable(coeffs) == direct


def test_thresholds_standard():
    t = thresholds(STD)
    assert t.blue == pytest.approx(BLUE, rel=1e-12)
    assert t.red == pytest.approx(RED, rel=1e-12)
    assert t.green == pytest.approx(GREEN, rel=1e-12)
    assert t.blue < t.red < t.green


def test_region_sequence_standard_composite():
    for i0, expect in ((2e8, "R1"), (1e9, "R2"), (3e9, "R3"), (6e9, "R4")):
        lab, edge = label_region(i0, 2e-10, 0.2, 4.0, 45.0)
        assert lab.value == expect
        assert not edge


def test_region_edges_and_degenerate_inputs():
    # feed back the classifier's own threshold value so the equality
    # comparison sees the identical double
    blue = thresholds(STD).blue
    lab, edge = label_region(blue, STD.tauC_rhoC, 0.2, 4.0, 45.0)
    assert edge
    assert lab is RegionLabel.R2  # boundary resolves to the higher-I0 side

    lab, edge = label_region(thresholds(STD).green, STD.tauC_rhoC,
                             0.2, 4.0, 45.0)
    assert (lab, edge) == (RegionLabel.R4, True)

    lab, edge = label_region(0.0, 2e-10, 0.2, 4.0, 45.0)
    assert (lab, edge) == (RegionLabel.R1, True)

    lab, _ = label_region(-1.0, 2e-10, 0.2, 4.0, 45.0)
    assert lab is RegionLabel.NON_BIOLOGICAL

    assert region_classify(STD)[0] is RegionLabel.R2


def test_hopf_coefficient_positive():
    assert hopf_l1(STD) == pytest.approx(2e-20 / 3.0, rel=1e-12)
    assert hopf_l1(STD) > 0.0


FOCUS_I0 = 5e8
FOCUS_ALPHA = -0.0022149982328944
FOCUS_OMEGA = 0.08961180163600659
FOCUS_PERIOD = 70.11560076318077


def test_focus_parameters_low_marrow_input():
    p = replace(STD, I0=FOCUS_I0)
    f = focus_params(p)
    assert f.is_focus
    assert f.alpha_re == pytest.approx(FOCUS_ALPHA, rel=1e-9)
    assert f.omega == pytest.approx(FOCUS_OMEGA, rel=1e-9)
    assert 2.0 * math.pi / f.omega == pytest.approx(FOCUS_PERIOD, rel=1e-9)
    # trace identity: strong eigenvalue + 2 alpha = -a2
    a2 = char_poly_p3(p)[1]
    assert f.strong_eig + 2.0 * f.alpha_re == pytest.approx(-a2, rel=1e-10)


def test_non_focus_window():
    p = replace(STD, rho_C=5e-10 / STD.tau_C)  # composite 5e-10
    f = focus_params(p)
    assert not f.is_focus
    assert math.isnan(f.alpha_re) and math.isnan(f.omega)


def test_real_eigenvalue_boundary_bracket():
    tcrc = real_eigenvalue_boundary(STD, 2e-10, 5e-10)
    assert 2e-10 < tcrc < 5e-10
    p = replace(STD, rho_C=tcrc / STD.tau_C)
    assert abs(cubic_discriminant(char_poly_p3(p))) < 1e-12
    with pytest.raises(ValueError):
        real_eigenvalue_boundary(STD, 1e-10, 2e-10)


def test_p2_pair_realness_agrees_with_eigenvalues():
    rng = np.random.default_rng(32)
    for _ in range(200):
        kw = {
            "rho_C": rng.uniform(5e-12, 5e-11),
            "tau_C": rng.uniform(14.0, 30.0),
            "rho_L": rng.uniform(0.1, 0.3),
            "alpha": rng.uniform(5e-12, 5e-11),
            "I0": rng.uniform(5e8, 4.9e9),
            "tau_I": rng.uniform(1.0, 7.0),
            "tau_B": rng.uniform(30.0, 60.0),
        }
        p = standard_params().__class__(**kw)
        lam = eigenvalues_p2(p)
        has_pair = bool(np.any(lam.imag != 0.0))
        assert p2_pair_is_real(p) == (not has_pair)


def test_focus_curve_tracks_cells_asymptotically():
    # published fit constants for the low-marrow-input spiral; the
    # phase is only cycle-accurate, so the bound is on the decaying
    # envelope rather than pointwise agreement
    from cartsim import equilibria as eq, integrate, standard_init
    from cartsim.stability import focus_curve

    p = replace(STD, I0=FOCUS_I0)
    f = focus_params(p)
    c3 = next(q for q in eq(p) if q.kind == "P3").coords[0]
    tr = integrate(p, standard_init(), 3650.0, max_samples=32768)
    x = focus_curve(tr.t, f.alpha_re, f.omega, K=0.5e11, k_s=1.0, k_c=1.0,
                    d=4.8, x3=c3)
    errs = []
    for lo in (1200.0, 1800.0, 2500.0):
        m = tr.t > lo
        errs.append(np.max(np.abs(tr.C[m] - x[m])) / c3)
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 0.02

    # the fitted amplitude agrees with the stated K
    m = tr.t > 1200.0
    env = np.exp(f.alpha_re * tr.t[m])
    basis = np.column_stack([env * np.sin(f.omega * tr.t[m]),
                             env * np.cos(f.omega * tr.t[m])])
    coef, *_ = np.linalg.lstsq(basis, tr.C[m] - c3, rcond=None)
    k_fit = math.hypot(*coef) / math.sqrt(2.0)
    assert k_fit == pytest.approx(0.5e11, rel=0.25)


def test_classify_standard_regime():
    reps = {pt.kind: classify(pt, STD)
            for pt in equilibria(STD) if pt.defined}
    assert not reps["P1"].stable and reps["P1"].dim_unstable == 2
    assert not reps["P2"].stable and reps["P2"].dim_unstable == 1
    assert reps["P3"].stable and reps["P3"].dim_stable == 3
    assert np.any(reps["P3"].eigenvalues.imag != 0.0)  # focus-node


def test_classify_flips_across_transcritical():
    for off, p2_stable in ((-1e-3, False), (1e-3, True)):
        p = replace(STD, I0=RED * (1.0 + off))
        reps = {pt.kind: classify(pt, p)
                for pt in equilibria(p) if pt.defined}
        assert reps["P2"].stable == p2_stable
        assert reps["P3"].stable == (not p2_stable)


def test_non_hyperbolic_flag_on_blue():
    p = replace(STD, I0=BLUE)
    pt = next(q for q in equilibria(p) if q.kind == "P1")
    rep = classify(pt, p)
    assert rep.non_hyperbolic
    assert not rep.stable
