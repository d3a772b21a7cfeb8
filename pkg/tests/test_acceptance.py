"""Acceptance gate: the eleven release criteria.

Each test prints one PASS/FAIL line on the terminal (bypassing capture)
so a plain ``pytest -v`` run shows the verdict per criterion alongside
the usual outcome column.  Tolerances are the contract values; do not
relax them here.
"""

import math
import time
from contextlib import contextmanager
from dataclasses import replace

import numpy as np
import pytest

from cartsim import (
    SimState,
    char_poly_p3,
    classify,
    cubic_roots,
    default_plan,
    detect_peaks,
    eigenvalues_p1,
    equilibria,
    equilibrium_residual,
    focus_convergence,
    integrate,
    no_therapy_solution,
    pawn_indices,
    remission_duration,
    routh_hurwitz_stable,
    standard_init,
    standard_params,
    thresholds,
)
from cartsim.cli import main as cli_main
from conftest import draw_case

STD = standard_params()
INIT = standard_init()

BLUE = 2e10 / 49
RED = 4e10 / 17
GREEN = 5e9


@contextmanager
def criterion(capsys, num, text):
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"\nFAIL  criterion {num:2d}: {text}")
        raise
    with capsys.disabled():
        print(f"\nPASS  criterion {num:2d}: {text}")


def test_criterion_01_positivity(capsys):
    with criterion(capsys, 1, "positivity over 1000 randomized year-long "
                              "runs"):
        t0 = time.time()
        rng = np.random.default_rng(1)
        worst = 0.0
        for _ in range(1000):
            p, s = draw_case(rng)
            tr = integrate(p, s, 365.0)
            worst = min(worst, tr.C.min(), tr.L.min(), tr.B.min())
        elapsed = time.time() - t0
        assert worst >= -1e-3
        assert elapsed < 60.0


def test_criterion_02_equilibrium_closed_forms(capsys):
    with criterion(capsys, 2, "equilibrium residuals < 1e-10 over 1000 "
                              "draws; standard P3 exact to 1e-12"):
        rng = np.random.default_rng(2)
        worst = 0.0
        for _ in range(1000):
            p, _ = draw_case(rng)
            for pt in equilibria(p):
                if pt.defined:
                    worst = max(worst, equilibrium_residual(pt, p))
        assert worst < 1e-10
        p3 = next(pt for pt in equilibria(STD) if pt.kind == "P3")
        for got, exp in zip(p3.coords, (2e10, 2.875e9, 1.125e9)):
            assert got == pytest.approx(exp, rel=1e-12)


def test_criterion_03_bifurcation_thresholds(capsys):
    with criterion(capsys, 3, "thresholds to 1e-9; P1 eigenvalue sign "
                              "change at blue; stability flip across red"):
        t = thresholds(STD)
        assert t.blue == pytest.approx(BLUE, rel=1e-9)
        assert t.red == pytest.approx(RED, rel=1e-9)
        assert t.green == pytest.approx(GREEN, rel=1e-9)

        def lam3(i0):
            return eigenvalues_p1(replace(STD, I0=i0))[2]

        lo, hi = 0.5 * BLUE, 2.0 * BLUE
        assert lam3(lo) < 0.0 < lam3(hi)
        for _ in range(80):  # bisect the sign change
            mid = 0.5 * (lo + hi)
            if lam3(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        assert abs(0.5 * (lo + hi) - BLUE) <= 1e-6 * BLUE

        for off, p2_stable in ((-1e-3, False), (1e-3, True)):
            p = replace(STD, I0=RED * (1.0 + off))
            reps = {pt.kind: classify(pt, p)
                    for pt in equilibria(p) if pt.defined}
            assert reps["P2"].stable == p2_stable
            assert reps["P3"].stable == (not p2_stable)


def test_criterion_04_routh_hurwitz_vs_roots(capsys):
    with criterion(capsys, 4, "Routh-Hurwitz agrees with roots on 1000 "
                              "cubics; standard coefficients to 1e-9"):
        rng = np.random.default_rng(4)
        for _ in range(1000):
            coeffs = (1.0, *rng.uniform(-2.0, 2.0, 3))
            direct = bool(np.all(cubic_roots(coeffs).real < 0.0))
            assert routh_hurwitz_stable(coeffs) == direct
        got = char_poly_p3(STD)
        exact = (1.0, 2.0 / 9.0, 8.0e-3, 23.0 / 18000.0)
        for g, e in zip(got, exact):
            assert g == pytest.approx(e, rel=1e-9)


def test_criterion_05_closed_form_vs_numeric(capsys):
    with criterion(capsys, 5, "no-cell trajectories match the closed form "
                              "to 1e-6 over 60 days"):
        for l0, cap in ((1e9, 1e15), (5e10, 1e16)):
            s0 = SimState(C=0.0, L=l0, B=5e8)
            tr = integrate(STD, s0, 60.0, cap=cap)
            assert tr.terminated == "TimeEnd"
            exact = no_therapy_solution(STD, s0, tr.t)
            assert np.max(np.abs(tr.L / exact.L - 1.0)) < 1e-6
            assert np.max(np.abs(tr.B / exact.B - 1.0)) < 1e-6
            assert np.all(tr.C == 0.0)


def test_criterion_06_focus_asymptotics(capsys):
    with criterion(capsys, 6, "spiral ratios within 5% and periods within "
                              "2% by the fifth maximum"):
        t0 = time.time()
        rep = focus_convergence(replace(STD, I0=0.5e9), n_peaks=6)
        ratio_err = rep.ratio_errors()
        period_err = rep.period_errors()
        assert np.all(ratio_err[3:] < 0.05)
        assert np.all(period_err[3:] < 0.02)
        assert time.time() - t0 < 60.0


def test_criterion_07_peak_magnitudes(capsys):
    with criterion(capsys, 7, "standard first/second maxima and first-peak "
                              "time in their stated windows"):
        pk = detect_peaks(STD, INIT, 500.0, max_peaks=2)
        assert len(pk) == 2
        assert 1.25e11 <= pk.values[0] <= 5e11
        assert 0.5e10 <= pk.values[1] <= 4.5e10
        assert 2.0 <= pk.times[0] <= 16.0


def test_criterion_08_divergent_regime(capsys):
    with criterion(capsys, 8, "I0=6e9 blows up with tumor extinction; "
                              "I0=4.9e9 stays bounded for ten years"):
        tr = integrate(replace(STD, I0=6e9), INIT, 7300.0)
        assert tr.terminated == "Blowup"
        assert tr.L[-1] <= 1e-3
        tr = integrate(replace(STD, I0=4.9e9), INIT, 3650.0)
        assert tr.terminated == "TimeEnd"
        assert max(tr.C.max(), tr.L.max(), tr.B.max()) < 1e15


def test_criterion_09_remission_dwell(capsys):
    with criterion(capsys, 9, "I0=2.1e9 dwells near P2 for more than five "
                              "years at threshold 0.05"):
        p = replace(STD, I0=2.1e9)
        d = remission_duration(p, SimState(C=5e7, L=1e11, B=5e8),
                               threshold_fraction=0.05)
        assert d > 1825.0


def test_criterion_10_pawn_orderings(capsys):
    with criterion(capsys, 10, "sensitivity orderings reproduce on three "
                               "seeds"):
        t0 = time.time()
        for seed in (1, 2, 3):
            res = pawn_indices(default_plan(seed=seed))
            assert res.ranking("first_peak_mag")[0] == "L0"
            assert res.ranking("second_peak_mag")[0] == "rho_C"
            oi = res.outputs.index("second_peak_mag")
            med = {p: res.median_ks[pi, oi]
                   for pi, p in enumerate(res.parameters)}
            assert med["I0"] > med["L0"]
            assert res.ranking("first_peak_time")[0] == "rho_C"
            assert res.ranking("second_peak_time")[0] == "rho_C"
        assert time.time() - t0 < 600.0


def test_criterion_11_bitwise_determinism(capsys, tmp_path):
    with criterion(capsys, 11, "identical configs give bitwise-identical "
                               "CSV output, parallel sweeps included"):
        sweep_args = ["sweep",
                      "--set", "grid.x.name=L0", "--set", "grid.x.min=1e10",
                      "--set", "grid.x.max=1e11", "--set", "grid.x.count=3",
                      "--set", "grid.y.name=B0", "--set", "grid.y.min=1e8",
                      "--set", "grid.y.max=1e9", "--set", "grid.y.count=3",
                      "--t-end", "365"]
        pawn_args = ["pawn", "--seed", "3",
                     "--set", "pawn.n_unconditional=40",
                     "--set", "pawn.n_conditioning_points=10",
                     "--set", "pawn.n_conditional=25"]
        runs = {
            "sim": (["simulate", "--t-end", "60"], ["trajectory.csv"]),
            "reg": (["region", "--set", "grid.x.count=6",
                     "--set", "grid.y.count=5"], ["region.csv"]),
            "swp": (sweep_args, ["surface.csv"]),
            "pwn": (pawn_args, ["pawn_ks.csv", "pawn_summary.csv"]),
        }
        for tag, (args, files) in runs.items():
            a, b = tmp_path / f"{tag}_a", tmp_path / f"{tag}_b"
            assert cli_main(args + ["--out", str(a)]) == 0
            assert cli_main(args + ["--out", str(b)]) == 0
            for name in files:
                assert (a / name).read_bytes() == (b / name).read_bytes()
        # parallel schedule must assemble the same bytes
        c = tmp_path / "swp_c"
        assert cli_main(sweep_args + ["--out", str(c), "--workers", "2"]) == 0
        assert (tmp_path / "swp_a" / "surface.csv").read_bytes() \
            == (c / "surface.csv").read_bytes()
