# One standard run: a year of therapy from the table values.
#
# The CAR T pool expands on antigen contact, crashes the tumor about a
# week in, and the survivors settle into slow oscillations around the
# interior equilibrium.  Log scale or you see nothing.

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cartsim import (detect_peaks, equilibria, integrate, standard_init,
                     standard_params)

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

params = standard_params()
init = standard_init()

tr = integrate(params, init, 365.0, max_samples=8192)
peaks = detect_peaks(params, init, 365.0, max_peaks=4)

print(f"terminated: {tr.terminated}, {len(tr.t)} samples")
print("peaks of L:")
for n, (t, v) in enumerate(peaks.peaks, start=1):
    print(f"  n={n}  t = {t:8.2f} d   L = {v:.4e} cells")
if len(peaks) >= 2:
    print(f"  inter-peak interval {peaks.deltas[0]:.2f} d, "
          f"magnitude ratio {peaks.ratios[0]:.3f}")

p3 = equilibria(params)[2]
print(f"P3 = {tuple(f'{c:.3e}' for c in p3.coords)}")

fig, ax = plt.subplots(figsize=(8, 4.5))
floor = 1.0  # one cell, keeps the log plot honest
ax.semilogy(tr.t, np.maximum(tr.C, floor), label="CAR T  C(t)", color="tab:blue")
ax.semilogy(tr.t, np.maximum(tr.L, floor), label="leukemic  L(t)", color="tab:red")
ax.semilogy(tr.t, np.maximum(tr.B, floor), label="healthy B  B(t)", color="tab:green")
ax.plot(peaks.times, peaks.values, "kv", ms=7, label="detected L peaks")
ax.axhline(p3.coords[1], color="tab:red", lw=0.8, ls=":", label="L3")
ax.set_xlabel("t [days]")
ax.set_ylabel("cells")
ax.set_ylim(bottom=floor)
ax.legend(loc="lower right", fontsize=9)
ax.set_title("standard parameters, one year")
fig.tight_layout()
fig.savefig(OUT / "single_trajectory.png", dpi=150)
print(f"wrote {OUT / 'single_trajectory.png'}")
