# How long does the orbit linger near the tumor-free point P2?
#
# Below the red threshold P2 is unstable, but orbits passing nearby can
# still spend years in its neighborhood before the leukemic mode kicks
# back in.  Dwell time grows sharply as I0 approaches the threshold and
# saturates at the horizon once P2 turns stable.

from dataclasses import replace
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from cartsim import (distance_series, equilibria, integrate,
                     remission_duration, standard_init, standard_params,
                     thresholds)

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

std = standard_params()
init = standard_init()
red = thresholds(std).red
print(f"red threshold at I0 = {red:.4e}")

i0_values = np.linspace(0.5e9, 3.0e9, 26)
dwell = []
for i0 in i0_values:
    p = replace(std, I0=float(i0))
    dwell.append(remission_duration(p, init, 0.05))
dwell = np.array(dwell)

for i0, d in zip(i0_values[::5], dwell[::5]):
    print(f"  I0 = {i0:.2e}: dwell {d:8.1f} d")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(11, 4.2))

ax1.plot(i0_values / 1e9, dwell / 365.25, "o-", ms=4)
ax1.axvline(red / 1e9, color="red", lw=1.0, ls="--", label="red threshold")
ax1.axhline(5.0, color="0.6", lw=0.8, ls=":", label="5 years")
ax1.set_xlabel("I0 [1e9 cells/day]")
ax1.set_ylabel("dwell near P2 [years]")
ax1.set_title("remission window vs marrow input")
ax1.legend()

# distance traces for a sub- and a super-threshold case
for i0, color in ((2.1e9, "tab:orange"), (2.5e9, "tab:blue")):
    p = replace(std, I0=i0)
    tr = integrate(p, init, 7300.0, max_samples=16384)
    p2 = equilibria(p)[1]
    d = distance_series(tr, p2)
    norm = np.sqrt(sum(c * c for c in p2.coords))
    ax2.semilogy(tr.t / 365.25, d / norm, lw=0.9, color=color,
                 label=f"I0 = {i0:.1e}")
ax2.axhline(0.05, color="k", lw=0.8, ls="--", label="5% threshold")
ax2.set_xlabel("t [years]")
ax2.set_ylabel("|state - P2| / |P2|")
ax2.set_title("distance to P2")
ax2.legend(fontsize=9)

fig.tight_layout()
fig.savefig(OUT / "remission_window.png", dpi=150)
print(f"wrote {OUT / 'remission_window.png'}")
