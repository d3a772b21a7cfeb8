# Equilibria, their stability, and the (I0, tauC*rhoC) region chart.
#
# Walks I0 through the four regimes at the standard composite value,
# printing what each equilibrium does, then renders the full region map
# with the three threshold curves on top.

from dataclasses import replace
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
from matplotlib.colors import ListedColormap

from cartsim import (GridSpec, classify, equilibria, region_classify,
                     region_map, standard_params, thresholds)

OUT = Path(__file__).resolve().parent / "out"
OUT.mkdir(exist_ok=True)

std = standard_params()
thr = thresholds(std)
print(f"thresholds at tauC*rhoC = {std.tauC_rhoC:.2e}:")
print(f"  blue  I0 = {thr.blue:.4e}   (P1 gains its third unstable direction)")
print(f"  red   I0 = {thr.red:.4e}   (P2 and P3 trade stability)")
print(f"  green I0 = {thr.green:.4e}   (P2 leaves the positive octant)")

for i0 in (0.2e9, 1e9, 3e9, 6e9):
    p = replace(std, I0=i0)
    region, on_boundary = region_classify(p)
    print(f"\nI0 = {i0:.1e}  ->  {region.value}"
          + (" (on a boundary)" if on_boundary else ""))
    for point in equilibria(p):
        if not point.defined:
            print(f"  {point.kind}: undefined here")
            continue
        r = classify(point, p)
        tag = "stable" if r.stable else f"unstable ({r.dim_stable}d stable)"
        bio = "" if r.biological else ", outside octant"
        print(f"  {point.kind} at {tuple(f'{c:.2e}' for c in point.coords)}"
              f": {tag}{bio}")

# chart over the default grid
grid = GridSpec(x_name="I0", x_min=0.5e9, x_max=5e9, x_count=201,
                y_name="tauC_rhoC", y_min=1e-10, y_max=1e-9, y_count=201)
rm = region_map(grid)
codes = rm.codes()

cmap = ListedColormap(["0.3", "#c7d7f0", "#c8e6c8", "#f0d0d0", "#f5f0c0"])
fig, ax = plt.subplots(figsize=(7, 5))
x = grid.x_values() / 1e9
y = grid.y_values()
im = ax.pcolormesh(x, y, codes.T, cmap=cmap, vmin=0, vmax=4, shading="nearest")
# threshold curves: each row of the map already carries them
ax.plot(rm.blue[0] / 1e9, y, color="blue", lw=1.5, label="blue")
ax.plot(rm.red[0] / 1e9, y, color="red", lw=1.5, label="red")
ax.plot(rm.green[0] / 1e9, y, color="green", lw=1.5, label="green")
ax.set_xlim(x[0], x[-1])
ax.set_xlabel("I0 [1e9 cells/day]")
ax.set_ylabel("tauC * rhoC")
ax.set_title("stability regions (R1..R4 left to right)")
ax.legend(loc="upper right")
fig.tight_layout()
fig.savefig(OUT / "region_map.png", dpi=150)
print(f"\nwrote {OUT / 'region_map.png'}")
