"""Deployment, tessellation and radio parameters.

Drops n nodes uniformly on the unit square with the sink pinned at the origin,
derives the analysis grid and radio parameters, and checks the two structural
facts everything else rests on: per-cell occupancy stays inside its band, and
the radius covers a cell plus its edge-adjacent cells.

Run:  python3 demos/01_deployment_and_grid.py
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from alohamax import (bfs_hops, connectivity, deploy, occupancy_profile,
                      radio_params, tessellate)

N = 1000
SEED = 1
OUT_DIR = os.path.join(os.path.dirname(__file__), "out")

dep = deploy(N, SEED)
grid = tessellate(N)
radio = radio_params(N)

print(f"deployment: n={N}, seed={SEED}, sink at {tuple(dep.positions[0])}")
print(f"grid: {grid.cells_per_side}x{grid.cells_per_side} cells, side {grid.cell_side}")
print(f"radio: radius={radio.radius:.4f}  guard={radio.delta_prime}  "
      f"k1={radio.interference_cells}  p={radio.tx_prob:.3e}")
print(f"radius / cell side = {radio.radius / grid.cell_side:.4f} "
      f"(needs >= sqrt(5) = 2.2361 so one success floods the adjacent cells)")

counts, within_band = occupancy_profile(dep, grid)
print(f"occupancy: min={counts.min()} max={counts.max()} per cell, "
      f"inside [c1 ln n, c2 ln n] band: {within_band}")

connected, components = connectivity(dep, radio.radius)
hops = bfs_hops(dep, radio.radius)
print(f"connected: {connected}; max hop distance {hops.max()} "
      f"(analysis bound d = {2 * grid.cells_per_side})")

os.makedirs(OUT_DIR, exist_ok=True)
fig, ax = plt.subplots(figsize=(7, 7))
scatter = ax.scatter(dep.positions[:, 0], dep.positions[:, 1], c=hops, s=14,
                     cmap="viridis")
ax.scatter([0], [0], marker="*", s=260, c="red", edgecolors="black", zorder=5,
           label="sink")
for k in range(1, grid.cells_per_side):
    ax.axhline(k * grid.cell_side, color="gray", lw=0.4)
    ax.axvline(k * grid.cell_side, color="gray", lw=0.4)
circle = plt.Circle((0, 0), radio.radius, fill=False, color="red", ls="--",
                    label="transmission radius")
ax.add_patch(circle)
ax.set_xlim(0, 1), ax.set_ylim(0, 1)
ax.set_aspect("equal")
ax.legend(loc="upper right")
fig.colorbar(scatter, label="hop distance to sink")
ax.set_title(f"n={N} deployment, {grid.cells_per_side}x{grid.cells_per_side} grid")
path = os.path.join(OUT_DIR, "deployment.png")
fig.savefig(path, dpi=120, bbox_inches="tight")
print(f"wrote {path}")
