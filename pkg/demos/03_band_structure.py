"""Minibands of the double-periodic lattice.

Adding eps*cos(x/2) doubles the lattice period: the ground band folds into
the reduced zone kappa in [-1/4, 1/4) and splits into two minibands whose
zone-edge gap opens linearly in eps.  The commensurability of the two
Bloch-Zener time scales, T_1/T_2 = (E1 - E0)/(2 d F), controls when a wave
packet reconstructs.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from blochlab import (BlochProblem, ScaledParams, solve_bands, time_scales,
                      reconstruction_eps_candidates)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

fig, axes = plt.subplots(1, 2, figsize=(9, 4), sharey=True)
for ax, eps in zip(axes, (0.0, 0.121)):
    p = ScaledParams(eps=eps, F=0.0)
    table = solve_bands(BlochProblem(p, plane_wave_cutoff=48, n_kappa=512),
                        n_bands=3, check_cutoff=False)
    for alpha in range(3):
        ax.plot(table.kappa, table.energies[:, alpha], lw=1.2)
    ax.set_title(f"eps = {eps}")
    ax.set_xlabel("kappa")
    table.to_csv(os.path.join(OUT, f"bands_eps{eps}.csv"))
    print(f"eps = {eps}: edge gap {table.edge_gap():.5f}, miniband widths "
          f"{table.band_width(0):.4f} / {table.band_width(1):.4f}")
axes[0].set_ylabel("E(kappa)")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "minibands.png"), dpi=130)
print(f"wrote {OUT}/minibands.png")

params = ScaledParams(eps=0.0825)
table = solve_bands(BlochProblem(params.with_(F=0.0), plane_wave_cutoff=48,
                                 n_kappa=512), n_bands=2, check_cutoff=False)
ts = time_scales(table, params)
print(f"time scales at eps = 0.0825: T_B = {ts['T_B']:.1f}, "
      f"T_1/T_2 = {ts['T_1'] / ts['T_2']:.3f}")

cands = reconstruction_eps_candidates(ScaledParams(), 2, (0.09, 0.15))
for eps, s, r in cands:
    print(f"two-Bloch-period reconstruction predicted near eps = {eps:.4f} "
          f"(T_1/T_2 = {s}/{r})")
