"""Bloch-Zener oscillations: splitting and reconstruction.

With the period-doubled lattice the packet splits at each reduced-zone-edge
crossing and the branches interfere.  At eps = 0.0825 the miniladder beat
is commensurate with the Bloch time and the packet reconstructs after one
T_B; at eps = 0.121 it takes two.  The miniband occupations sampled at
multiples of T_1 = T_B/2 follow the cosine law X + Y cos(2 pi (s/r) n + phi).
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from blochlab import (BlochProblem, PropagationConfig, ScaledParams,
                      default_grid, make_gaussian, occupation_cosine_fit,
                      occupation_series, run, schedule_from_table,
                      solve_bands)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

grid = default_grid()
psi0 = make_gaussian(grid, sigma_x=60.0)
steps = 4096

fig, axes = plt.subplots(1, 2, figsize=(10, 4.2), sharey=True)
for ax, eps in zip(axes, (0.0825, 0.121)):
    params = ScaledParams(eps=eps)
    T_B = params.bloch_period()
    config = PropagationConfig.for_params(params, steps, snapshot_stride=64,
                                          store_complex=False)
    traj = run(psi0, schedule_from_table("bloch", params, 2), config, params)
    fid = abs(traj.final.overlap(psi0))
    print(f"eps = {eps}: |<psi0|psi(2T_B)>| = {fid:.3f}, "
          f"absorbed {traj.final.absorbed_norm:.3f}")
    sel = (grid.x > -900) & (grid.x < 300)
    ax.imshow(traj.densities[:, sel].T, origin="lower", aspect="auto",
              extent=[0, 2, grid.x[sel][0], grid.x[sel][-1]], cmap="magma")
    ax.set_title(f"eps = {eps}")
    ax.set_xlabel("t / T_B")
axes[0].set_ylabel("x")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "bloch_zener.png"), dpi=130)
print(f"wrote {OUT}/bloch_zener.png")

# occupation law at the single-period reconstruction point
params = ScaledParams(eps=0.0825)
table = solve_bands(BlochProblem.for_grid(grid, params.with_(F=0.0)),
                    n_bands=2)
config = PropagationConfig.for_params(params, steps,
                                      snapshot_stride=steps // 2,
                                      store_complex=True)
traj = run(psi0, schedule_from_table("bloch", params, 4), config, params)
occ = occupation_series(traj, table)
ns = np.arange(occ.p0.size)
q = table.miniladder_offset_gap() / (params.d * params.F)
s = 2 * round((q - 1) / 2) + 1
fit = occupation_cosine_fit(ns, occ.p0, s / 2.0)
print(f"occupation law with s/r = {s}/2: X = {fit['X']:.3f}, "
      f"Y = {fit['Y']:.3f}, rms = {fit['rms']:.4f}")

fig2, ax2 = plt.subplots(figsize=(6, 4))
ax2.plot(ns, occ.p0, "o-", label="p0")
ax2.plot(ns, occ.p1, "s--", label="p1")
ax2.set_xlabel("n (multiples of T_1)")
ax2.set_ylabel("occupation")
ax2.legend()
fig2.tight_layout()
fig2.savefig(os.path.join(OUT, "occupations.png"), dpi=130)
print(f"wrote {OUT}/occupations.png")
