"""Tunable matter-wave beam splitter.

The table-2 switching sequence splits the packet at T_B/2 and then drags
the two branches apart with sign flips of F; afterwards both do plain
Bloch oscillations in place.  The branch weights are set by eps through
the Landau-Zener tunneling at the zone edge, so sweeping eps tunes the
splitting ratio continuously.
"""

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from blochlab import (PropagationConfig, ScaledParams, default_grid,
                      interval_probability, make_gaussian, run,
                      schedule_from_table)
from blochlab.experiments import (ExperimentConfig, SPLIT_T2_LOWER,
                                  SPLIT_T2_UPPER, SweepSpec, run_sweep)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

grid = default_grid()
params = ScaledParams(eps=0.0825)
T_B = params.bloch_period()
psi0 = make_gaussian(grid, sigma_x=60.0)

config = PropagationConfig.for_params(params, 4096, snapshot_stride=64)
traj = run(psi0, schedule_from_table("split_t2", params, 1), config, params)
pl = interval_probability(traj.final, *SPLIT_T2_LOWER)
pu = interval_probability(traj.final, *SPLIT_T2_UPPER)
print(f"branch weights at 3 T_B: {pl:.3f} (left) / {pu:.3f} (right), "
      f"loss {1 - pl - pu:.3f}")

fig, ax = plt.subplots(figsize=(8, 4.5))
sel = (grid.x > -2500) & (grid.x < 1200)
ax.imshow(traj.densities[:, sel].T, origin="lower", aspect="auto",
          extent=[0, 3, grid.x[sel][0], grid.x[sel][-1]], cmap="magma")
ax.set_xlabel("t / T_B")
ax.set_ylabel("x")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "beam_splitter.png"), dpi=130)
print(f"wrote {OUT}/beam_splitter.png")

# splitting ratio vs eps, read out at T_B/2
cfg = ExperimentConfig(experiment="eps_sweep", params=ScaledParams(),
                       dt_per_TB=4096, sweep=SweepSpec("eps", -0.25, 0.25, 21))
data = run_sweep(cfg, cfg.resolved_params(), grid)
fig2, ax2 = plt.subplots(figsize=(6, 4))
ax2.plot(data["eps"], data["p_lower"], "o-", label="x in [-800, -300]")
ax2.plot(data["eps"], data["p_upper"], "s--", label="x in [-300, 200]")
ax2.set_xlabel("eps")
ax2.set_ylabel("branch occupation at T_B/2")
ax2.legend()
fig2.tight_layout()
fig2.savefig(os.path.join(OUT, "splitting_vs_eps.png"), dpi=130)
print(f"wrote {OUT}/splitting_vs_eps.png")
