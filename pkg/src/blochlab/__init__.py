"""Matter-wave dynamics in tilted single- and double-periodic optical lattices.

The package simulates the scaled Schrodinger / Gross-Pitaevskii equation

    i hbar dpsi/dt = [-(hbar^2/2) d^2/dx^2 + A cos x + eps cos(x/2)
                      + F(t) x + g |psi|^2] psi

and provides the band-structure and tight-binding analysis needed to
design Bloch oscillations, shuttle transport, Bloch-Zener beam splitters
and the matter-wave Mach-Zehnder interferometer built from them.
"""

from .model import (D_PERIOD, DEFAULT_F, DEFAULT_HBAR, GridError, ScaledParams,
                    SpatialGrid, WaveFunction, default_grid, make_gaussian)
from .schedules import (PRESET_NAMES, ControlSchedule, ProbeWindow,
                        ScheduleError, Segment, schedule_from_table)
from .bands import (BandTable, BlochProblem, CommensurabilityError,
                    CutoffError, band_filtered_state, bloch_state_on_grid,
                    find_commensurate_eps, ground_band_width,
                    project_onto_bands, reconstruction_eps_candidates,
                    solve_bands, synthesize_from_bands, time_scales)
from .propagate import (PropagationConfig, PropagationError, Trajectory,
                        absorber_mask, probe_potential, run,
                        segment_potential, step)
from .observables import (BandOccupationSeries, MomentSeries,
                          band_occupations, dense_moments, fringe_fit,
                          interval_probability, moments,
                          occupation_cosine_fit, occupation_series,
                          quasimomentum_centroid, unwrap_centroids)
from .tightbinding import (TBGaussian, TBModel, coherence_params,
                           dispersion_law, lie_moments, tb_oracle)

__version__ = "0.1.0"
