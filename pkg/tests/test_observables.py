import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blochlab import (BlochProblem, PropagationConfig, ScaledParams,
                      WaveFunction, band_occupations, bloch_state_on_grid,
                      fringe_fit, interval_probability, make_gaussian,
                      moments, occupation_cosine_fit, quasimomentum_centroid,
                      run, solve_bands, unwrap_centroids)
from blochlab.observables import FitError, dense_moments
from blochlab.schedules import ControlSchedule, Segment


def still_trajectory(grid, sigma=30.0, x0=0.0):
    psi0 = make_gaussian(grid, sigma, x0=x0)
    cfg = PropagationConfig(dt=0.5, snapshot_stride=1, absorber_width=0.0)
    sched = ControlSchedule((Segment(0.0, 0.5, 0.0, 0.0, 0.0),))
    return run(psi0, sched, cfg, ScaledParams(F=0.0, A=0.0))


def test_moments_of_resting_gaussian(fine_grid):
    traj = still_trajectory(fine_grid)
    m = moments(traj)
    assert abs(m.mean_x[0]) < 1e-9
    assert abs(m.var_x[0] - 30.0 ** 2 / 4.0) < 0.05
    assert abs(m.norm_inside[0] - 1.0) < 1e-12
    assert np.all(m.var_x >= 0)


def test_moments_translation(fine_grid):
    psi = make_gaussian(fine_grid, 30.0)
    shift_cells = 40
    rolled = WaveFunction(fine_grid, np.roll(psi.psi, shift_cells))
    a = np.sum(psi.density() * fine_grid.x) * fine_grid.dx
    b = np.sum(rolled.density() * fine_grid.x) * fine_grid.dx
    assert abs((b - a) - shift_cells * fine_grid.dx) < 1e-9


def test_moments_needs_snapshots(fine_grid):
    traj = still_trajectory(fine_grid)
    empty = traj
    empty.densities = np.zeros((0, fine_grid.n_points))
    with pytest.raises(ValueError):
        moments(empty)


def test_interval_probability_total(fine_grid):
    psi = make_gaussian(fine_grid, 30.0)
    total = interval_probability(psi, fine_grid.x_min, fine_grid.x_max)
    assert abs(total - (1.0 - psi.absorbed_norm)) < 1e-9


@given(a=st.floats(-700.0, 690.0), width=st.floats(1.0, 100.0),
       split=st.floats(0.1, 0.9))
@settings(max_examples=25, deadline=None)
def test_interval_additivity(fine_grid, a, width, split):
    psi = make_gaussian(fine_grid, 30.0)
    b = a + width
    mid = a + split * width
    whole = interval_probability(psi, a, b)
    parts = (interval_probability(psi, a, mid)
             + interval_probability(psi, mid, b))
    assert abs(whole - parts) < 1e-12


def test_interval_validation(fine_grid):
    psi = make_gaussian(fine_grid, 30.0)
    with pytest.raises(ValueError):
        interval_probability(psi, 10.0, -10.0)
    with pytest.raises(ValueError, match="outside"):
        interval_probability(psi, 0.0, fine_grid.x_max + 10.0)


def test_quasimomentum_centroid_reads_boost(fine_grid):
    psi = make_gaussian(fine_grid, 30.0, kappa0=0.1)
    assert abs(quasimomentum_centroid(psi) - 0.1) < 1e-6
    psi0 = make_gaussian(fine_grid, 30.0)
    assert abs(quasimomentum_centroid(psi0)) < 1e-9


def test_unwrap_centroids():
    raw = np.array([0.2, 0.24, -0.24, -0.2, -0.24, 0.24])
    un = unwrap_centroids(raw)
    assert np.allclose(np.diff(un), [0.04, 0.02, 0.04, -0.04, -0.02])


def test_fringe_fit_recovers_synthetic_cosine():
    v = np.linspace(0.0, 0.21, 40)
    period = 0.069
    y = 0.5 + 0.45 * np.cos(2 * np.pi * v / period + 0.3)
    fit = fringe_fit(v, y)
    assert abs(fit["period"] - period) < 1e-4
    assert abs(fit["phase"] - 0.3) < 1e-3
    assert abs(fit["contrast"] - 0.9) < 1e-3


def test_fringe_fit_validation():
    v = np.linspace(0, 0.2, 8)
    with pytest.raises(FitError, match="12"):
        fringe_fit(v, np.cos(v))
    v = np.linspace(0, 0.05, 20)        # less than 1.5 periods of 0.069
    y = 0.5 + 0.4 * np.cos(2 * np.pi * v / 0.069)
    with pytest.raises(FitError):
        fringe_fit(v, y)


def test_occupation_cosine_fit_synthetic():
    n = np.arange(9)
    truth = 0.75 + 0.2 * np.cos(2 * np.pi * 0.37 * n + 0.5)
    fit = occupation_cosine_fit(n, truth, 0.37)
    assert fit["rms"] < 1e-12
    assert abs(fit["X"] - 0.75) < 1e-12
    assert abs(fit["Y"] - 0.2) < 1e-12
    assert abs(fit["phi"] - 0.5) < 1e-12


def test_occupation_cosine_fit_half_integer_ratio():
    n = np.arange(9)
    p = 0.75 + 0.2 * np.cos(np.pi * n)
    fit = occupation_cosine_fit(n, p, 26.5)
    assert fit["rms"] < 1e-12
    assert fit["Y"] < 1.0          # rank deficiency must not blow up Y
    assert abs(fit["Y"] - 0.2) < 1e-8


def test_band_occupations_pure_state(fine_grid):
    p = ScaledParams(eps=0.121, F=0.0)
    table = solve_bands(BlochProblem.for_grid(fine_grid, p), n_bands=2)
    chi = bloch_state_on_grid(table, 0, 0.0625, fine_grid)
    p0, p1 = band_occupations(chi, table)
    assert abs(p0 - 1.0) < 1e-8
    assert p1 < 1e-8
    chi1 = bloch_state_on_grid(table, 1, -0.1, fine_grid)
    q0, q1 = band_occupations(chi1, table)
    assert abs(q1 - 1.0) < 1e-8 and q0 < 1e-8


def test_band_occupations_grid_mismatch(fine_grid, grid):
    p = ScaledParams(eps=0.121, F=0.0)
    table = solve_bands(BlochProblem.for_grid(fine_grid, p), n_bands=2)
    with pytest.raises(ValueError, match="mesh"):
        band_occupations(make_gaussian(grid, 60.0), table)


def test_dense_moments_match_snapshot_moments(fine_grid):
    psi0 = make_gaussian(fine_grid, 30.0)
    sched = ControlSchedule((Segment(0.0, 100.0, 0.0011, 0.0, 1.0),))
    cfg = PropagationConfig(dt=0.5, snapshot_stride=50, moment_stride=50,
                            absorber_width=0.0)
    traj = run(psi0, sched, cfg, ScaledParams())
    snap = moments(traj)
    dense = dense_moments(traj)
    assert np.allclose(snap.times, dense.times)
    assert np.allclose(snap.mean_x, dense.mean_x, atol=1e-10)
    assert np.allclose(snap.var_x, dense.var_x, atol=1e-8)
