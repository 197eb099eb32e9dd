import os

import numpy as np
import pytest

from blochlab import GridError, ScaledParams, SpatialGrid
from blochlab.experiments import (EXPERIMENTS, ExperimentConfig,
                                  ExperimentError, SweepSpec, default_sweep,
                                  run_experiment, run_sweep, verify_manifest)

FINE = dict(n_points=4096, x_min=-256 * np.pi, x_max=256 * np.pi)


def fine_grid():
    return SpatialGrid(**FINE)


def fast_config(experiment, outdir, **kwargs):
    kwargs.setdefault("grid", fine_grid())
    kwargs.setdefault("dt_per_TB", 512)
    kwargs.setdefault("snapshot_stride", 256)
    return ExperimentConfig(experiment=experiment, outdir=str(outdir),
                            **kwargs)


def test_sweep_spec_validation():
    with pytest.raises(ExperimentError):
        SweepSpec("bogus", 0.0, 1.0, 4)
    with pytest.raises(ExperimentError):
        SweepSpec("eps", 0.0, 1.0, 1)
    assert SweepSpec("g", 0.0, 1.0, 5).values.size == 5


def test_default_sweeps_defined():
    for name in ("eps_sweep", "mzi_v0_sweep", "gpe_g_sweep"):
        spec = default_sweep(name)
        assert spec is not None and spec.n >= 12 or name == "eps_sweep"
    assert default_sweep("bloch") is None


def test_experiment_config_validation(tmp_path):
    with pytest.raises(ExperimentError, match="unknown experiment"):
        ExperimentConfig(experiment="nope")
    with pytest.raises(ExperimentError, match="sweep"):
        ExperimentConfig(experiment="bloch",
                         sweep=SweepSpec("eps", 0.0, 0.1, 3))


def test_bloch_experiment_outputs(tmp_path):
    cfg = fast_config("bloch", tmp_path / "bloch", n_repeats=1)
    manifest = run_experiment(cfg)
    outdir = str(tmp_path / "bloch")
    names = [f for f, _, _ in manifest.files]
    assert "moments.csv" in names
    assert "density.f64" in names
    assert "density.info.txt" in names
    assert manifest.complete
    assert verify_manifest(outdir) == []

    # binary map round trip against the sidecar geometry
    side = dict(line.split(" = ", 1) for line in
                open(os.path.join(outdir, "density.info.txt"))
                if " = " in line)
    rows, cols = int(side["rows"]), int(side["cols"])
    data = np.fromfile(os.path.join(outdir, "density.f64"),
                       dtype="<f8").reshape(rows, cols)
    assert cols == FINE["n_points"]
    assert np.all(data >= 0)
    times = [float(t) for t in side["times"].split(",")]
    assert len(times) == rows

    moments = np.loadtxt(os.path.join(outdir, "moments.csv"), delimiter=",",
                         skiprows=1)
    assert abs(moments[0, 1]) < 1e-6      # packet starts centered


def test_rerun_is_bit_identical(tmp_path):
    cfg1 = fast_config("bloch", tmp_path / "a", n_repeats=1)
    cfg2 = fast_config("bloch", tmp_path / "b", n_repeats=1)
    m1 = run_experiment(cfg1)
    m2 = run_experiment(cfg2)
    assert [(f, h) for f, h, _ in m1.files] == [(f, h) for f, h, _ in m2.files]


def test_verify_detects_tampering(tmp_path):
    cfg = fast_config("bloch", tmp_path / "t", n_repeats=1)
    run_experiment(cfg)
    path = tmp_path / "t" / "moments.csv"
    path.write_text(path.read_text() + "# tampered\n")
    problems = verify_manifest(str(tmp_path / "t"))
    assert any("moments.csv" in p for p in problems)


def test_sweep_results_ordered_by_value(tmp_path):
    cfg = fast_config("eps_sweep", tmp_path / "s", dt_per_TB=256,
                      sweep=SweepSpec("eps", 0.1, -0.1, 3))
    data = run_sweep(cfg, cfg.resolved_params(), cfg.resolved_grid())
    assert np.all(np.diff(data["eps"]) > 0)
    assert set(data) == {"eps", "p_lower", "p_upper", "absorbed"}


def test_sweep_worker_pool_matches_serial(tmp_path):
    cfg_ser = fast_config("eps_sweep", tmp_path / "p1", dt_per_TB=256,
                          sweep=SweepSpec("eps", 0.0, 0.1, 3), workers=1)
    cfg_par = fast_config("eps_sweep", tmp_path / "p2", dt_per_TB=256,
                          sweep=SweepSpec("eps", 0.0, 0.1, 3), workers=2)
    a = run_sweep(cfg_ser, cfg_ser.resolved_params(), cfg_ser.resolved_grid())
    b = run_sweep(cfg_par, cfg_par.resolved_params(), cfg_par.resolved_grid())
    for key in a:
        assert np.array_equal(a[key], b[key])


def test_mzi_sweep_experiment_writes_fringe_fit(tmp_path):
    cfg = fast_config("mzi_v0_sweep", tmp_path / "m", dt_per_TB=1024,
                      sweep=SweepSpec("V0", 0.0, 0.145, 14))
    manifest = run_experiment(cfg)
    assert "fringe_period" in manifest.extras
    assert abs(manifest.extras["fringe_period"] - 0.069) < 0.01
    data = np.loadtxt(os.path.join(str(tmp_path / "m"), "mzi_v0_sweep.csv"),
                      delimiter=",", skiprows=1)
    assert data.shape == (14, 4)


def test_tb_dispersion_experiment(tmp_path):
    cfg = ExperimentConfig(experiment="tb_dispersion",
                           outdir=str(tmp_path / "tb"))
    manifest = run_experiment(cfg)
    data = np.loadtxt(os.path.join(str(tmp_path / "tb"), "tb_dispersion.csv"),
                      delimiter=",", skiprows=1)
    assert data.shape[0] == 12           # 3 widths x 4 period counts
    oracle, closed = data[:, 2], data[:, 3]
    # growths are differences of ~sigma_n^2-sized moments; compare at the
    # moment scale rather than relative to the (tiny) difference itself
    assert np.allclose(oracle, closed, rtol=1e-6, atol=1e-6)


def test_failed_run_leaves_incomplete_manifest(tmp_path):
    # the packet does not fit this tiny grid: the error must propagate and
    # the manifest must record the incompleteness
    tiny = SpatialGrid(512, -16 * np.pi, 16 * np.pi, momentum_bound=0.5)
    cfg = ExperimentConfig(experiment="bloch", grid=tiny, dt_per_TB=64,
                           outdir=str(tmp_path / "f"))
    with pytest.raises(GridError):
        run_experiment(cfg)
    manifest_text = (tmp_path / "f" / "manifest.txt").read_text()
    assert "complete = false" in manifest_text


def test_experiment_catalog_is_stable():
    assert set(EXPERIMENTS) == {
        "bloch", "free_split", "shuttle", "bz_oscillation", "bz_transport",
        "beam_split_t2", "beam_split_t3", "beam_split_t4", "eps_sweep",
        "mzi_v0_sweep", "gpe_g_sweep", "tb_dispersion"}
