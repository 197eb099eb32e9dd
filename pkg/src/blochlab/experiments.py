"""Config-driven experiment runner.

Each experiment rebuilds the data behind one of the published dynamics
figures: preset schedules, the eps / V0 / g sweeps and the tight-binding
dispersion table.  Outputs are CSV series plus a raw binary density map
with a plain-text sidecar; a manifest with checksums is written last.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__ as _pkg_version
from .model import ScaledParams, SpatialGrid, default_grid, make_gaussian
from .observables import dense_moments, fringe_fit, interval_probability
from .propagate import PropagationConfig, Trajectory, run
from .schedules import ControlSchedule, schedule_from_table
from .tightbinding import (TBGaussian, TBModel, dispersion_law, lie_moments,
                           shuttle_profile, tb_moments, tb_oracle)

EXPERIMENTS = (
    "bloch", "free_split", "shuttle", "bz_oscillation", "bz_transport",
    "beam_split_t2", "beam_split_t3", "beam_split_t4", "eps_sweep",
    "mzi_v0_sweep", "gpe_g_sweep", "tb_dispersion",
)
SWEEP_EXPERIMENTS = ("eps_sweep", "mzi_v0_sweep", "gpe_g_sweep")

# Readout geometry of the interferometer figures: branch windows at
# t = T_B/2 and t = T_B, probe region and window, all in scaled units.
LOWER_BRANCH = (-800.0, -300.0)
UPPER_BRANCH = (-300.0, 200.0)
PROBE_REGION = (-195.0, 195.0)
PROBE_WINDOW = (0.45, 0.55)          # in units of T_B
# Branch windows of the table-2 splitter after the full 3 T_B sequence
# (the two packets end near x = -1070 and x = +535).
SPLIT_T2_LOWER = (-2400.0, -900.0)
SPLIT_T2_UPPER = (0.0, 1100.0)

PACKET_WIDTH = 60.0                  # exp(-(x/60)^2) initial packet
GPE_PACKET_WIDTH = 20.0              # exp(-(x/20)^2) for the mean-field probe
GPE_EPS = 0.104
BZ_EPS_SINGLE = 0.0825               # reconstruction after one Bloch time
BZ_EPS_DOUBLE = 0.121                # reconstruction after two Bloch times


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    variable: str
    start: float
    stop: float
    n: int

    def __post_init__(self):
        if self.variable not in ("eps", "V0", "g"):
            raise ExperimentError(f"unknown sweep variable {self.variable!r}")
        if self.n < 2:
            raise ExperimentError("sweep needs at least 2 points")

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.n)


def default_sweep(experiment: str) -> SweepSpec | None:
    if experiment == "eps_sweep":
        return SweepSpec("eps", -0.3, 0.3, 25)
    if experiment == "mzi_v0_sweep":
        return SweepSpec("V0", 0.0, 0.21, 32)
    if experiment == "gpe_g_sweep":
        # range chosen to carry the interferometer output through a full
        # swing (max to min); the published figure gives no numeric g axis
        return SweepSpec("g", 0.0, 1.5, 24)
    return None


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    params: ScaledParams = field(default_factory=ScaledParams)
    grid: SpatialGrid | None = None
    dt_per_TB: int = 8192
    sweep: SweepSpec | None = None
    outdir: str = "out"
    snapshot_stride: int = 512
    n_repeats: int = 1
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ExperimentError(
                f"unknown experiment {self.experiment!r}; choose from "
                f"{EXPERIMENTS}")
        is_sweep = self.experiment in SWEEP_EXPERIMENTS
        if self.sweep is not None and not is_sweep:
            raise ExperimentError(
                f"{self.experiment} does not take a sweep specification")

    def resolved_sweep(self) -> SweepSpec | None:
        if self.experiment in SWEEP_EXPERIMENTS:
            return self.sweep or default_sweep(self.experiment)
        return None

    def resolved_grid(self) -> SpatialGrid:
        return self.grid if self.grid is not None else default_grid()

    def resolved_params(self) -> ScaledParams:
        p = self.params
        if self.experiment == "gpe_g_sweep" and p.eps == 0.0:
            p = p.with_(eps=GPE_EPS)
        if self.experiment in ("bz_oscillation", "bz_transport",
                               "beam_split_t2", "beam_split_t3",
                               "beam_split_t4", "mzi_v0_sweep") and p.eps == 0.0:
            p = p.with_(eps=BZ_EPS_SINGLE)
        return p


@dataclass
class RunManifest:
    experiment: str
    params: ScaledParams
    grid: SpatialGrid
    dt: float
    version: str
    wall_time: float
    files: list          # (relative path, sha256, size) triples
    complete: bool = True
    extras: dict = field(default_factory=dict)

    def write(self, outdir: str) -> str:
        path = os.path.join(outdir, "manifest.txt")
        tmp = path + ".tmp"
        p, g = self.params, self.grid
        lines = [
            f"experiment = {self.experiment}",
            f"version = {self.version}",
            f"complete = {str(self.complete).lower()}",
            f"hbar = {p.hbar!r}",
            f"F = {p.F!r}",
            f"eps = {p.eps!r}",
            f"A = {p.A!r}",
            f"g = {p.g!r}",
            f"n_points = {g.n_points}",
            f"x_min = {g.x_min!r}",
            f"x_max = {g.x_max!r}",
            f"dt = {self.dt!r}",
            f"wall_time_s = {self.wall_time:.3f}",
        ]
        for k, v in sorted(self.extras.items()):
            lines.append(f"{k} = {v!r}")
        lines.append("[files]")
        for rel, digest, size in self.files:
            lines.append(f"{rel} sha256={digest} bytes={size}")
        with open(tmp, "w") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
        return path


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def _register(files: list, outdir: str, relpath: str) -> None:
    full = os.path.join(outdir, relpath)
    files.append((relpath, _sha256(full), os.path.getsize(full)))


def verify_manifest(outdir: str) -> list:
    """Recompute checksums against manifest.txt; returns mismatch messages."""
    path = os.path.join(outdir, "manifest.txt")
    problems = []
    with open(path) as fh:
        lines = fh.read().splitlines()
    try:
        start = lines.index("[files]") + 1
    except ValueError:
        return [f"{path}: no [files] section"]
    for line in lines[start:]:
        if not line.strip():
            continue
        rel, sha, size = line.split()
        full = os.path.join(outdir, rel)
        if not os.path.exists(full):
            problems.append(f"missing file: {rel}")
            continue
        if os.path.getsize(full) != int(size.split("=")[1]):
            problems.append(f"size mismatch: {rel}")
        elif _sha256(full) != sha.split("=")[1]:
            problems.append(f"checksum mismatch: {rel}")
    return problems


def write_series_csv(path: str, columns: dict) -> None:
    names = list(columns)
    arrays = [np.asarray(columns[k], dtype=float) for k in names]
    with open(path, "w") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_density_map(outdir: str, stem: str, traj: Trajectory,
                      params: ScaledParams, csv_limit: int = 1 << 20) -> list:
    """|psi| map as little-endian float64, row-major (time x space), plus a
    plain-text sidecar; a CSV twin is added when the map is small."""
    written = []
    g = traj.grid
    bin_rel = f"{stem}.f64"
    traj.densities.astype("<f8").tofile(os.path.join(outdir, bin_rel))
    written.append(bin_rel)
    sidecar = [
        "format = float64-le row-major (time x space), values |psi|",
        f"rows = {traj.densities.shape[0]}",
        f"cols = {traj.densities.shape[1]}",
        f"n_points = {g.n_points}",
        f"x_min = {g.x_min!r}",
        f"x_max = {g.x_max!r}",
        f"hbar = {params.hbar!r}",
        f"F = {params.F!r}",
        f"eps = {params.eps!r}",
        f"A = {params.A!r}",
        f"g = {params.g!r}",
        "times = " + ",".join(f"{t:.17g}" for t in traj.times),
    ]
    side_rel = f"{stem}.info.txt"
    with open(os.path.join(outdir, side_rel), "w") as fh:
        fh.write("\n".join(sidecar) + "\n")
    written.append(side_rel)
    if traj.densities.size <= csv_limit:
        csv_rel = f"{stem}.csv"
        np.savetxt(os.path.join(outdir, csv_rel), traj.densities,
                   delimiter=",", fmt="%.17g")
        written.append(csv_rel)
    return written


def _schedule_for(config: ExperimentConfig, params: ScaledParams) -> ControlSchedule:
    name = {
        "bloch": "bloch", "free_split": "free_split", "shuttle": "shuttle",
        "bz_oscillation": "bloch", "bz_transport": "bz_transport",
        "beam_split_t2": "split_t2", "beam_split_t3": "split_t3",
        "beam_split_t4": "split_t4",
    }[config.experiment]
    n = config.n_repeats
    if config.experiment == "bz_oscillation" and config.n_repeats == 1:
        n = 2
    if config.experiment == "shuttle" and config.n_repeats == 1:
        n = 4
    return schedule_from_table(name, params, n)


def _propagation_config(config: ExperimentConfig, params: ScaledParams,
                        **kwargs) -> PropagationConfig:
    return PropagationConfig(dt=params.bloch_period() / config.dt_per_TB,
                             snapshot_stride=config.snapshot_stride, **kwargs)


def _sweep_point(args) -> tuple:
    """One sweep run; module-level so it can cross a process boundary."""
    (experiment, variable, value, params, grid, dt_per_TB) = args
    if variable == "eps":
        params = params.with_(eps=value)
    elif variable == "g":
        params = params.with_(g=value)
    T_B = params.bloch_period()
    dt = T_B / dt_per_TB
    width = GPE_PACKET_WIDTH if experiment == "gpe_g_sweep" else PACKET_WIDTH
    psi0 = make_gaussian(grid, width)
    sched = schedule_from_table("bloch", params, 1)
    if experiment == "eps_sweep":
        sched = sched.truncated(T_B / 2)
    elif variable == "V0":
        sched = sched.with_probe(PROBE_WINDOW[0] * T_B, PROBE_WINDOW[1] * T_B,
                                 PROBE_REGION[0], PROBE_REGION[1], value)
    cfg = PropagationConfig(dt=dt, snapshot_stride=10 ** 9,
                            moment_stride=10 ** 9)
    final = run(psi0, sched, cfg, params).final
    lower = interval_probability(final, *LOWER_BRANCH)
    upper = interval_probability(final, *UPPER_BRANCH)
    return value, lower, upper, final.absorbed_norm


def run_sweep(config: ExperimentConfig, params: ScaledParams,
              grid: SpatialGrid) -> dict:
    """All sweep points, keyed and ordered by parameter value."""
    spec = config.resolved_sweep()
    jobs = [(config.experiment, spec.variable, float(v), params, grid,
             config.dt_per_TB) for v in spec.values]
    workers = min(max(1, config.workers), len(jobs))
    if workers == 1:
        results = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    results.sort(key=lambda r: r[0])
    values, lowers, uppers, absorbed = map(np.asarray, zip(*results))
    return {spec.variable: values, "p_lower": lowers, "p_upper": uppers,
            "absorbed": absorbed}


def run_experiment(config: ExperimentConfig) -> RunManifest:
    """Execute one experiment and write its outputs plus a manifest."""
    t_start = time.time()
    params = config.resolved_params()
    grid = config.resolved_grid()
    outdir = config.outdir
    os.makedirs(outdir, exist_ok=True)
    files: list = []
    extras: dict = {}
    dt = params.bloch_period() / config.dt_per_TB
    complete = True

    try:
        if config.experiment == "tb_dispersion":
            rows = _tb_dispersion_table(params)
            rel = "tb_dispersion.csv"
            write_series_csv(os.path.join(outdir, rel), rows)
            _register(files, outdir, rel)
        elif config.experiment in SWEEP_EXPERIMENTS:
            data = run_sweep(config, params, grid)
            rel = f"{config.experiment}.csv"
            write_series_csv(os.path.join(outdir, rel), data)
            _register(files, outdir, rel)
            if config.experiment == "mzi_v0_sweep":
                fit = fringe_fit(data["V0"], data["p_upper"])
                extras.update({f"fringe_{k}": v for k, v in fit.items()})
        else:
            psi0 = make_gaussian(grid, PACKET_WIDTH)
            sched = _schedule_for(config, params)
            cfg = _propagation_config(config, params)
            traj = run(psi0, sched, cfg, params)
            m = dense_moments(traj)
            rel = "moments.csv"
            write_series_csv(os.path.join(outdir, rel), {
                "time": m.times, "mean_x": m.mean_x, "var_x": m.var_x,
                "norm_inside": m.norm_inside})
            _register(files, outdir, rel)
            for rel in write_density_map(outdir, "density", traj, params):
                _register(files, outdir, rel)
            extras["absorbed_final"] = traj.final.absorbed_norm
            if config.experiment == "beam_split_t2":
                extras["p_lower_branch"] = interval_probability(
                    traj.final, *SPLIT_T2_LOWER)
                extras["p_upper_branch"] = interval_probability(
                    traj.final, *SPLIT_T2_UPPER)
    except Exception:
        complete = False
        manifest = RunManifest(config.experiment, params, grid, dt,
                               _pkg_version, time.time() - t_start, files,
                               complete=False, extras=extras)
        manifest.write(outdir)
        raise

    manifest = RunManifest(config.experiment, params, grid, dt, _pkg_version,
                           time.time() - t_start, files, complete=complete,
                           extras=extras)
    manifest.write(outdir)
    return manifest


def _tb_dispersion_table(params: ScaledParams) -> dict:
    """Shuttle dispersion of the tight-binding model: exact propagation vs
    the closed-form moments and the leading-order law, for a grid of widths
    and period counts."""
    sigmas, periods = (10.0, 20.0, 40.0), (1, 2, 3, 4)
    cols = {k: [] for k in ("sigma_n", "n_periods", "oracle_growth",
                            "closed_form_growth", "leading_order_growth")}
    F0 = 0.0044 if params.F == 0 else 4.0 * abs(params.F)
    delta = 1.0
    d = 2.0 * np.pi
    travel = 2.0 * delta / (F0 * d) * max(periods)   # shuttle drift in sites
    for sigma in sigmas:
        n_sites = min(2 * int(10 * sigma + travel + 50) + 1, 4095)
        if n_sites % 2 == 0:
            n_sites += 1
        state = TBGaussian(sigma_n=sigma, n_sites=n_sites)
        model = TBModel(delta=delta, hbar=params.hbar,
                        f_profile=shuttle_profile(F0, params.hbar, max(periods)),
                        n_sites=n_sites)
        T_B = model.bloch_period()
        n2_0 = tb_moments(state.c.astype(complex), model.sites)[1]
        for n in periods:
            c = tb_oracle(model, state, n * T_B)
            mn, mn2 = tb_moments(c, model.sites)
            ln, ln2 = lie_moments(model, state, n * T_B)
            cols["sigma_n"].append(sigma)
            cols["n_periods"].append(n)
            cols["oracle_growth"].append((mn2 - mn ** 2) - n2_0)
            cols["closed_form_growth"].append((ln2 - ln ** 2) - n2_0)
            cols["leading_order_growth"].append(
                dispersion_law(model, model.d * sigma, n) / model.d ** 2)
    return cols
