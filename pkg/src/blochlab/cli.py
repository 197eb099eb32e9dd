"""Command-line interface.

Subcommands:
    run <config-file> [--verify]   run an experiment from a config file
    bands --eps V [--hbar V] --out CSV   export a dispersion table
    tb-check                       tight-binding closed form vs exact
    accept [--quick]               acceptance battery, PASS/FAIL table
    presets                        list experiments and schedule presets

Config files are plain text, one `key = value` per line, `#` comments,
section headers in square brackets.  Recognized keys:

    experiment, dt_per_TB          (top level, before any section)
    [params]   hbar, F, eps, g, A
    [grid]     n_points, x_min, x_max
    [sweep]    variable, start, stop, n
    [output]   dir, stride

Unknown keys are errors (reported with their line number).  Exit codes:
0 success, 1 usage/config error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .acceptance import Battery
from .bands import BlochProblem, CutoffError, solve_bands
from .experiments import (EXPERIMENTS, ExperimentConfig, SweepSpec,
                          run_experiment, verify_manifest)
from .model import GridError, ScaledParams, SpatialGrid
from .observables import FitError
from .propagate import PropagationError
from .schedules import PRESET_NAMES, ScheduleError
from .tightbinding import (TBGaussian, TBModel, constant_profile,
                           flip_profile, lie_moments, shuttle_profile,
                           tb_moments, tb_oracle)


class ConfigError(ValueError):
    pass


_SECTIONS = {
    None: {"experiment": str, "dt_per_TB": int},
    "params": {"hbar": float, "F": float, "eps": float, "g": float,
               "A": float},
    "grid": {"n_points": int, "x_min": float, "x_max": float},
    "sweep": {"variable": str, "start": float, "stop": float, "n": int},
    "output": {"dir": str, "stride": int},
}


def parse_config(path: str) -> dict:
    """Parse the key = value format into {section: {key: value}}."""
    out = {sec: {} for sec in _SECTIONS}
    section = None
    with open(path) as fh:
        lines = fh.readlines()
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip()
            if section not in _SECTIONS or section is None:
                raise ConfigError(f"{path}:{lineno}: unknown section "
                                  f"[{section}]")
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        allowed = _SECTIONS[section]
        if key not in allowed:
            where = f"[{section}]" if section else "top level"
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r} in "
                              f"{where}")
        try:
            out[section][key] = allowed[key](value)
        except ValueError as err:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: "
                              f"{err}") from err
    return out


def config_to_experiment(cfg: dict) -> ExperimentConfig:
    top = cfg[None]
    if "experiment" not in top:
        raise ConfigError("config is missing the 'experiment' key")
    par = cfg["params"]
    params = ScaledParams(hbar=par.get("hbar", ScaledParams.hbar),
                          F=par.get("F", ScaledParams.F),
                          eps=par.get("eps", 0.0),
                          A=par.get("A", 1.0),
                          g=par.get("g", 0.0))
    grid = None
    if cfg["grid"]:
        g = cfg["grid"]
        missing = {"n_points", "x_min", "x_max"} - set(g)
        if missing:
            raise ConfigError(f"[grid] section needs {sorted(missing)}")
        grid = SpatialGrid(g["n_points"], g["x_min"], g["x_max"])
    sweep = None
    if cfg["sweep"]:
        s = cfg["sweep"]
        missing = {"variable", "start", "stop", "n"} - set(s)
        if missing:
            raise ConfigError(f"[sweep] section needs {sorted(missing)}")
        sweep = SweepSpec(s["variable"], s["start"], s["stop"], s["n"])
    out = cfg["output"]
    return ExperimentConfig(
        experiment=top["experiment"],
        params=params,
        grid=grid,
        dt_per_TB=top.get("dt_per_TB", 8192),
        sweep=sweep,
        outdir=out.get("dir", "out"),
        snapshot_stride=out.get("stride", 512),
    )


def _cmd_run(args) -> int:
    cfg = config_to_experiment(parse_config(args.config))
    if args.verify:
        problems = verify_manifest(cfg.outdir)
        for p in problems:
            print(p, file=sys.stderr)
        print(f"verify: {'ok' if not problems else 'MISMATCH'} "
              f"({cfg.outdir})")
        return 0 if not problems else 2
    manifest = run_experiment(cfg)
    print(f"{cfg.experiment}: wrote {len(manifest.files)} files to "
          f"{cfg.outdir} in {manifest.wall_time:.1f}s")
    for key, value in sorted(manifest.extras.items()):
        print(f"  {key} = {value}")
    return 0


def _cmd_bands(args) -> int:
    params = ScaledParams(hbar=args.hbar, F=ScaledParams.F, eps=args.eps)
    problem = BlochProblem(params=params, plane_wave_cutoff=48, n_kappa=512)
    table = solve_bands(problem, n_bands=args.n_bands)
    table.to_csv(args.out)
    print(f"wrote {args.out}: {table.kappa.size} kappa points x "
          f"{table.n_bands} bands; edge gap {table.edge_gap():.6g}, "
          f"E1_bar - E0_bar {table.miniladder_offset_gap():.6g}")
    return 0


def _cmd_tb_check(args) -> int:
    hbar, F0 = 2.828, 0.0044
    T_B = 2 * np.pi * hbar / (2 * np.pi * F0)
    state = TBGaussian(sigma_n=10.0, n_sites=1601)
    worst = 0.0
    print(f"{'profile':10s} {'t/T_B':>6s} {'<N> closed':>14s} "
          f"{'<N> exact':>14s} {'rel err N^2':>12s}")
    for name, prof in (("constant", constant_profile(F0, 3.5 * T_B)),
                       ("flip", flip_profile(F0, 0.7 * T_B, 3.5 * T_B)),
                       ("shuttle", shuttle_profile(F0, hbar, 4))):
        model = TBModel(delta=1.0, hbar=hbar, f_profile=prof, n_sites=1601)
        for t in (0.5 * T_B, T_B, 3 * T_B):
            ln, ln2 = lie_moments(model, state, t)
            c = tb_oracle(model, state, t)
            on, on2 = tb_moments(c, model.sites)
            rel = abs(ln2 - on2) / abs(on2)
            worst = max(worst, rel)
            print(f"{name:10s} {t / T_B:6.1f} {ln:14.6e} {on:14.6e} "
                  f"{rel:12.2e}")
    print(f"worst relative error: {worst:.2e}")
    return 0 if worst <= 1e-8 else 2


def _cmd_accept(args) -> int:
    battery = Battery(quick=args.quick)
    results = battery.run_all()
    n_pass = sum(r.passed for r in results)
    known = sum((not r.passed) and r.expected_fail for r in results)
    unexpected = sum((not r.passed) and not r.expected_fail for r in results)
    print(f"\n{n_pass}/{len(results)} checks passed"
          + (f", {known} known deviations" if known else "")
          + (f", {unexpected} UNEXPECTED failures" if unexpected else ""))
    return 0 if unexpected == 0 and n_pass + known == len(results) else 2


def _cmd_presets(args) -> int:
    print("experiments:")
    for name in EXPERIMENTS:
        print(f"  {name}")
    print("schedule presets:")
    for name in PRESET_NAMES:
        print(f"  {name}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blochlab",
        description="Matter-wave dynamics in tilted optical lattices")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--verify", action="store_true",
                       help="recompute checksums of an existing output dir")
    p_run.set_defaults(func=_cmd_run)

    p_bands = sub.add_parser("bands", help="export a dispersion table as CSV")
    p_bands.add_argument("--eps", type=float, required=True)
    p_bands.add_argument("--hbar", type=float, default=ScaledParams.hbar)
    p_bands.add_argument("--n-bands", type=int, default=4)
    p_bands.add_argument("--out", required=True)
    p_bands.set_defaults(func=_cmd_bands)

    p_tb = sub.add_parser("tb-check", help="tight-binding closed form vs "
                          "exact propagation")
    p_tb.set_defaults(func=_cmd_tb_check)

    p_acc = sub.add_parser("accept", help="run the acceptance battery")
    p_acc.add_argument("--quick", action="store_true",
                       help="coarser stepping and smaller sweeps")
    p_acc.set_defaults(func=_cmd_accept)

    p_pre = sub.add_parser("presets", help="list experiments and presets")
    p_pre.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 1 if err.code not in (0, None) else 0
    try:
        return args.func(args)
    except (ConfigError, ScheduleError, GridError, ValueError,
            FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except (PropagationError, CutoffError, FitError,
            FloatingPointError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
