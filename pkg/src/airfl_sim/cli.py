"""Command-line entry point: config-driven, reproducible experiment runs.

Every command is a pure function of (config file, flags): equal inputs give
byte-identical outputs at any worker count.  Exit codes: 0 success, 1
self-check failure, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

import numpy as np

from .analysis import convergence_bound
from .channel import draw_geometry
from .config import (ConfigError, ExperimentConfig, parse_config,
                     train_setup_from)
from .harness import (CASE_REGISTRY, estimate_coefficient_moments, sweep)
from .results import (MOMENTS_COLUMNS, moments_rows, write_csv, write_mse_table,
                      write_sidecar, write_trace)
from .rngstream import derive_stream
from .schemes import PROPOSED_SCHEMES
from .training import measure_assumption_constants, train

CHECK_Z_LIMIT = 4.0


def _resolve_workers(args, config: ExperimentConfig) -> int:
    if args.workers is not None:
        return args.workers
    if config.workers is not None:
        return config.workers
    env = os.environ.get("AIRFL_SIM_WORKERS")
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise ConfigError(f"AIRFL_SIM_WORKERS: not an integer: {env!r}") \
                from exc
    return os.cpu_count() or 1


def _common(config: ExperimentConfig, args):
    out_dir = args.out or config.output_dir
    trials = args.trials or config.trials
    workers = _resolve_workers(args, config)
    return out_dir, trials, workers


def _config_snapshot(config: ExperimentConfig) -> dict:
    return dataclasses.asdict(config)


def cmd_moments(config: ExperimentConfig, args) -> int:
    out_dir, trials, workers = _common(config, args)
    rows, worst = [], 0.0
    for name in config.schemes:
        scheme, policy = CASE_REGISTRY[name]
        est = estimate_coefficient_moments(
            config.system, _betas(config), scheme, policy, trials,
            config.seed, workers=workers, lambda_scale=config.lambda_scale)
        for row in moments_rows(name, est):
            rows.append(row)
        zs = [e.z_score for e in est.targets + est.target_vars
              + est.interferers + est.interferer_vars
              if e.z_score is not None]
        if zs:
            worst = max(worst, max(abs(z) for z in zs))
    path = os.path.join(out_dir, "moments.csv")
    write_csv(path, MOMENTS_COLUMNS, rows)
    write_sidecar(os.path.join(out_dir, "moments.json"),
                  {"config": _config_snapshot(config), "trials": trials,
                   "worst_abs_z": worst})
    print(f"wrote {path} (worst |z| = {worst:.2f})")
    if args.check and worst > CHECK_Z_LIMIT:
        print(f"check FAILED: |z| {worst:.2f} > {CHECK_Z_LIMIT}",
              file=sys.stderr)
        return 1
    return 0


def _betas(config: ExperimentConfig) -> np.ndarray:
    return draw_geometry(config.system, derive_stream(
        config.seed, ("geom", config.system.n_devices)))


def cmd_mse_sweep(config: ExperimentConfig, args) -> int:
    out_dir, trials, workers = _common(config, args)
    if config.sweep_axis is None:
        raise ConfigError("mse-sweep needs a 'sweep' section in the config")
    train_setup = None
    if config.gradients.source == "recorded_training":
        train_setup = train_setup_from(config, "ideal", config.seed)
    table = sweep(config.sweep_axis, config.sweep_values, config.system,
                  list(config.schemes), trials, config.seed, workers=workers,
                  grad_dim=config.gradients.dim,
                  grad_power=config.gradients.power,
                  grad_cross_correlation=config.gradients.cross_correlation,
                  interference_mode=config.interference_mode,
                  grad_source=config.gradients.source,
                  train_setup=train_setup,
                  recorded_rounds=config.gradients.recorded_rounds)
    table.metadata["config"] = _config_snapshot(config)
    path = os.path.join(out_dir, "mse_sweep.csv")
    write_mse_table(table, path)
    print(f"wrote {path}")
    return 0


def cmd_train(config: ExperimentConfig, args) -> int:
    out_dir, _, _ = _common(config, args)
    seeds = args.seeds or list(config.train.seeds)
    summary = []
    for name in config.train.aggregators:
        finals = []
        for seed in seeds:
            setup = train_setup_from(config, name, seed)
            trace = train(setup)
            path = os.path.join(out_dir, f"trace_{name}_seed{seed}.csv")
            write_trace(trace, path)
            print(f"wrote {path} (final accuracy "
                  f"{trace.final_accuracy:.4f})")
            finals.append(trace.final_accuracy)
        finals = np.asarray(finals)
        sd = float(finals.std(ddof=1)) if finals.size > 1 else 0.0
        summary.append((name, float(finals.mean()), sd, len(seeds)))
    write_csv(os.path.join(out_dir, "train_summary.csv"),
              ("aggregator", "final_accuracy_mean", "final_accuracy_sd",
               "seeds"), summary)
    write_sidecar(os.path.join(out_dir, "train_summary.json"),
                  {"config": _config_snapshot(config), "seeds": seeds})
    return 0


def cmd_bound(config: ExperimentConfig, args) -> int:
    out_dir, _, _ = _common(config, args)
    setup = train_setup_from(config, "ideal", config.seed)
    consts = measure_assumption_constants(
        setup, rounds=config.bound_pilot_rounds)
    system = dataclasses.replace(config.system, G=consts["grad_bound"])
    betas = _betas(config)
    payload = {"inputs": consts, "T": config.bound_T,
               "config": _config_snapshot(config), "schemes": {}}
    for scheme in PROPOSED_SCHEMES:
        cb = convergence_bound(
            scheme, system, betas, L=max(consts["L"], 1e-9),
            xi=consts["xi"], chi2=max(consts["chi2"], 1e-12),
            T=config.bound_T, f_gap=consts["f_gap"], dim=consts["dim"])
        payload["schemes"][scheme] = {
            "varpi": cb.varpi, "epsilon_bias": cb.epsilon_bias,
            "bound_at_T": cb.bound_at_T}
    path = os.path.join(out_dir, "bound.json")
    write_sidecar(path, payload)
    print(f"wrote {path}")
    return 0


def _parse_seeds(text: str) -> list[int]:
    try:
        return [int(s) for s in text.split(",") if s]
    except ValueError as exc:
        raise ConfigError(f"--seeds: not a comma-separated integer list: "
                          f"{text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="airfl-sim",
        description="Interference-robust over-the-air FL simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("moments", cmd_moments), ("mse-sweep", cmd_mse_sweep),
                     ("train", cmd_train), ("bound", cmd_bound)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="experiment JSON file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--seeds", default=None, type=_parse_seeds,
                       help="comma-separated seed list (train)")
        p.add_argument("--trials", default=None, type=int,
                       help="Monte Carlo trials override")
        p.add_argument("--workers", default=None, type=int,
                       help="worker processes (default: machine parallelism, "
                            "env AIRFL_SIM_WORKERS)")
        p.add_argument("--check", action="store_true",
                       help="exit 1 when a self-check fails")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = parse_config(args.config)
        return args.fn(config, args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
