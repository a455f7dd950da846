"""Command-line entry point.

Subcommands: sweep (budget sweeps), ablate (feature ablations), psd
(executed-action spectrum analysis), episode (single rollout dump).  Flags
override config-file values, which override the defaults.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from cemplan.envs import make_env
from cemplan.harness import csvio, plots
from cemplan.harness.config import ExperimentConfig, build_planner_config, load_config_file
from cemplan.harness.experiments import (
    ABLATION_FEATURES,
    analyze_action_psd,
    run_ablation,
    run_budget_sweep,
    run_white_policy_episode,
)
from cemplan.planner import run_episode


def parse_int_list(text: str) -> list[int]:
    """Accept '1,2,3' and 'a:b' ranges (half-open), possibly mixed."""
    values: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if ":" in part:
            start, stop = part.split(":")
            values.extend(range(int(start), int(stop)))
        elif part:
            values.append(int(part))
    if not values:
        raise argparse.ArgumentTypeError(f"no integers in {text!r}")
    return values


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="YAML config file; flags override it")
    parser.add_argument("--env", help="environment id (default point_mass_sparse)")
    parser.add_argument("--variant", help="comma-separated variant names")
    parser.add_argument("--budget", "--budgets", dest="budgets", type=parse_int_list,
                        help="per-step trajectory budgets, e.g. 50,100,300")
    parser.add_argument("--seeds", type=parse_int_list, help="e.g. 0:50 or 1,2,3")
    parser.add_argument("--seed", type=int, help="single seed (episode/psd)")
    parser.add_argument("--episode-len", "-T", type=int, help="environment steps per episode")
    parser.add_argument("--horizon", type=int, help="planning horizon")
    parser.add_argument("--beta", type=float, help="noise exponent override")
    parser.add_argument("--out", type=Path, help="output CSV path")
    parser.add_argument("--jobs", type=int, help="worker processes for sweep cells")
    parser.add_argument("--no-figures", action="store_true", help="skip PNG rendering")


def build_experiment_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        values.update(load_config_file(args.config))
    if args.env:
        values["env"] = args.env
    if args.variant:
        values["variants"] = [v.strip() for v in args.variant.split(",")]
    if args.budgets:
        values["budgets"] = args.budgets
    if args.seeds:
        values["seeds"] = args.seeds
    elif args.seed is not None:
        values["seeds"] = [args.seed]
    if args.episode_len:
        values["episode_len"] = args.episode_len
    if args.horizon:
        values["horizon"] = args.horizon
    if args.beta is not None:
        values["beta"] = args.beta
    if args.out:
        values["out"] = args.out
    if args.jobs:
        values["jobs"] = args.jobs
    if args.no_figures:
        values["figures"] = False
    return ExperimentConfig(**values)


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = build_experiment_config(args)
    rows = run_budget_sweep(cfg)
    print(csvio.summarize_sweep(rows), end="")
    if cfg.out:
        csvio.write_sweep_csv(rows, cfg.out)
        print(f"wrote {cfg.out}")
        if cfg.figures:
            print(f"wrote {plots.plot_sweep(rows, cfg.out)}")
    return 0


def cmd_ablate(args: argparse.Namespace) -> int:
    cfg = build_experiment_config(args)
    features = (
        [f.strip() for f in args.features.split(",")]
        if args.features
        else list(ABLATION_FEATURES)
    )
    rows = run_ablation(cfg, features)
    print(csvio.summarize_sweep(rows), end="")
    if cfg.out:
        csvio.write_sweep_csv(rows, cfg.out)
        print(f"wrote {cfg.out}")
        if cfg.figures:
            print(f"wrote {plots.plot_ablation(rows, cfg.out)}")
    return 0


def cmd_psd(args: argparse.Namespace) -> int:
    cfg = build_experiment_config(args)
    variant = cfg.variants[0]
    seed = cfg.seeds[0]
    episode_len = max(cfg.episode_len, 16)
    env = make_env(cfg.env)
    if variant == "random":
        record = run_white_policy_episode(env, episode_len, seed)
    else:
        planner_cfg = build_planner_config(
            variant, cfg.env, cfg.budgets[0], horizon=cfg.horizon,
            beta=cfg.beta, overrides=cfg.overrides,
        )
        record = run_episode(env, planner_cfg, episode_len, seed)
    analysis = analyze_action_psd(record)
    for dim, exponent in enumerate(analysis.exponents):
        print(f"dim {dim}: fitted exponent {exponent:+.3f}")
    print(f"mean fitted exponent: {analysis.mean_exponent:+.3f}")
    if cfg.out:
        csvio.write_psd_csv(analysis.spectra, analysis.exponents, cfg.out)
        print(f"wrote {cfg.out}")
        if cfg.figures:
            print(f"wrote {plots.plot_psd(analysis, cfg.out)}")
    return 0


def cmd_episode(args: argparse.Namespace) -> int:
    cfg = build_experiment_config(args)
    env = make_env(cfg.env)
    planner_cfg = build_planner_config(
        cfg.variants[0], cfg.env, cfg.budgets[0], horizon=cfg.horizon,
        beta=cfg.beta, overrides=cfg.overrides,
    )
    record = run_episode(env, planner_cfg, cfg.episode_len, cfg.seeds[0])
    print(
        f"episode: reward {record.cumulative_reward:.2f}, success {record.success}, "
        f"evaluations {int(record.evaluations_per_step.sum())}"
    )
    if cfg.out:
        csvio.write_episode_csv(record, cfg.out)
        print(f"wrote {cfg.out}")
        if cfg.figures:
            print(f"wrote {plots.plot_episode(record, cfg.out)}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="cemplan",
        description="Sampling-based trajectory optimization experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a (variant x budget x seed) sweep")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_ablate = sub.add_parser("ablate", help="feature ablations around the two baselines")
    _add_common(p_ablate)
    p_ablate.add_argument("--features", help=f"comma list from {sorted(ABLATION_FEATURES)}")
    p_ablate.set_defaults(func=cmd_ablate)

    p_psd = sub.add_parser("psd", help="spectrum of executed actions over one episode")
    _add_common(p_psd)
    p_psd.set_defaults(func=cmd_psd)

    p_episode = sub.add_parser("episode", help="run and dump a single episode")
    _add_common(p_episode)
    p_episode.set_defaults(func=cmd_episode)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
