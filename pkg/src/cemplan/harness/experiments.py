"""Experiment orchestration: budget sweeps, ablations, action-spectrum analysis.

Sweep cells, one per (variant, budget, seed), are independent jobs keyed and
seeded by their own coordinates, so they can run in any order or in a worker
pool and still merge into identical results.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from cemplan import noise
from cemplan.envs import make_env
from cemplan.harness.budgets import FAMILY_GAMMA, budget_to_schedule, schedule_family, solve_num_samples
from cemplan.harness.config import (
    OPTIMIZER_FLAG_NAMES,
    ExperimentConfig,
    build_planner_config,
)
from cemplan.harness.csvio import SweepRow
from cemplan.planner import EpisodeRecord, run_episode

ABLATION_FEATURES = (
    "colored_noise",
    "keep_elites",
    "shift_elites",
    "decay",
    "clip_sampling",
    "best_action",
    "add_mean_last_iter",
)


@dataclass(frozen=True)
class SweepCell:
    env: str
    variant: str  # base variant or an ablation label like "icem-decay"
    budget: int
    seed: int
    episode_len: int
    horizon: int
    beta: float | None
    overrides: tuple  # sorted (key, value) pairs; hashable for pool dispatch

    def sort_key(self):
        return (self.env, self.variant, self.budget, self.seed)


def _apply_feature(variant: str, feature: str, enable: bool, kwargs: dict[str, Any]) -> None:
    """Toggle one named feature on a variant's optimizer overrides.

    Most features are plain flags.  Two need coupled changes: colored noise
    rides on the clipped-sampling path, and population decay is only
    meaningful with gamma > 1, so those are switched together.
    """
    if feature == "colored_noise":
        if enable:
            kwargs.update(colored_noise=True, clip_sampling=True, truncated_sampling=False)
        else:
            # keep the sampling path, force the exponent to white
            kwargs.update(beta=0.0)
    elif feature == "clip_sampling":
        if enable:
            kwargs.update(clip_sampling=True, truncated_sampling=False)
        else:
            kwargs.update(
                clip_sampling=False, truncated_sampling=True, colored_noise=False,
                pets_sigma=False,
            )
    elif feature == "decay":
        kwargs.update(decay=enable, gamma=1.25 if enable else 1.0)
    elif feature in OPTIMIZER_FLAG_NAMES:
        kwargs[feature] = enable
    else:
        raise ValueError(
            f"unknown ablation feature {feature!r}; valid: {sorted(ABLATION_FEATURES)}"
        )
    if feature in ("keep_elites", "shift_elites") and enable:
        kwargs.setdefault("elite_fraction", 0.3)


def ablation_variants(features: list[str]) -> dict[str, tuple[str, dict[str, Any]]]:
    """Two ablation families: the full variant minus one feature each, and the
    baseline plus one feature each.  Returns label -> (base variant, overrides).
    """
    for feature in features:
        if feature not in ABLATION_FEATURES:
            raise ValueError(
                f"unknown ablation feature {feature!r}; valid: {sorted(ABLATION_FEATURES)}"
            )
    table: dict[str, tuple[str, dict[str, Any]]] = {
        "icem": ("icem", {}),
        "cem_mpc": ("cem_mpc", {}),
    }
    for feature in features:
        minus: dict[str, Any] = {}
        _apply_feature("icem", feature, False, minus)
        table[f"icem-{feature}"] = ("icem", minus)
        plus: dict[str, Any] = {}
        _apply_feature("cem_mpc", feature, True, plus)
        table[f"cem_mpc+{feature}"] = ("cem_mpc", plus)
    return table


def _resolve_schedule_overrides(base_variant: str, budget: int, overrides: dict[str, Any]) -> dict[str, Any]:
    """Re-solve (iterations, N) when an ablation changes the decay dynamics,
    so ablated variants still honor the trajectory budget.
    """
    overrides = dict(overrides)
    if "decay" not in overrides and "gamma" not in overrides:
        return overrides
    iterations, _ = budget_to_schedule(budget, base_variant)
    gamma = overrides.get("gamma", FAMILY_GAMMA[schedule_family(base_variant)])
    effective = gamma if overrides.get("decay", True) else 1.0
    overrides["num_samples"] = solve_num_samples(budget, iterations, effective)
    overrides["iterations"] = iterations
    return overrides


def run_cell(cell: SweepCell) -> SweepRow:
    """Execute one experiment cell; failures are recorded, not raised."""
    try:
        base_variant, base_overrides = cell.variant, {}
        if cell.variant not in ("icem", "cem", "cem_mpc", "cem_pets"):
            table = ablation_variants(list(ABLATION_FEATURES))
            if cell.variant not in table:
                raise ValueError(f"unknown variant {cell.variant!r}")
            base_variant, base_overrides = table[cell.variant]
        overrides = {**base_overrides, **dict(cell.overrides)}
        overrides = _resolve_schedule_overrides(base_variant, cell.budget, overrides)
        cfg = build_planner_config(
            base_variant, cell.env, cell.budget, horizon=cell.horizon,
            beta=cell.beta, overrides=overrides,
        )
        env = make_env(cell.env)
        record = run_episode(env, cfg, cell.episode_len, cell.seed)
        return SweepRow(
            env=cell.env,
            variant=cell.variant,
            budget=cell.budget,
            seed=cell.seed,
            steps=cell.episode_len,
            cumulative_reward=record.cumulative_reward,
            success=record.success,
            total_evaluations=int(record.evaluations_per_step.sum()),
        )
    except Exception as exc:  # partial failures land in the row
        return SweepRow(
            env=cell.env, variant=cell.variant, budget=cell.budget, seed=cell.seed,
            steps=cell.episode_len, cumulative_reward=float("nan"), success=False,
            total_evaluations=0, error=f"{type(exc).__name__}: {exc}",
        )


def _run_cells(cells: list[SweepCell], jobs: int) -> list[SweepRow]:
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(cell) for cell in cells]
    keyed = sorted(zip(cells, rows), key=lambda pair: pair[0].sort_key())
    return [row for _, row in keyed]


def _cells_for(cfg: ExperimentConfig, variants: list[str]) -> list[SweepCell]:
    overrides = tuple(sorted(cfg.overrides.items()))
    return [
        SweepCell(
            env=cfg.env, variant=variant, budget=budget, seed=seed,
            episode_len=cfg.episode_len, horizon=cfg.horizon, beta=cfg.beta,
            overrides=overrides,
        )
        for variant in variants
        for budget in cfg.budgets
        for seed in cfg.seeds
    ]


def run_budget_sweep(cfg: ExperimentConfig) -> list[SweepRow]:
    """One episode per (variant, budget, seed); rows sorted by cell key."""
    return _run_cells(_cells_for(cfg, cfg.variants), cfg.jobs)


def run_ablation(cfg: ExperimentConfig, features: list[str]) -> list[SweepRow]:
    """Sweep the two ablation families plus their baselines."""
    labels = list(ablation_variants(features))
    return _run_cells(_cells_for(cfg, labels), cfg.jobs)


@dataclass
class PsdAnalysis:
    spectra: dict[int, noise.SpectrumEstimate]  # per action dimension
    exponents: list[float]
    mean_exponent: float


def analyze_action_psd(record: EpisodeRecord) -> PsdAnalysis:
    """Periodogram and fitted exponent of each executed action dimension."""
    actions = np.asarray(record.actions)
    if len(actions) < 16:
        raise ValueError(f"episode too short for spectral analysis: {len(actions)} < 16")
    spectra = {dim: noise.estimate_psd(actions[:, dim]) for dim in range(actions.shape[1])}
    exponents = [noise.fit_spectral_exponent(spectra[dim]) for dim in spectra]
    return PsdAnalysis(spectra, exponents, float(np.mean(exponents)))


def run_white_policy_episode(env, episode_len: int, seed: int, scale: float = 0.5) -> EpisodeRecord:
    """Reference policy with i.i.d. Gaussian actions (clipped); gives the
    white-spectrum baseline for executed-action analysis.
    """
    env_seed, policy_seed = np.random.SeedSequence(seed).spawn(2)
    state = env.reset(np.random.default_rng(env_seed))
    rng = np.random.default_rng(policy_seed)
    bounds = env.action_bounds
    states = [env.clone_state(state)]
    actions, rewards = [], []
    for _ in range(episode_len):
        action = np.clip(
            scale * rng.standard_normal(bounds.dims), bounds.lower, bounds.upper
        )
        next_state = env.step(state, action)
        rewards.append(float(env.reward(state, action, next_state)))
        actions.append(action)
        state = next_state
        states.append(env.clone_state(state))
    states = np.asarray(states)
    return EpisodeRecord(
        states=states,
        actions=np.asarray(actions),
        rewards=np.asarray(rewards),
        cumulative_reward=float(np.sum(rewards)),
        success=env.episode_success(states),
        evaluations_per_step=np.zeros(episode_len, dtype=int),
    )
