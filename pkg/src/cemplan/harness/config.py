"""Experiment configuration: variants, per-environment defaults, overrides."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from cemplan.harness.budgets import FAMILY_GAMMA, budget_to_schedule, schedule_family
from cemplan.optimizer import OptimizerConfig
from cemplan.planner import PlannerConfig

VARIANTS = ("icem", "cem", "cem_mpc", "cem_pets")

# noise exponent per environment: low for high-frequency control, high for
# coarse positioning tasks
ENV_BETA = {
    "point_mass_sparse": 2.5,
    "integrator": 2.0,
    "pendulum": 0.25,
}

# flag bundles that define each variant; N/iterations come from the budget
_VARIANT_FLAGS: dict[str, dict[str, Any]] = {
    "icem": dict(
        colored_noise=True, keep_elites=True, shift_elites=True, decay=True,
        clip_sampling=True, best_action=True, add_mean_last_iter=True,
        alpha=0.1, elite_fraction=0.3,
    ),
    "cem": dict(truncated_sampling=True, alpha=0.0, elite_fraction=0.0),
    "cem_mpc": dict(truncated_sampling=True, alpha=0.1, elite_fraction=0.0),
    "cem_pets": dict(
        truncated_sampling=True, pets_sigma=True, alpha=0.1, elite_fraction=0.0
    ),
}

# only the vanilla method re-initializes the mean from scratch every step
_SHIFT_INIT = {"icem": True, "cem": False, "cem_mpc": True, "cem_pets": True}

OPTIMIZER_FLAG_NAMES = (
    "colored_noise", "keep_elites", "shift_elites", "decay", "clip_sampling",
    "best_action", "add_mean_last_iter", "pets_sigma", "truncated_sampling",
)


def build_planner_config(
    variant: str,
    env_name: str,
    budget: int,
    horizon: int = 30,
    beta: float | None = None,
    overrides: dict[str, Any] | None = None,
) -> PlannerConfig:
    """Assemble the full planner configuration for one sweep cell.

    ``overrides`` may set any OptimizerConfig field plus ``shift_init``;
    they are applied last, after the variant preset and the budget schedule.
    """
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}; choose from {VARIANTS}")
    iterations, num_samples = budget_to_schedule(budget, variant)
    family = schedule_family(variant)
    kwargs: dict[str, Any] = dict(
        num_samples=num_samples,
        iterations=iterations,
        elites=10,
        sigma_init=0.5,
        gamma=FAMILY_GAMMA[family],
        beta=beta if beta is not None else ENV_BETA.get(env_name, 2.0),
    )
    kwargs.update(_VARIANT_FLAGS[variant])
    shift_init = _SHIFT_INIT[variant]
    overrides = dict(overrides or {})
    if "shift_init" in overrides:
        shift_init = bool(overrides.pop("shift_init"))
    valid = {f.name for f in dataclasses.fields(OptimizerConfig)}
    unknown = set(overrides) - valid
    if unknown:
        raise ValueError(f"unknown optimizer overrides: {sorted(unknown)}")
    kwargs.update(overrides)
    return PlannerConfig(opt=OptimizerConfig(**kwargs), horizon=horizon, shift_init=shift_init)


@dataclass
class ExperimentConfig:
    """One harness invocation: which cells to run and where results go."""

    env: str = "point_mass_sparse"
    variants: list[str] = field(default_factory=lambda: ["icem"])
    budgets: list[int] = field(default_factory=lambda: [100])
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    episode_len: int = 30
    horizon: int = 30
    beta: float | None = None
    overrides: dict[str, Any] = field(default_factory=dict)
    out: Path | None = None
    jobs: int = 1
    figures: bool = True

    def __post_init__(self):
        self.variants = list(self.variants)
        self.budgets = [int(b) for b in self.budgets]
        self.seeds = [int(s) for s in self.seeds]
        if self.out is not None:
            self.out = Path(self.out)
        if self.episode_len < 1:
            raise ValueError("episode_len must be >= 1")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


def load_config_file(path: str | Path) -> dict[str, Any]:
    """Read a config mapping (YAML: hierarchical key/value text)."""
    with open(path) as handle:
        data = yaml.safe_load(handle) or {}
    if not isinstance(data, dict):
        raise ValueError(f"config file {path} must contain a mapping")
    if "variant" in data and "variants" not in data:
        data["variants"] = [data.pop("variant")]
    return data
