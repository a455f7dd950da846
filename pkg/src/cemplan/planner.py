"""Receding-horizon planning loop.

Each environment step warm-starts the sampling distribution (shifted
previous mean when configured), carries a fraction of the previous elite
set forward with fresh terminal actions, runs one full optimization against
ground-truth rollouts of the model, and executes either the first action of
the best evaluated sequence or the first mean action.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from cemplan.optimizer import (
    ActionBounds,
    EliteSet,
    OptimizationResult,
    OptimizerConfig,
    SamplingDistribution,
    ceil_fraction,
    run_optimization,
)


class PlanStepError(RuntimeError):
    """A model failure during planning, annotated with the step index."""


@dataclass(frozen=True)
class PlannerConfig:
    """Optimizer settings plus the outer-loop switches."""

    opt: OptimizerConfig
    horizon: int = 30
    shift_init: bool = True  # warm-start the mean from the previous step

    def __post_init__(self):
        if self.horizon < 2:
            raise ValueError(f"horizon must be >= 2, got {self.horizon}")


@dataclass
class PlannerState:
    """Cross-step memory; empty at step 0."""

    prev_mean: np.ndarray | None = None
    prev_elites: EliteSet | None = None
    step_index: int = 0


@dataclass
class EpisodeRecord:
    states: np.ndarray  # (T + 1, state_dim)
    actions: np.ndarray  # (T, action_dim)
    rewards: np.ndarray  # (T,)
    cumulative_reward: float
    success: bool
    evaluations_per_step: np.ndarray  # (T,)


def shift_mean(prev: np.ndarray) -> np.ndarray:
    """Drop the first column and repeat the last one."""
    prev = np.asarray(prev, dtype=float)
    if prev.ndim != 2 or prev.shape[1] < 2:
        raise ValueError(f"need a (dims, horizon >= 2) matrix, got {prev.shape}")
    return np.concatenate([prev[:, 1:], prev[:, -1:]], axis=1)


def shift_elites(
    elites: EliteSet,
    rng: np.random.Generator,
    cfg: PlannerConfig,
    bounds: ActionBounds,
) -> np.ndarray:
    """Carry the best ceil(xi * K) elites to the next step, shifted one
    timestep left with a fresh terminal action appended.

    The terminal action perturbs the sequence's own last action at scale
    sigma_init (a single-step draw of the sampling noise), clipped to the
    bounds, which preserves the sequence's temporal coherence.
    """
    count = min(ceil_fraction(cfg.opt.elite_fraction, cfg.opt.elites), len(elites))
    dims, horizon = elites.sequences.shape[1:]
    if count == 0:
        return np.empty((0, dims, horizon))
    kept = elites.sequences[:count]
    terminal = kept[:, :, -1] + cfg.opt.sigma_init * rng.standard_normal((count, dims))
    terminal = np.clip(terminal, bounds.lower, bounds.upper)
    return np.concatenate([kept[:, :, 1:], terminal[:, :, None]], axis=2)


def rollout_cost_evaluator(model, start_state: np.ndarray, horizon: int):
    """Batch evaluator: cost of a candidate is the negative cumulative reward
    of rolling it out from start_state, exactly ``horizon`` model steps.
    """
    start = model.clone_state(start_state)

    def evaluate(candidates: np.ndarray) -> np.ndarray:
        n = candidates.shape[0]
        states = np.broadcast_to(start, (n,) + start.shape).copy()
        total = np.zeros(n)
        for t in range(horizon):
            actions = candidates[:, :, t]
            next_states = model.step(states, actions)
            total += model.reward(states, actions, next_states)
            states = next_states
        return -total

    return evaluate


def plan_step(
    current_state: np.ndarray,
    model,
    pstate: PlannerState,
    cfg: PlannerConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, PlannerState, OptimizationResult]:
    """Plan over the horizon from current_state and pick one action.

    Returns the executed action, the updated planner state, and the full
    optimization result (used for budget accounting and analysis).
    """
    bounds = model.action_bounds
    dims, horizon = bounds.dims, cfg.horizon
    if cfg.shift_init and pstate.prev_mean is not None:
        mean = shift_mean(pstate.prev_mean)
    else:
        mean = np.tile(bounds.midpoint[:, None], (1, horizon))
    init = SamplingDistribution(mean, np.full((dims, horizon), cfg.opt.sigma_init))

    carryover = None
    if cfg.opt.shift_elites and pstate.prev_elites is not None:
        carryover = shift_elites(pstate.prev_elites, rng, cfg, bounds)

    evaluator = rollout_cost_evaluator(model, current_state, horizon)
    try:
        result = run_optimization(evaluator, init, carryover, cfg.opt, bounds, rng)
    except Exception as exc:
        raise PlanStepError(f"planning failed at step {pstate.step_index}") from exc

    if cfg.opt.best_action:
        action = result.best_sequence[:, 0].copy()
    else:
        action = result.final_distribution.mean[:, 0].copy()

    next_pstate = PlannerState(
        prev_mean=result.final_distribution.mean,
        # only the shift-elites path ever consumes cross-step elite memory
        prev_elites=result.final_elites if cfg.opt.shift_elites else None,
        step_index=pstate.step_index + 1,
    )
    return action, next_pstate, result


def run_episode(env, cfg: PlannerConfig, episode_len: int, seed: int) -> EpisodeRecord:
    """Alternate planning and environment stepping for episode_len steps.

    The planner uses the environment itself as its (ground-truth) model.
    The seed splits deterministically into the environment's reset stream
    and the planner's sampling stream, so a given seed always reproduces the
    same episode bit for bit.
    """
    if episode_len < 1:
        raise ValueError(f"episode_len must be >= 1, got {episode_len}")
    env_seed, planner_seed = np.random.SeedSequence(seed).spawn(2)
    state = env.reset(np.random.default_rng(env_seed))
    rng = np.random.default_rng(planner_seed)

    pstate = PlannerState()
    states = [env.clone_state(state)]
    actions, rewards, evaluations = [], [], []
    for _ in range(episode_len):
        action, pstate, result = plan_step(state, env, pstate, cfg, rng)
        next_state = env.step(state, action)
        rewards.append(float(env.reward(state, action, next_state)))
        actions.append(action)
        evaluations.append(result.evaluations)
        state = next_state
        states.append(env.clone_state(state))

    states = np.asarray(states)
    return EpisodeRecord(
        states=states,
        actions=np.asarray(actions),
        rewards=np.asarray(rewards),
        cumulative_reward=float(np.sum(rewards)),
        success=env.episode_success(states),
        evaluations_per_step=np.asarray(evaluations, dtype=int),
    )
