"""One full CEM optimization of a single planning problem.

The loop iterates sampling, batch evaluation, elite selection, and
distribution refit.  Variant behaviors (memory, population decay, clipped
colored-noise sampling vs. truncated normals, executing the best seen
sequence) all hang off OptimizerConfig flags, so the same loop covers the
plain method, its MPC/PETS modifications, and the colored-noise variant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr, ndtri

from cemplan import noise

SIGMA_FLOOR = 1e-6

# Batch cost evaluator: maps (n, dims, horizon) candidate actions to (n,) costs.
CostEvaluator = Callable[[np.ndarray], np.ndarray]


def ceil_fraction(fraction: float, count: int) -> int:
    """ceil(fraction * count) robust to float noise (0.15 * 20 -> 3, not 4)."""
    return max(int(math.ceil(fraction * count - 1e-9)), 0)


@dataclass(frozen=True)
class ActionBounds:
    """Per-dimension action interval [lower, upper], both shape (dims,)."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d arrays of equal length")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("bounds must be finite")
        if np.any(lower >= upper):
            raise ValueError("lower bounds must be strictly below upper bounds")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @property
    def dims(self) -> int:
        return self.lower.size

    @property
    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def clip_sequences(self, sequences: np.ndarray) -> np.ndarray:
        """Clip (..., dims, horizon) action sequences into the interval."""
        return np.clip(sequences, self.lower[:, None], self.upper[:, None])

    def contains(self, actions: np.ndarray, atol: float = 1e-9) -> bool:
        """True if (..., dims) actions lie inside the interval."""
        return bool(
            np.all(actions >= self.lower - atol) and np.all(actions <= self.upper + atol)
        )


@dataclass(frozen=True)
class SamplingDistribution:
    """Per-dimension, per-timestep Gaussian parameters, both (dims, horizon)."""

    mean: np.ndarray
    std: np.ndarray

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=float)
        std = np.asarray(self.std, dtype=float)
        if mean.shape != std.shape or mean.ndim != 2:
            raise ValueError("mean and std must be 2-d arrays of equal shape")
        if np.any(std < 0):
            raise ValueError("std must be nonnegative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "std", std)


@dataclass(frozen=True)
class EliteSet:
    """The K best action sequences with their costs, sorted ascending."""

    sequences: np.ndarray  # (K, dims, horizon)
    costs: np.ndarray  # (K,)

    def __post_init__(self):
        sequences = np.asarray(self.sequences, dtype=float)
        costs = np.asarray(self.costs, dtype=float)
        if sequences.ndim != 3 or costs.ndim != 1 or len(sequences) != len(costs):
            raise ValueError("need (K, dims, horizon) sequences and (K,) costs")
        if np.any(np.diff(costs) < 0):
            raise ValueError("costs must be sorted ascending")
        object.__setattr__(self, "sequences", sequences)
        object.__setattr__(self, "costs", costs)

    def __len__(self) -> int:
        return len(self.costs)


@dataclass(frozen=True)
class OptimizerConfig:
    """Hyperparameters and variant switches for one optimization.

    Sampling mode is either clipped (colored) Gaussian or per-element
    truncated normal; clip_sampling and truncated_sampling are therefore
    mutually exclusive.  With both off, samples are drawn from the unmodified
    Gaussian and only constrained at the action bounds.
    """

    num_samples: int
    iterations: int
    elites: int = 10
    beta: float = 2.0
    gamma: float = 1.25
    alpha: float = 0.1
    elite_fraction: float = 0.3
    sigma_init: float = 0.5
    colored_noise: bool = False
    keep_elites: bool = False
    shift_elites: bool = False
    decay: bool = False
    clip_sampling: bool = False
    best_action: bool = False
    add_mean_last_iter: bool = False
    pets_sigma: bool = False
    truncated_sampling: bool = False

    def __post_init__(self):
        if self.elites < 1:
            raise ValueError(f"need at least one elite, got {self.elites}")
        if self.num_samples < 2 * self.elites:
            raise ValueError(
                f"num_samples must be >= 2 * elites, got {self.num_samples} < {2 * self.elites}"
            )
        if self.iterations < 1:
            raise ValueError(f"iterations must be >= 1, got {self.iterations}")
        if not self.gamma >= 1.0:
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if not 0.0 <= self.elite_fraction <= 1.0:
            raise ValueError(f"elite_fraction must be in [0, 1], got {self.elite_fraction}")
        if not self.sigma_init > 0:
            raise ValueError(f"sigma_init must be > 0, got {self.sigma_init}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be >= 0, got {self.beta}")
        if self.clip_sampling and self.truncated_sampling:
            raise ValueError("clip_sampling and truncated_sampling are mutually exclusive")
        if self.pets_sigma and not self.truncated_sampling:
            raise ValueError("pets_sigma requires truncated_sampling")

    @property
    def elite_carry_count(self) -> int:
        """Number of elites injected between iterations/steps: ceil(xi * K)."""
        return ceil_fraction(self.elite_fraction, self.elites)


@dataclass(frozen=True)
class OptimizationResult:
    best_sequence: np.ndarray  # (dims, horizon)
    best_cost: float
    final_distribution: SamplingDistribution
    final_elites: EliteSet
    evaluations: int


def population_size(iteration: int, cfg: OptimizerConfig) -> int:
    """Samples drawn at a given iteration: floor(N * gamma**-i), at least 2K."""
    if iteration < 0:
        raise ValueError(f"iteration must be >= 0, got {iteration}")
    if not cfg.decay:
        return cfg.num_samples
    decayed = math.floor(cfg.num_samples / cfg.gamma**iteration)
    return max(decayed, 2 * cfg.elites)


def _truncated_normal(
    mean: np.ndarray,
    std: np.ndarray,
    low: np.ndarray,
    high: np.ndarray,
    shape: tuple,
    rng: np.random.Generator,
) -> np.ndarray:
    """Truncated-normal draws by inverse CDF, one uniform per element.

    The fixed draw pattern keeps optimizations bit-reproducible no matter
    how the truncation interval moves between iterations.
    """
    uniforms = rng.random(shape)
    scale = np.maximum(std, SIGMA_FLOOR)
    p_low = ndtr((low - mean) / scale)
    p_high = ndtr((high - mean) / scale)
    return mean + scale * ndtri(p_low + uniforms * (p_high - p_low))


def pets_adapt_sigma(dist: SamplingDistribution, bounds: ActionBounds) -> SamplingDistribution:
    """Cap sigma at half the distance from the mean to the nearest bound."""
    margin = np.minimum(
        dist.mean - bounds.lower[:, None], bounds.upper[:, None] - dist.mean
    )
    capped = np.minimum(dist.std, 0.5 * margin)
    return SamplingDistribution(dist.mean, np.maximum(capped, SIGMA_FLOOR))


def sample_candidates(
    dist: SamplingDistribution,
    n: int,
    cfg: OptimizerConfig,
    bounds: ActionBounds,
    rng: np.random.Generator,
) -> np.ndarray:
    """Draw n candidate action sequences, shape (n, dims, horizon).

    Truncated mode samples per-element truncated normals, over the action
    interval or, with pets_sigma, over mean +/- 2 sigma after capping sigma.
    Otherwise noise (colored when the flag is on, white when off) is scaled
    by std, shifted by the mean, and clipped.  Every returned candidate lies
    within the action bounds.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    dims, horizon = dist.mean.shape
    if cfg.truncated_sampling:
        if cfg.pets_sigma:
            dist = pets_adapt_sigma(dist, bounds)
            low = dist.mean - 2.0 * dist.std
            high = dist.mean + 2.0 * dist.std
        else:
            low = np.broadcast_to(bounds.lower[:, None], (dims, horizon))
            high = np.broadcast_to(bounds.upper[:, None], (dims, horizon))
        samples = _truncated_normal(dist.mean, dist.std, low, high, (n, dims, horizon), rng)
        return bounds.clip_sequences(samples)
    beta = cfg.beta if cfg.colored_noise else 0.0
    eps = noise.sample_colored_batch(noise.NoiseSpec(beta, dims, horizon), rng, n)
    return bounds.clip_sequences(dist.mean + eps * dist.std)


def select_elites(candidates: np.ndarray, costs: np.ndarray, k: int) -> EliteSet:
    """The k lowest-cost candidates, ties broken by lower candidate index."""
    costs = np.asarray(costs, dtype=float)
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(costs) < k:
        raise ValueError(f"need at least {k} candidates, got {len(costs)}")
    order = np.argsort(costs, kind="stable")[:k]
    return EliteSet(sequences=np.asarray(candidates)[order], costs=costs[order])


def refit_distribution(
    dist: SamplingDistribution,
    elites: EliteSet,
    alpha: float,
    bounds: ActionBounds | None = None,
) -> SamplingDistribution:
    """Blend the old distribution with the elite statistics.

    Momentum alpha applies to both mean and std; the elite std is the
    population (divide-by-K) estimator.  The new std is floored to keep the
    distribution non-degenerate, and the mean is clamped into the bounds
    when given so the sigma adaptation's bound distances stay nonnegative.
    """
    if len(elites) == 0:
        raise ValueError("elite set is empty")
    elite_mean = elites.sequences.mean(axis=0)
    elite_std = elites.sequences.std(axis=0)
    mean = alpha * dist.mean + (1.0 - alpha) * elite_mean
    std = np.maximum(alpha * dist.std + (1.0 - alpha) * elite_std, SIGMA_FLOOR)
    if bounds is not None:
        mean = np.clip(mean, bounds.lower[:, None], bounds.upper[:, None])
    return SamplingDistribution(mean, std)


def run_optimization(
    problem: CostEvaluator,
    init: SamplingDistribution,
    carryover: np.ndarray | None,
    cfg: OptimizerConfig,
    bounds: ActionBounds,
    rng: np.random.Generator,
    callback: Callable[[int, np.ndarray, np.ndarray, EliteSet], None] | None = None,
) -> OptimizationResult:
    """Run the full iterated sample/evaluate/select/refit loop.

    carryover, if given, holds already-shifted elite sequences from the
    previous planning step; they join the candidate pool at iteration 0 and
    are re-evaluated like everything else.  At later iterations a fraction
    of the previous elite set is re-injected when keep_elites is on, and the
    current mean joins the final pool when add_mean_last_iter is on.
    Injected candidates are ordered ahead of fresh samples so cost ties
    resolve toward them deterministically.  ``evaluations`` counts every
    cost evaluation, injected candidates included.
    """
    if carryover is not None and not cfg.shift_elites:
        raise ValueError("carryover elites supplied but shift_elites is off")
    dims, horizon = init.mean.shape
    dist = init
    elites: EliteSet | None = None
    best_sequence: np.ndarray | None = None
    best_cost = math.inf
    evaluations = 0
    for iteration in range(cfg.iterations):
        fresh = sample_candidates(dist, population_size(iteration, cfg), cfg, bounds, rng)
        parts = []
        if iteration == 0:
            if carryover is not None and len(carryover):
                injected = np.asarray(carryover, dtype=float)[: cfg.elite_carry_count]
                parts.append(injected.reshape(-1, dims, horizon))
        elif cfg.keep_elites:
            parts.append(elites.sequences[: cfg.elite_carry_count])
        parts.append(fresh)
        if cfg.add_mean_last_iter and iteration == cfg.iterations - 1:
            parts.append(bounds.clip_sequences(dist.mean[None]))
        pool = np.concatenate(parts, axis=0)
        costs = np.asarray(problem(pool), dtype=float)
        if costs.shape != (len(pool),):
            raise ValueError(
                f"evaluator returned shape {costs.shape}, expected ({len(pool)},)"
            )
        evaluations += len(pool)
        elites = select_elites(pool, costs, cfg.elites)
        leader = int(np.argmin(costs))
        if costs[leader] < best_cost:
            best_cost = float(costs[leader])
            best_sequence = pool[leader].copy()
        # the tracked best can only improve
        assert best_cost <= elites.costs[0]
        if callback is not None:
            callback(iteration, pool, costs, elites)
        dist = refit_distribution(dist, elites, cfg.alpha, bounds)
    return OptimizationResult(
        best_sequence=best_sequence,
        best_cost=best_cost,
        final_distribution=dist,
        final_elites=elites,
        evaluations=evaluations,
    )
