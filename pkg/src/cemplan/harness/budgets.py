"""Planning-budget bookkeeping: the budget -> (iterations, N) schedule.

Tabulated budgets return the published pairs verbatim.  Other budgets pick
the largest tabulated iteration count whose own pair's decayed sample sum
fits the budget, then raise N as far as the budget allows.
"""

from __future__ import annotations

import math

# budget -> (iterations, N); the "icem" family decays the population with
# gamma = 1.25, the "cem" family keeps it constant (gamma = 1.0)
BUDGET_TABLE = {
    "icem": {
        50: (2, 25), 70: (2, 40), 100: (3, 40), 150: (3, 60), 200: (4, 65),
        250: (4, 85), 300: (4, 100), 400: (5, 120), 500: (5, 150),
        1000: (6, 270), 2000: (8, 480), 4000: (10, 900),
    },
    "cem": {
        50: (2, 25), 70: (2, 35), 100: (2, 50), 150: (2, 75), 200: (3, 66),
        250: (3, 83), 300: (3, 100), 400: (4, 100), 500: (4, 125),
        1000: (4, 250), 2000: (6, 333), 4000: (8, 500),
    },
}

FAMILY_GAMMA = {"icem": 1.25, "cem": 1.0}

MIN_ELITES = 10  # K used by the schedule's 2K population floor


def schedule_family(variant: str) -> str:
    return "icem" if variant == "icem" else "cem"


def decayed_total(num_samples: int, iterations: int, gamma: float, k: int = MIN_ELITES) -> int:
    """Total samples drawn over all iterations under population decay."""
    return sum(
        max(math.floor(num_samples / gamma**i), 2 * k) for i in range(iterations)
    )


def solve_num_samples(budget: int, iterations: int, gamma: float, k: int = MIN_ELITES) -> int:
    """Largest N (>= 2K) whose decayed total stays within the budget."""
    low, high = 2 * k, budget
    while low < high:
        mid = (low + high + 1) // 2
        if decayed_total(mid, iterations, gamma, k) <= budget:
            low = mid
        else:
            high = mid - 1
    return low


def budget_to_schedule(budget: int, variant: str) -> tuple[int, int]:
    """Map a per-step trajectory budget to (iterations, N) for a variant."""
    family = schedule_family(variant)
    if budget < 2 * MIN_ELITES:
        raise ValueError(f"budget must be >= {2 * MIN_ELITES}, got {budget}")
    table = BUDGET_TABLE[family]
    if budget in table:
        return table[budget]
    gamma = FAMILY_GAMMA[family]
    feasible = [
        iters
        for iters, n in table.values()
        if decayed_total(n, iters, gamma) <= budget
    ]
    iterations = max(feasible, default=1)
    return iterations, solve_num_samples(budget, iterations, gamma)
