"""CSV serialization for sweep results and spectra.

Every file starts with a versioned schema tag comment so longitudinal
comparisons can detect format drift.  Floats are written with repr (shortest
round-trip form), which keeps re-runs of the same seed bit-identical and
parse(serialize(x)) exact.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, fields
from pathlib import Path

SWEEP_SCHEMA = "cemplan-sweep-v1"
PSD_SCHEMA = "cemplan-psd-v1"
EPISODE_SCHEMA = "cemplan-episode-v1"


@dataclass(frozen=True)
class SweepRow:
    """One (env, variant, budget, seed) experiment cell."""

    env: str
    variant: str
    budget: int
    seed: int
    steps: int
    cumulative_reward: float
    success: bool
    total_evaluations: int
    error: str = ""


def _format(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def format_sweep_row(row: SweepRow) -> str:
    return ",".join(_format(getattr(row, f.name)) for f in fields(SweepRow))


def write_sweep_csv(rows: list[SweepRow], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(f"# schema: {SWEEP_SCHEMA}\n")
        handle.write(",".join(f.name for f in fields(SweepRow)) + "\n")
        for row in rows:
            handle.write(format_sweep_row(row) + "\n")


def read_sweep_csv(path: str | Path) -> list[SweepRow]:
    with open(path) as handle:
        tag = handle.readline().strip()
        if tag != f"# schema: {SWEEP_SCHEMA}":
            raise ValueError(f"unexpected schema tag {tag!r} in {path}")
        reader = csv.DictReader(handle)
        rows = []
        for record in reader:
            rows.append(
                SweepRow(
                    env=record["env"],
                    variant=record["variant"],
                    budget=int(record["budget"]),
                    seed=int(record["seed"]),
                    steps=int(record["steps"]),
                    cumulative_reward=float(record["cumulative_reward"]),
                    success=record["success"] == "1",
                    total_evaluations=int(record["total_evaluations"]),
                    error=record["error"],
                )
            )
    return rows


def write_psd_csv(spectra: dict[int, tuple], exponents: list[float], path: str | Path) -> None:
    """Serialize per-dimension spectra as (dim, frequency, power) rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(f"# schema: {PSD_SCHEMA}\n")
        handle.write("# fitted_exponents: " + ",".join(repr(e) for e in exponents) + "\n")
        handle.write("dim,frequency,power\n")
        for dim, spectrum in spectra.items():
            for freq, power in zip(spectrum.frequencies, spectrum.power):
                handle.write(f"{dim},{freq!r},{power!r}\n")


def write_episode_csv(record, path: str | Path) -> None:
    """Serialize one episode as per-step rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dims = record.actions.shape[1]
    with open(path, "w", newline="") as handle:
        handle.write(f"# schema: {EPISODE_SCHEMA}\n")
        action_cols = ",".join(f"action_{j}" for j in range(dims))
        handle.write(f"step,{action_cols},reward,evaluations\n")
        for t in range(len(record.actions)):
            actions = ",".join(repr(a) for a in record.actions[t])
            handle.write(
                f"{t},{actions},{record.rewards[t]!r},{record.evaluations_per_step[t]}\n"
            )


def summarize_sweep(rows: list[SweepRow]) -> str:
    """Fixed-width per-(variant, budget) summary with exact binomial CIs."""
    from scipy.stats import beta as beta_dist

    groups: dict[tuple[str, int], list[SweepRow]] = {}
    for row in rows:
        groups.setdefault((row.variant, row.budget), []).append(row)

    out = io.StringIO()
    header = (
        f"{'variant':<24}{'budget':>8}{'n':>5}{'reward':>12}"
        f"{'success':>9}{'95% CI':>16}{'evals':>10}"
    )
    out.write(header + "\n")
    out.write("-" * len(header) + "\n")
    for (variant, budget), cell in sorted(groups.items()):
        ok = [r for r in cell if not r.error]
        n = len(ok)
        if n == 0:
            out.write(f"{variant:<24}{budget:>8}{0:>5}  all cells failed\n")
            continue
        wins = sum(r.success for r in ok)
        rate = wins / n
        # Clopper-Pearson exact interval
        low = 0.0 if wins == 0 else float(beta_dist.ppf(0.025, wins, n - wins + 1))
        high = 1.0 if wins == n else float(beta_dist.ppf(0.975, wins + 1, n - wins))
        reward = sum(r.cumulative_reward for r in ok) / n
        evals = sum(r.total_evaluations for r in ok) / n
        out.write(
            f"{variant:<24}{budget:>8}{n:>5}{reward:>12.2f}"
            f"{rate:>9.2f}  [{low:>5.2f}, {high:>5.2f}]{evals:>10.0f}\n"
        )
    return out.getvalue()
