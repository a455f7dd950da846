"""Figure rendering for harness reports.

Each report path writes a PNG next to its CSV: sweep curves over budget,
ablation bars, log-log action spectra, and episode traces.  The CSV stays
the authoritative data artifact; figures are for eyeballing runs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from cemplan.harness.csvio import SweepRow

plt.rcParams.update({
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
})


def figure_path(out: str | Path) -> Path:
    return Path(out).with_suffix(".png")


def _group_rows(rows: list[SweepRow]):
    groups: dict[str, dict[int, list[SweepRow]]] = {}
    for row in rows:
        if row.error:
            continue
        groups.setdefault(row.variant, {}).setdefault(row.budget, []).append(row)
    return groups


def plot_sweep(rows: list[SweepRow], out: str | Path) -> Path:
    """Success rate and mean reward against budget, one line per variant."""
    groups = _group_rows(rows)
    fig, (ax_success, ax_reward) = plt.subplots(1, 2, figsize=(8, 3))
    for variant, per_budget in sorted(groups.items()):
        budgets = sorted(per_budget)
        success = [np.mean([r.success for r in per_budget[b]]) for b in budgets]
        reward = [np.mean([r.cumulative_reward for r in per_budget[b]]) for b in budgets]
        ax_success.plot(budgets, success, marker="o", label=variant)
        ax_reward.plot(budgets, reward, marker="o", label=variant)
    for ax, label in ((ax_success, "success rate"), (ax_reward, "mean reward")):
        ax.set_xscale("log")
        ax.set_xlabel("budget (trajectories / step)")
        ax.set_ylabel(label)
    ax_success.set_ylim(-0.05, 1.05)
    ax_success.legend(fontsize=7)
    fig.tight_layout()
    target = figure_path(out)
    fig.savefig(target)
    plt.close(fig)
    return target


def plot_ablation(rows: list[SweepRow], out: str | Path) -> Path:
    """Horizontal bars of mean success per ablated variant."""
    groups = _group_rows(rows)
    labels, values, colors = [], [], []
    for variant in sorted(groups, reverse=True):
        cell_rows = [r for per_b in groups[variant].values() for r in per_b]
        labels.append(variant)
        values.append(np.mean([r.success for r in cell_rows]))
        colors.append("tab:orange" if variant.startswith("icem") else "tab:blue")
    fig, ax = plt.subplots(figsize=(6, 0.35 * len(labels) + 1))
    ax.barh(labels, values, color=colors)
    ax.set_xlabel("success rate")
    ax.set_xlim(0, 1.05)
    fig.tight_layout()
    target = figure_path(out)
    fig.savefig(target)
    plt.close(fig)
    return target


def plot_psd(analysis, out: str | Path) -> Path:
    """Log-log spectra of executed actions with the fitted power law."""
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    for dim, spectrum in analysis.spectra.items():
        ax.loglog(spectrum.frequencies, spectrum.power, alpha=0.7,
                  label=f"dim {dim} (slope {analysis.exponents[dim]:+.2f})")
        anchor = np.median(spectrum.power / spectrum.frequencies**analysis.exponents[dim])
        ax.loglog(spectrum.frequencies,
                  anchor * spectrum.frequencies**analysis.exponents[dim],
                  "k--", linewidth=0.8)
    ax.set_xlabel("frequency (cycles / step)")
    ax.set_ylabel("power")
    ax.legend(fontsize=7)
    fig.tight_layout()
    target = figure_path(out)
    fig.savefig(target)
    plt.close(fig)
    return target


def plot_episode(record, out: str | Path) -> Path:
    """Executed actions and per-step reward over the episode."""
    fig, (ax_actions, ax_reward) = plt.subplots(2, 1, figsize=(6, 4), sharex=True)
    steps = np.arange(len(record.actions))
    for dim in range(record.actions.shape[1]):
        ax_actions.plot(steps, record.actions[:, dim], label=f"dim {dim}")
    ax_actions.set_ylabel("action")
    ax_actions.legend(fontsize=7)
    ax_reward.plot(steps, record.rewards, color="tab:green")
    ax_reward.set_ylabel("reward")
    ax_reward.set_xlabel("step")
    fig.tight_layout()
    target = figure_path(out)
    fig.savefig(target)
    plt.close(fig)
    return target
