"""Figure rendering for the report-producing CLI paths.

Evaluation reports get a precision/recall/F1 bar chart; grid-search sweeps get
an alpha-by-gamma heatmap of the best F1 over beta. Figures are written next
to the delimited outputs. PNG metadata is pinned so repeated runs produce
byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import EvalReport
from .selection import ParamGrid, SelectionParams

_PNG_METADATA = {"Software": "entailrank"}


def save_eval_figure(report: EvalReport, path, title: str = "evaluation") -> None:
    fig, ax = plt.subplots(figsize=(4.0, 3.0))
    names = ["precision", "recall", "f1"]
    values = [report.precision, report.recall, report.f1]
    bars = ax.bar(names, values, color=["#4c72b0", "#dd8452", "#55a868"])
    for bar, value in zip(bars, values):
        ax.text(
            bar.get_x() + bar.get_width() / 2,
            value,
            f"{value:.4f}",
            ha="center",
            va="bottom",
            fontsize=8,
        )
    ax.set_ylim(0.0, 1.05)
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)


def save_grid_figure(
    table: list[tuple[SelectionParams, float]],
    grid: ParamGrid,
    path,
    title: str = "grid search (best F1 over beta)",
) -> None:
    """Heatmap of max-over-beta dev F1 for each (alpha, gamma) cell."""
    best: dict[tuple[float, float], float] = {}
    for params, f1 in table:
        key = (params.alpha, params.gamma)
        if key not in best or f1 > best[key]:
            best[key] = f1
    alphas = list(grid.alphas)
    gammas = list(grid.gammas)
    cells = [[best[(a, g)] for g in gammas] for a in alphas]

    fig, ax = plt.subplots(figsize=(0.45 * len(gammas) + 2.0, 0.35 * len(alphas) + 1.6))
    image = ax.imshow(cells, cmap="viridis", aspect="auto", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(len(gammas)), [f"{g:g}" for g in gammas], fontsize=7, rotation=45)
    ax.set_yticks(range(len(alphas)), [f"{a:g}" for a in alphas], fontsize=7)
    ax.set_xlabel("gamma (relative threshold)")
    ax.set_ylabel("alpha (absolute threshold)")
    ax.set_title(title, fontsize=10)
    fig.colorbar(image, ax=ax, fraction=0.03)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_METADATA)
    plt.close(fig)
