"""Matplotlib renderings written next to the pipeline's delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .layout.formats import LayoutRecord
from .recommend import RecommendationTable


def render_layout_figure(records: list[LayoutRecord], path: str | Path, title: str = "Semantic map") -> None:
    """Scatter of the 2D map: talents as dots, datasets as squares."""
    talents = [(r.x, r.y, r.display_size) for r in records if r.node_kind == "talent"]
    datasets = [(r.x, r.y, r.display_size) for r in records if r.node_kind == "dataset"]
    fig, ax = plt.subplots(figsize=(9, 9))
    if talents:
        t = np.array(talents)
        ax.scatter(t[:, 0], t[:, 1], s=t[:, 2], c="#3b6aa0", alpha=0.45, linewidths=0, label="talents")
    if datasets:
        d = np.array(datasets)
        ax.scatter(d[:, 0], d[:, 1], s=d[:, 2] * 4, c="#d65f2c", marker="s", alpha=0.9, label="datasets")
    ax.set_title(title)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", frameon=False)
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_objective_figure(history: list[tuple[int, float]], path: str | Path, ylabel: str) -> None:
    """Objective trace over iterations for the layout run."""
    fig, ax = plt.subplots(figsize=(7, 4))
    if history:
        its, vals = zip(*history)
        ax.plot(its, vals, marker="o", ms=3, lw=1.2, c="#3b6aa0")
    ax.set_xlabel("iteration")
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_score_histogram(table: RecommendationTable, path: str | Path) -> None:
    """Distribution of recommendation scores, split by recommendation kind."""
    collab = [e.score for recs in table.collaborator_recs.values() for e in recs]
    users = [e.score for recs in table.dataset_user_recs.values() for e in recs]
    fig, ax = plt.subplots(figsize=(7, 4))
    bins = np.linspace(-1, 1, 81)
    if collab:
        ax.hist(collab, bins=bins, alpha=0.6, label="collaborator", color="#3b6aa0")
    if users:
        ax.hist(users, bins=bins, alpha=0.6, label="dataset user", color="#d65f2c")
    ax.set_xlabel("cosine score")
    ax.set_ylabel("recommendations")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
