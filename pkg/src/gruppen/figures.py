"""Figures for analysis reports.

Rendered headless (Agg) straight to files; every figure is a pure
function of its inputs so report directories are reproducible.
"""

from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)


def save_rank_figure(path: str, dim: int, entries: Sequence[tuple[str, int]]) -> None:
    """Horizontal bars: known rank vs remaining codimension per view."""
    labels = [label for label, _ in entries]
    ranks = [rank for _, rank in entries]
    codims = [dim - rank for _, rank in entries]
    fig, ax = plt.subplots(figsize=(7, 1.2 + 0.5 * max(1, len(entries))))
    y = range(len(entries))
    ax.barh(y, ranks, color="#2c7fb8", label="rank (known)")
    ax.barh(y, codims, left=ranks, color="#d9d9d9", hatch="//", label="codimension")
    ax.set_yticks(list(y), labels)
    ax.invert_yaxis()
    ax.set_xlim(0, dim)
    ax.set_xlabel(f"coefficient-space dimensions (D = {dim})")
    ax.set_title("coalition knowledge")
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_deviation_figure(
    path: str, title: str, entries: Sequence[tuple[str, float]], tol: float
) -> None:
    """Per-check |deviation| against the tolerance, log scale.

    Zero deviations still need a finite position on the log axis; they
    are shown clipped to the plot floor.
    """
    floor = tol * 1e-6
    labels = [label for label, _ in entries]
    values = [max(abs(d), floor) for _, d in entries]
    fig, ax = plt.subplots(figsize=(7, 1.2 + 0.35 * max(1, len(entries))))
    y = range(len(entries))
    ax.scatter(values, list(y), color="#2c7fb8", zorder=3)
    ax.axvline(tol, color="#e34a33", linestyle="--", label=f"tolerance {tol:g}")
    ax.set_xscale("log")
    ax.set_xlim(floor / 2, max(values + [tol]) * 10)
    ax.set_yticks(list(y), labels)
    ax.invert_yaxis()
    ax.set_xlabel("|deviation| (bits)")
    ax.set_title(title)
    ax.legend(loc="lower right", fontsize="small")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
