"""Static figures for reports: interaction networks and fairness/performance trade-offs."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .explain import InteractionGraph  # noqa: E402

POSITIVE = "#d62728"
NEGATIVE = "#1f77b4"
NEUTRAL = "#bbbbbb"
VARIANT_COLORS = {
    "none": "#444444",
    "reweight_auto": "#2ca02c",
    "reweight_manual": "#98df8a",
    "eg_dp": "#d62728",
    "eg_eo": "#ff7f0e",
}
# PNG metadata carries a software version by default; drop it so reruns are byte-stable
_SAVE_KW = {"dpi": 120, "metadata": {"Software": None}}


def _ordered(names) -> list:
    order = list(VARIANT_COLORS)
    return sorted(set(names), key=lambda v: (order.index(v) if v in order else len(order), v))


def _circle_layout(n: int) -> np.ndarray:
    angles = np.pi / 2 - 2 * np.pi * np.arange(n) / max(n, 1)
    return np.column_stack([np.cos(angles), np.sin(angles)])


def draw_network(ax, g: InteractionGraph, title: str = "") -> None:
    """Nodes sized by |phi_i| and coloured by sign; edges by |phi_ij|, blue when redundant."""
    names = [n["feature"] for n in g.nodes]
    pos = dict(zip(names, _circle_layout(len(names))))
    node_max = max((n["magnitude"] for n in g.nodes), default=0.0) or 1.0
    edge_max = max((e["magnitude"] for e in g.edges), default=0.0) or 1.0
    for e in g.edges:
        (x0, y0), (x1, y1) = pos[e["source"]], pos[e["target"]]
        ax.plot(
            [x0, x1],
            [y0, y1],
            color=NEGATIVE if e["redundant"] else POSITIVE,
            lw=0.5 + 6.0 * e["magnitude"] / edge_max,
            alpha=0.6,
            zorder=1,
        )
    for n in g.nodes:
        x, y = pos[n["feature"]]
        color = POSITIVE if n["sign"] > 0 else NEGATIVE if n["sign"] < 0 else NEUTRAL
        size = 80 + 1500 * n["magnitude"] / node_max
        ax.scatter([x], [y], s=size, color=color, edgecolor="k", zorder=2)
        # marker area is in points^2; keep the label clear of the disc
        offset = -(math.sqrt(size) / 2 + 9)
        ax.annotate(n["feature"], (x, y), xytext=(0, offset), textcoords="offset points", ha="center", fontsize=8)
    ax.set_xlim(-1.5, 1.5)
    ax.set_ylim(-1.5, 1.5)
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=10)


def network_pair_figure(graphs: dict, path, suptitle: str = "") -> Path:
    """Side-by-side networks, e.g. ``{"baseline": g0, "eg_dp": g1}``."""
    path = Path(path)
    fig, axes = plt.subplots(1, len(graphs), figsize=(4.5 * len(graphs), 4.8), squeeze=False)
    for ax, (label, g) in zip(axes[0], graphs.items()):
        draw_network(ax, g, f"{label}  (hub {g.hub_concentration():.2f})")
    if suptitle:
        fig.suptitle(suptitle)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def tradeoff_figure(points: list[dict], path, title: str = "") -> Path:
    """Scatter of |SPD| against accuracy, one marker per (scenario, variant) record.

    Each point is a dict with ``variant``, ``abs_spd`` and ``accuracy``.
    """
    path = Path(path)
    fig, ax = plt.subplots(figsize=(5.5, 4.2))
    variants = _ordered(p["variant"] for p in points)
    for v in variants:
        sel = [p for p in points if p["variant"] == v and not math.isnan(p["abs_spd"])]
        ax.scatter(
            [p["abs_spd"] for p in sel],
            [p["accuracy"] for p in sel],
            label=v,
            color=VARIANT_COLORS.get(v),
            s=24,
            alpha=0.8,
        )
    ax.set_xlabel("|SPD|")
    ax.set_ylabel("accuracy")
    ax.grid(alpha=0.3)
    if variants:
        ax.legend(fontsize=8, frameon=False)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path


def approval_figure(rows: list[dict], path, title: str = "") -> Path:
    """Grouped bars of mean approval rate per variant for groups A and B."""
    path = Path(path)
    variants = _ordered(r["variant"] for r in rows)
    mean_a = [np.nanmean([r["approval_A"] for r in rows if r["variant"] == v]) for v in variants]
    mean_b = [np.nanmean([r["approval_B"] for r in rows if r["variant"] == v]) for v in variants]
    x = np.arange(len(variants))
    fig, ax = plt.subplots(figsize=(6, 3.6))
    ax.bar(x - 0.2, mean_a, 0.4, label="A", color="#7f7f7f")
    ax.bar(x + 0.2, mean_b, 0.4, label="B", color="#17becf")
    ax.set_xticks(x)
    ax.set_xticklabels(variants, rotation=20, fontsize=8)
    ax.set_ylabel("approval rate")
    ax.set_ylim(0, 1)
    ax.legend(fontsize=8, frameon=False)
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return path
