"""Figures rendered from summary rows (see :func:`experiments.rows_to_csv`)."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "figure.figsize": (5.0, 3.2),
    "savefig.dpi": 150,
    "svg.hashsalt": "streamcover",
}


def _label(row: dict) -> str:
    if row["algorithm"] == "esc":
        return f"esc α={row['alpha']:g}"
    return row["algorithm"]


def _groups(rows: Sequence[dict]) -> dict[tuple, list[dict]]:
    out: dict[tuple, list[dict]] = defaultdict(list)
    for r in rows:
        out[(r["utility"], r["Q"])].append(r)
    return out


def _series(rows: Sequence[dict], x: str, y: str) -> dict[str, tuple[list, list]]:
    out: dict[str, tuple[list, list]] = {}
    for r in rows:
        if math.isnan(r[y]) or math.isnan(r[x]):
            continue
        xs, ys = out.setdefault(_label(r), ([], []))
        xs.append(r[x])
        ys.append(r[y])
    return out


def size_vs_eps(rows: Sequence[dict], path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, (xs, ys) in sorted(_series(rows, "eps_tilde", "size").items()):
            order = sorted(range(len(xs)), key=xs.__getitem__)
            ax.plot([xs[i] for i in order], [ys[i] for i in order], marker="o", label=label)
        ax.set_xscale("log")
        ax.set_xlabel("ε̃ (partial-cover slack)")
        ax.set_ylabel("solution size")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def calls_bar(rows: Sequence[dict], path: Path) -> Path:
    """Largest gain-call count per algorithm, relative to greedy when present."""
    best: dict[str, float] = {}
    for r in rows:
        best[_label(r)] = max(best.get(_label(r), 0.0), r["calls"])
    ref = best.get("greedy") or best.get("lazy")
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        labels = sorted(best)
        vals = [best[k] / ref * 100 if ref else best[k] for k in labels]
        ax.bar(range(len(labels)), vals, color="0.4")
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, rotation=30, ha="right")
        ax.set_ylabel("% of greedy oracle calls" if ref else "oracle calls")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def utility_vs_size(rows: Sequence[dict], path: Path) -> Path:
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, (xs, ys) in sorted(_series(rows, "size", "f_achieved").items()):
            order = sorted(range(len(xs)), key=xs.__getitem__)
            ax.plot([xs[i] for i in order], [ys[i] for i in order], marker=".", label=label)
        ax.set_xlabel("solution size")
        ax.set_ylabel("utility achieved")
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def render_figures(rows: Sequence[dict], out_dir: str | Path) -> list[Path]:
    """One set of figures per (utility, Q) group; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (utility, Q), group in sorted(_groups(rows).items()):
        stem = f"{utility}_Q{Q:g}"
        written.append(size_vs_eps(group, out_dir / f"{stem}_size.png"))
        written.append(calls_bar(group, out_dir / f"{stem}_calls.png"))
        written.append(utility_vs_size(group, out_dir / f"{stem}_utility.png"))
    return written
