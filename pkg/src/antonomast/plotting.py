"""Figures written next to the delimited reports."""

from __future__ import annotations

from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .pipeline import GenerationRun  # noqa: E402
from .report import Cell  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}


def plot_ranking(run: GenerationRun, path) -> Path:
    """Similarity bars for the ranked sources, with each source's L1 norm on a twin axis."""
    path = Path(path)
    results = run.results
    labels = [r.source.label for r in results]
    y = np.arange(len(results))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(6.0, 0.4 * len(results) + 1.4))
        ax.barh(y, [r.similarity for r in results], color="#4C72B0", label="similarity")
        ax.set_yticks(y, labels)
        ax.invert_yaxis()
        ax.set_xlabel("cosine similarity")
        twin = ax.twiny()
        twin.plot([r.l1 for r in results], y, "o", color="#DD8452", label="L1 norm")
        twin.set_xlabel("L1 norm of source embedding")
        target = results[0].target.label if results else ""
        ax.set_title(f"{target}: {run.provenance.get('method', '')}", pad=28)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_comparison(targets: Sequence[str], methods: Sequence[str], rows: Sequence[dict[str, Cell]], path) -> Path:
    """Grouped bars of the top-1 similarity per target and method; cells without a score are left empty."""
    path = Path(path)
    scored = [m for m in methods if any(row[m].similarity is not None for row in rows)]
    x = np.arange(len(targets))
    width = 0.8 / max(1, len(scored))
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 1.6 * len(targets)), 3.2))
        for i, m in enumerate(scored):
            vals = [row[m].similarity if row[m].similarity is not None else np.nan for row in rows]
            ax.bar(x + (i - (len(scored) - 1) / 2) * width, vals, width, label=m)
        ax.set_xticks(x, targets, rotation=20, ha="right")
        ax.set_ylabel("top-1 similarity")
        if scored:
            ax.legend(frameon=False)
        fig.tight_layout()
        path.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(path)
        plt.close(fig)
    return path
