"""Convergence figures for experiment results.

Renders the error column of a result sweep as a log-log error-vs-h
plot, one curve per (variant, p), next to the CSV the runner writes.
Rows without a finite error (custom boundary data, failed triples) are
skipped; if nothing is plottable, no figure is produced.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

__all__ = ["render_convergence_figure"]


def render_convergence_figure(rows, path, metric: str = "l2", title: str | None = None):
    """Write a PNG convergence plot; returns the path or None if empty."""
    usable = [r for r in rows if r.status == "ok" and math.isfinite(r.error) and r.error > 0.0]
    if not usable:
        return None

    groups = {}
    for r in usable:
        groups.setdefault((r.variant, r.p), []).append(r)

    fig, ax = plt.subplots(figsize=(5.0, 3.8), constrained_layout=True)
    markers = {"new": "o", "old": "s"}
    for (variant, p), rs in sorted(groups.items()):
        rs = sorted(rs, key=lambda r: -r.h)
        hs = [r.h for r in rs]
        errs = [r.error for r in rs]
        ax.loglog(
            hs,
            errs,
            marker=markers.get(variant, "^"),
            label=f"{variant}, p={p}",
        )
    ax.set_xlabel("mesh size h")
    ylabel = "relative vertex error" if metric == "vertex" else "relative L2 error"
    ax.set_ylabel(ylabel)
    ax.invert_xaxis()  # refinement left to right
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    path = Path(path)
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
