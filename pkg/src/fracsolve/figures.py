"""Convergence figures rendered next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def render_convergence_figure(rows, table_path: str) -> str:
    """Log-log plot of eps_rel and oracle error against m; returns the file path."""
    ms = [r.m for r in rows]
    fig, axis = plt.subplots(figsize=(6.0, 4.2))
    series = [
        ("eps_rel", [r.eps_rel for r in rows], "o-"),
        ("eps_abs", [r.eps_abs for r in rows], "s--"),
        ("err_l2 (vs oracle)", [r.err_l2 for r in rows], "d-."),
    ]
    plotted = False
    for label, vals, style in series:
        pts = [(m, v) for m, v in zip(ms, vals) if v is not None and v > 0]
        if pts:
            axis.loglog(*zip(*pts), style, label=label)
            plotted = True
    if not plotted:
        axis.text(0.5, 0.5, "no positive values to plot", ha="center", va="center",
                  transform=axis.transAxes)
    axis.set_xlabel("m (terms / steps)")
    axis.set_ylabel("error")
    method = rows[0].method if rows else "?"
    alpha = rows[0].alpha if rows else float("nan")
    axis.set_title(f"{method}, alpha = {alpha:g}")
    axis.grid(True, which="both", alpha=0.3)
    if plotted:
        axis.legend()
    out = str(Path(table_path).with_suffix("")) + "_convergence.png"
    fig.tight_layout()
    fig.savefig(out, dpi=150)
    plt.close(fig)
    return out
