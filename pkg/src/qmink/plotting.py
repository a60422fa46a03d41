"""Matplotlib figure rendering for spectrum lattices and verification reports.

These figures accompany the delimited outputs of the CLI; the SVG emitter in
`cli` stays dependency-free, while these renderers produce publication-style
raster/vector files through matplotlib.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SECTOR_STYLE = {
    "time+": dict(color="tab:red", marker="o", label="time-like (forward)"),
    "time-": dict(color="tab:orange", marker="o", label="time-like (backward)"),
    "space": dict(color="tab:blue", marker="s", label="space-like"),
    "light": dict(color="tab:green", marker="^", label="light-like"),
}


def spectrum_figure(points, path, title=None):
    """Scatter of admissible (r, t) pairs with the light-cone guide lines."""
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    by_sector = {}
    for pt in points:
        by_sector.setdefault(pt.sector.value, []).append(pt)
    rmax = max((pt.r for pt in points), default=1.0)
    tmax = max((abs(pt.t) for pt in points), default=1.0)
    lim = 1.05 * max(rmax, tmax, 1e-9)
    ax.plot([0, lim], [0, lim], lw=0.8, color="0.6", zorder=0)
    ax.plot([0, lim], [0, -lim], lw=0.8, color="0.6", zorder=0)
    for name, pts in sorted(by_sector.items()):
        style = _SECTOR_STYLE.get(name, dict(marker="."))
        ax.scatter([p.r for p in pts], [p.t for p in pts], s=8, **style)
    ax.set_xlabel("r")
    ax.set_ylabel("t")
    ax.set_xlim(0, lim)
    ax.set_ylim(-lim, lim)
    if title:
        ax.set_title(title)
    if by_sector:
        ax.legend(loc="upper left", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def residual_figure(reports, path, title=None):
    """Horizontal bars of normalized max residuals, one per relation."""
    rows = [r for r in reports if r.status in ("pass", "fail")]
    if not rows:
        rows = reports
    names = [r.relation for r in rows]
    vals = np.array([
        max(r.max_residual / (1.0 + r.normalization), 1e-18)
        if np.isfinite(r.max_residual) else 1e-18
        for r in rows
    ])
    colors = ["tab:green" if r.status == "pass" else "tab:red" for r in rows]
    height = max(2.0, 0.12 * len(rows))
    fig, ax = plt.subplots(figsize=(7.5, height))
    ax.barh(np.arange(len(rows)), vals, color=colors, height=0.8)
    ax.set_xscale("log")
    ax.set_xlabel("normalized max residual")
    ax.set_yticks(np.arange(len(rows)))
    ax.set_yticklabels(names, fontsize=4)
    ax.invert_yaxis()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
