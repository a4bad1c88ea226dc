"""Static matplotlib figures written straight to files (SVG by default)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .conformal import BoundaryCurve  # noqa: E402

BOUNDARY_COLOR = "#1f4e79"
FILL_COLOR = "#c6dbef"
PARTICLE_COLOR = "#b22222"


def set_style():
    plt.rcParams.update(
        {
            "font.size": 9,
            "axes.titlesize": 9,
            "axes.linewidth": 0.6,
            "xtick.major.width": 0.6,
            "ytick.major.width": 0.6,
            "legend.fontsize": 8,
            "legend.frameon": False,
            "svg.fonttype": "none",
        }
    )


def draw_support(ax, curve: BoundaryCurve, particles=None, label: str | None = None):
    for k, comp in enumerate(curve.components):
        ax.fill(comp.real, comp.imag, color=FILL_COLOR, lw=0)
        ax.plot(comp.real, comp.imag, color=BOUNDARY_COLOR, lw=0.9,
                label=label if k == 0 else None)
    if particles is not None and len(particles):
        ax.plot(np.real(particles), np.imag(particles), ".", ms=2.0, color=PARTICLE_COLOR)
    ax.plot([0], [0], "+", color="k", ms=5, mew=0.6)
    ax.set_aspect("equal", adjustable="datalim")
    ax.tick_params(labelsize=7)


def render_ladder(rows, path, title: str | None = None, fmt: str = "svg"):
    """One row per entry of ``rows``: (row_title, reduced_curve, rotated_curve, particles).

    The reduced support goes in the left column, the rotated one on the right.
    """
    set_style()
    fig, axes = plt.subplots(len(rows), 2, figsize=(5.6, 2.6 * len(rows)), squeeze=False)
    for (row_title, reduced, rotated, particles), (ax_q, ax_v) in zip(rows, axes):
        draw_support(ax_q, reduced, label=_components_label(reduced))
        draw_support(ax_v, rotated, particles, label=_components_label(rotated))
        ax_q.set_title(f"Q: {row_title}")
        ax_v.set_title(f"V: {row_title}")
        for ax in (ax_q, ax_v):
            ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.08), ncol=1)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format=fmt)
    plt.close(fig)


def _components_label(curve: BoundaryCurve) -> str:
    k = curve.n_components
    return f"{k} component" + ("" if k == 1 else "s")


def render_sweep(rows, t_cr: float, path, fmt: str = "svg"):
    """r and |alpha| against |t|/t_cr from sweep rows (dicts)."""
    set_style()
    ok = [row for row in rows if row["status"] == "ok"]
    x = np.array([row["abs_t"] for row in ok]) / t_cr
    fig, ax = plt.subplots(figsize=(4.2, 3.0))
    ax.plot(x, [row["r"] for row in ok], "-", color=BOUNDARY_COLOR, lw=1.0, label="r")
    ax.plot(x, [row["abs_alpha"] for row in ok], "--", color=PARTICLE_COLOR, lw=1.0, label="|alpha|")
    ax.axvline(1.0, color="0.6", lw=0.6)
    ax.set_xlabel("|t| / t_cr")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format=fmt)
    plt.close(fig)


def render_ensemble(curve: BoundaryCurve, particles, path, title: str = "", fmt: str = "svg"):
    set_style()
    fig, ax = plt.subplots(figsize=(3.6, 3.6))
    draw_support(ax, curve, particles, label=_components_label(curve))
    ax.set_title(title)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, format=fmt)
    plt.close(fig)
