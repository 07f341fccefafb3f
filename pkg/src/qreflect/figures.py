"""Matplotlib renderers for the export path (PNG alongside the data files)."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_hole_trend(rows: list[dict], out_png: str | Path) -> Path:
    """R_norm against hole diameter, one line per incidence angle."""
    out_png = Path(out_png)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    thetas = sorted({row["theta_over_pi"] for row in rows})
    for frac in thetas:
        pts = sorted(
            (row["d_um"], row["R_norm"])
            for row in rows
            if row["theta_over_pi"] == frac and row["R_norm"] is not None
        )
        if not pts:
            continue
        d, r = zip(*pts)
        ax.plot(d, r, marker="o", markersize=3, label=f"{frac:g}π")
    ax.set_xlabel("hole diameter d (µm)")
    ax.set_ylabel("normalized reflectivity R/R(d=0)")
    ax.legend(title="θ", fontsize=8, ncol=2)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def render_heatmap(
    d_values: list[float],
    theta_fracs: list[float],
    matrix: np.ndarray,
    out_png: str | Path,
) -> Path:
    """Normalized reflectivity over the (d, theta) plane."""
    out_png = Path(out_png)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    # single-row/column selections need a non-degenerate image extent
    d_hi = max(d_values) if max(d_values) > min(d_values) else min(d_values) + 1.0
    t_lo, t_hi = min(theta_fracs), max(theta_fracs)
    if t_hi == t_lo:
        t_hi = t_lo + 0.05
    image = ax.imshow(
        matrix,
        origin="lower",
        aspect="auto",
        extent=(min(d_values), d_hi, t_lo, t_hi),
        cmap="viridis",
    )
    fig.colorbar(image, ax=ax, label="R/R(d=0)")
    ax.set_xlabel("hole diameter d (µm)")
    ax.set_ylabel("incidence angle θ/π")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def render_potential_slice(
    slices: dict[float, tuple[np.ndarray, np.ndarray]], out_png: str | Path
) -> Path:
    """On-axis extended potential for several hole diameters."""
    out_png = Path(out_png)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for d, (z, v) in sorted(slices.items()):
        ax.plot(z, v, label=f"d = {d:g} µm")
    ax.set_xlabel("z (µm)")
    ax.set_ylabel("V_C(ρ=0, z) (natural units)")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png


def render_convergence(rows: list[dict], out_png: str | Path) -> Path:
    """R against N_z for each (epsilon, d) of a convergence study."""
    out_png = Path(out_png)
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    keys = sorted({(row["epsilon_um"], row["d_um"]) for row in rows})
    for eps, d in keys:
        pts = sorted(
            (row["N_z"], row["R_pos"])
            for row in rows
            if row["epsilon_um"] == eps and row["d_um"] == d
        )
        n, r = zip(*pts)
        ax.plot(
            [math.log2(v) for v in n],
            r,
            marker="s",
            markersize=3,
            label=f"ε = {eps * 1e3:g} nm, d = {d:g} µm",
        )
    ax.set_xlabel("log2 N_z")
    ax.set_ylabel("R_pos")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    return out_png
