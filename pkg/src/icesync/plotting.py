"""Matplotlib figures written next to the CSV/JSON outputs.

All functions take already computed results and a path; nothing here feeds
back into a computation.
"""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import BoundaryNorm, ListedColormap  # noqa: E402

#: N = 1..5 get a colour, the saturated value 6 is white.
N_COLORS = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#e6ab02", "#ffffff"]
BASIN_COLORS = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def _manifold(ax, ylim=(-2.5, 2.5)):
    y = np.linspace(*ylim, 200)
    ax.plot(y ** 3 / 3 - y, y, "k--", lw=0.8)


def plot_forcing(t, f, path, ylabel="F(t)"):
    fig, ax = plt.subplots(figsize=(8, 2.5))
    ax.plot(t, f, lw=0.8)
    ax.set_xlabel("t [kyr]")
    ax.set_ylabel(ylabel)
    return _save(fig, path)


def plot_trajectory(traj, path, forcing_t=None, forcing_f=None, overlay=None):
    n = 3 if forcing_t is not None else 2
    fig, axes = plt.subplots(n, 1, figsize=(8, 2.2 * n), sharex=True)
    i = 0
    if forcing_t is not None:
        axes[0].plot(forcing_t, forcing_f, lw=0.7, color="0.3")
        axes[0].set_ylabel("F")
        i = 1
    axes[i].plot(traj.t, traj.x, lw=0.9)
    axes[i].set_ylabel("x")
    if overlay is not None:
        ax2 = axes[i].twinx()
        ax2.plot(overlay[0], overlay[1], ".", ms=2, color="tab:blue", alpha=0.6)
        ax2.invert_yaxis()
        ax2.set_ylabel("proxy")
    axes[i + 1].plot(traj.t, traj.y, lw=0.9, color="tab:red")
    axes[i + 1].set_ylabel("y")
    axes[-1].set_xlabel("t [kyr]")
    return _save(fig, path)


def plot_section(points, labels, path, title=""):
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    labels = np.asarray(labels)
    for k in np.unique(labels):
        sel = labels == k
        ax.plot(points[sel, 0], points[sel, 1], "o", ms=4,
                color=BASIN_COLORS[k % len(BASIN_COLORS)] if k >= 0 else "0.6")
    _manifold(ax)
    ax.set_xlim(-2.5, 2.5)
    ax.set_ylim(-2.5, 2.5)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    return _save(fig, path)


def plot_basin_map(bmap, path, title=None):
    fig, ax = plt.subplots(figsize=(4, 5))
    n = max(bmap.n_basins, 1)
    cmap = ListedColormap(["#ffffff"] + BASIN_COLORS[:n])
    g = bmap.grid
    ax.imshow(bmap.labels + 1, origin="lower", cmap=cmap, vmin=0, vmax=n, interpolation="nearest",
              extent=(g.xlim[0], g.xlim[1], g.ylim[0], g.ylim[1]), aspect="auto")
    _manifold(ax, g.ylim)
    if bmap.at_points_t0 is not None:
        for k, p in enumerate(bmap.at_points_t0):
            ax.plot(p[0], p[1], marker="*", ms=12, mec="k", color=BASIN_COLORS[k % len(BASIN_COLORS)])
    ax.set_xlim(*g.xlim)
    ax.set_ylim(*g.ylim)
    ax.set_title(title if title is not None else f"t0 = {bmap.t0:g} kyr")
    return _save(fig, path)


def plot_sweep(grid, path, title=""):
    fig, ax = plt.subplots(figsize=(6, 4.5))
    xs, ys = np.array(grid.x_axis.values), np.array(grid.y_axis.values)
    if grid.kind == "count":
        cmap = ListedColormap(N_COLORS)
        norm = BoundaryNorm(np.arange(0.5, 7.5), cmap.N)
        m = ax.pcolormesh(xs, ys, grid.values, cmap=cmap, norm=norm, shading="nearest")
        cb = fig.colorbar(m, ax=ax, ticks=range(1, 7))
        cb.set_label("N")
    else:
        v = np.nanmax(np.abs(grid.values)) if np.isfinite(grid.values).any() else 1.0
        m = ax.pcolormesh(xs, ys, grid.values, cmap="RdBu_r", vmin=-v, vmax=v, shading="nearest")
        fig.colorbar(m, ax=ax).set_label("lambda_max [1/kyr]")
    ax.set_xlabel(grid.x_axis.name)
    ax.set_ylabel(grid.y_axis.name)
    ax.set_title(title)
    return _save(fig, path)


def plot_colored_path(x, y, c, path, title="", clabel="", vlim=None, show_manifold=True):
    fig, ax = plt.subplots(figsize=(5, 4.5))
    v = vlim if vlim is not None else float(np.nanmax(np.abs(c)))
    sc = ax.scatter(x, y, c=c, s=3, cmap="coolwarm", vmin=-v, vmax=v)
    if show_manifold:
        _manifold(ax)
    fig.colorbar(sc, ax=ax).set_label(clabel)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title)
    return _save(fig, path)


def plot_series(t, v, path, xlabel="t [kyr]", ylabel="", title="", hline=None):
    fig, ax = plt.subplots(figsize=(7, 3))
    ax.plot(t, v, lw=0.9)
    if hline is not None:
        ax.axhline(hline, color="k", lw=0.6)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)


def plot_jump_paths(t, X, Y, paths, path, title=""):
    fig, axes = plt.subplots(2, 1, figsize=(8, 4.5), sharex=True)
    for j in range(X.shape[1]):
        axes[0].plot(t, X[:, j], "k", lw=0.8)
        axes[1].plot(t, Y[:, j], "k", lw=0.8)
    for p in paths:
        axes[0].plot(p.t, p.x, color="tab:red", lw=0.5, alpha=0.8)
        axes[1].plot(p.t, p.y, color="tab:red", lw=0.5, alpha=0.8)
    axes[0].set_ylabel("x")
    axes[1].set_ylabel("y")
    axes[1].set_xlabel("t [kyr]")
    axes[0].set_title(title)
    return _save(fig, path)
