"""Figures for preset reports, written next to the CSV/grid files."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["figure.dpi"] = 120
plt.rcParams["font.size"] = 10
plt.rcParams["xtick.top"] = True
plt.rcParams["ytick.right"] = True


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_distributions(path, columns):
    fig, ax = plt.subplots(figsize=(6, 4))
    n = columns["n"]
    for name, w in columns.items():
        if name == "n":
            continue
        w = np.asarray(w)
        logw = np.log(np.where(w > 0, w, np.nan))
        if name == "exact":
            ax.plot(n, logw, "k-", label=name)
        else:
            ax.plot(n, logw, ".", ms=4, label=name)
    ax.set_xlabel("n")
    ax.set_ylabel("ln W_n")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_series(path, columns, ylabel, logy=False):
    fig, ax = plt.subplots(figsize=(6, 4))
    t = columns["t"]
    for name, y in columns.items():
        if name != "t":
            ax.plot(t, y, label=name)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.legend(frameon=False, fontsize=7)
    return _save(fig, path)


def plot_decay_law(path, table, C):
    fig, ax = plt.subplots(figsize=(5, 4))
    for K, marker in ((0.5, "+"), (-0.5, "^")):
        sel = np.isclose(table["K"], K)
        ax.plot(table["gamma_eff"][sel], table["gamma_fit"][sel], marker, ls="none", label=f"K={K:+g}")
    x = np.linspace(0, np.nanmax(table["gamma_eff"]) * 1.05, 50)
    ax.plot(x, C * x, "k-", lw=1, label=f"gamma = {C} gamma_eff")
    ax.set_xlabel("gamma_eff = n_q n_g Gamma")
    ax.set_ylabel("fitted gamma")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_ratio(path, table):
    fig, ax = plt.subplots(figsize=(5, 4))
    for n_q, marker in ((4, "o"), (6, "x"), (8, "+")):
        sel = table["n_q"] == n_q
        ax.plot(table["gamma"][sel], table["ratio"][sel], marker + "-", label=f"n_q={n_q}")
    ax.set_xscale("log")
    ax.set_xlabel("Gamma")
    ax.set_ylabel("xi / xi0")
    ax.legend(frameon=False)
    return _save(fig, path)


def plot_panels(path, rows):
    """Grid of phase-space densities; ``rows`` is a list of lists of distributions."""
    n_rows = len(rows)
    n_cols = max(len(r) for r in rows)
    fig, axes = plt.subplots(n_rows, n_cols, figsize=(3 * n_cols, 2.4 * n_rows), squeeze=False)
    for i, row in enumerate(rows):
        for j in range(n_cols):
            ax = axes[i, j]
            if j >= len(row):
                ax.axis("off")
                continue
            d = row[j]
            extent = (0.0, 2 * math.pi, d.n[0], d.n[-1])
            ax.imshow(d.grid, origin="lower", aspect="auto", extent=extent, cmap="jet")
            ax.set_xticks([])
            ax.set_yticks([])
    return _save(fig, path)
