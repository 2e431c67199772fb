"""Static SVG renderings of the standard reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

MODEL_LABELS = ("WSLTS", "AEG", "GLS")


def plot_confusion(matrix, path, title="Model recovery", labels=MODEL_LABELS) -> None:
    m = np.asarray(matrix, dtype=float)
    fig, ax = plt.subplots(figsize=(4, 3.5))
    im = ax.imshow(m, cmap="Greens", vmin=0.0, vmax=1.0)
    for i in range(m.shape[0]):
        for j in range(m.shape[1]):
            ax.text(
                j, i, f"{m[i, j]:.2f}",
                ha="center", va="center",
                color="black" if m[i, j] < 0.6 else "white",
            )
    ax.set_xticks(range(len(labels)), labels)
    ax.set_yticks(range(len(labels)), labels)
    ax.set_xlabel("inferred model")
    ax.set_ylabel("true model")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_entropy_hist(groups: dict, path, kind="shannon", title=None) -> None:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    colors = {"optimal": "tab:green", "baseline": "tab:orange"}
    for label, values in groups.items():
        ax.hist(
            np.asarray(values, dtype=float),
            bins=30,
            alpha=0.55,
            label=f"{label} (mean {np.mean(values):.3f})",
            color=colors.get(label),
            density=True,
        )
    ax.set_xlabel(f"posterior {kind} entropy (nats)")
    ax.set_ylabel("density")
    ax.legend()
    ax.set_title(title or "Posterior entropy by condition (lower is better)")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_bo_trace(utilities, n_initial, path) -> None:
    u = np.asarray(utilities, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(u, ".", alpha=0.5, label="evaluations")
    ax.plot(np.maximum.accumulate(u), "-", color="tab:red", label="incumbent")
    ax.axvline(n_initial - 0.5, color="gray", linestyle=":", label="end of initial designs")
    ax.set_xlabel("evaluation")
    ax.set_ylabel("estimated mutual information (nats)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_slice(slice_grid, path) -> None:
    i, j = slice_grid.axes
    fig, axes = plt.subplots(1, 2, figsize=(8, 3.2))
    for ax, field, name in ((axes[0], slice_grid.mean, "GP mean"), (axes[1], slice_grid.std, "GP std")):
        im = ax.imshow(
            field.T, origin="lower", extent=(0, 1, 0, 1), aspect="auto", cmap="viridis"
        )
        ax.set_xlabel(f"d{i + 1}")
        ax.set_ylabel(f"d{j + 1}")
        ax.set_title(name)
        fig.colorbar(im, ax=ax, shrink=0.9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_marginals(grid, densities: dict, path, param_names, title=None) -> None:
    """Overlaid 1-D marginal posteriors per parameter, one panel per axis."""
    n = len(grid.axes)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3.0), squeeze=False)
    colors = {"optimal": "tab:green", "baseline": "tab:orange"}
    for k in range(n):
        ax = axes[0][k]
        for label, dens in densities.items():
            vals, marg = grid.marginal(dens, k)
            ax.plot(vals, marg, label=label, color=colors.get(label))
        ax.set_xlabel(param_names[k])
        if grid.axes[k].values[0] > 0 and grid.axes[k].values[-1] / grid.axes[k].values[0] > 50:
            ax.set_xscale("log")
    axes[0][0].set_ylabel("marginal density")
    axes[0][-1].legend()
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
