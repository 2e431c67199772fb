"""Post-hoc exploration of the fitted utility surface: slicing and local optima."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .gp import GPSurrogate


@dataclass(frozen=True)
class SliceGrid:
    """GP mean and standard deviation on a 2-D slice of the design space."""

    axes: tuple
    axis_values: tuple
    fixed: np.ndarray
    mean: np.ndarray
    std: np.ndarray


def slice_utility(gp: GPSurrogate, fixed, axes, resolution: int = 50) -> SliceGrid:
    """Evaluate the surrogate on a lattice over two free design axes.

    ``fixed`` is a full-length design vector whose entries at the two ``axes``
    are ignored; every other coordinate is held at its given value.
    """
    fixed = np.asarray(fixed, dtype=float).reshape(-1)
    dim = gp.X.shape[1]
    if fixed.size != dim:
        raise ValueError(f"fixed assignment must have length {dim}")
    i, j = axes
    if i == j or not (0 <= i < dim and 0 <= j < dim):
        raise ValueError("axes must be two distinct design dimensions")
    grid = np.linspace(0.0, 1.0, resolution)
    points = np.tile(fixed, (resolution * resolution, 1))
    gi, gj = np.meshgrid(grid, grid, indexing="ij")
    points[:, i] = gi.reshape(-1)
    points[:, j] = gj.reshape(-1)
    mean, std = gp.predict(points)
    return SliceGrid(
        axes=(i, j),
        axis_values=(grid.copy(), grid.copy()),
        fixed=fixed,
        mean=mean.reshape(resolution, resolution),
        std=std.reshape(resolution, resolution),
    )


def write_slice_csv(slice_grid: SliceGrid, path) -> None:
    i, j = slice_grid.axes
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"d{i + 1}", f"d{j + 1}", "mean", "std"])
        for a, va in enumerate(slice_grid.axis_values[0]):
            for b, vb in enumerate(slice_grid.axis_values[1]):
                writer.writerow(
                    [f"{va:.6f}", f"{vb:.6f}",
                     f"{slice_grid.mean[a, b]:.8f}", f"{slice_grid.std[a, b]:.8f}"]
                )


@dataclass(frozen=True)
class LocalOptimum:
    design: np.ndarray
    utility: float
    rank: int
    gradient_norm: float


def _projected_gradient(x: np.ndarray, g: np.ndarray) -> np.ndarray:
    pg = g.copy()
    pg[(x <= 0.0) & (g < 0.0)] = 0.0
    pg[(x >= 1.0) & (g > 0.0)] = 0.0
    return pg


def _ascend(gp: GPSurrogate, x0: np.ndarray, grad_tol: float, max_iter: int):
    x = np.clip(x0, 0.0, 1.0)
    fx = float(gp.predict(x[None, :])[0][0])
    step = 0.1
    for _ in range(max_iter):
        g = gp.mean_gradient(x)
        pg = _projected_gradient(x, g)
        norm = float(np.linalg.norm(pg))
        if norm <= grad_tol:
            return x, fx, norm
        # backtracking ascent with a projected step
        improved = False
        while step >= 1e-12:
            x_new = np.clip(x + step * g, 0.0, 1.0)
            f_new = float(gp.predict(x_new[None, :])[0][0])
            if f_new > fx + 1e-12:
                x, fx = x_new, f_new
                step = min(step * 2.0, 0.5)
                improved = True
                break
            step *= 0.5
        if not improved:
            # no uphill step exists along g; report the current gradient norm
            return x, fx, norm
    return None


def find_local_optima(
    gp: GPSurrogate,
    n_restarts: int = 20,
    seed: int = 0,
    grad_tol: float = 1e-4,
    dedup_tol: float = 0.02,
    max_iter: int = 2000,
) -> list[LocalOptimum]:
    """Gradient ascent on the GP mean from uniform restarts, deduplicated.

    Converged points closer than ``dedup_tol`` in max-norm collapse to the
    higher-mean representative; results are ranked by GP-mean utility.
    """
    dim = gp.X.shape[1]
    rng = np.random.default_rng(seed)
    found = []
    for _ in range(n_restarts):
        start = rng.uniform(size=dim)
        result = _ascend(gp, start, grad_tol, max_iter)
        if result is None:
            warnings.warn("gradient ascent did not converge from one restart", stacklevel=2)
            continue
        x, fx, norm = result
        if norm > grad_tol:
            warnings.warn("restart stalled above the gradient tolerance", stacklevel=2)
            continue
        found.append((x, fx, norm))
    found.sort(key=lambda t: -t[1])
    unique: list[tuple] = []
    for x, fx, norm in found:
        if all(np.max(np.abs(x - u[0])) > dedup_tol for u in unique):
            unique.append((x, fx, norm))
    return [
        LocalOptimum(design=x, utility=fx, rank=r + 1, gradient_norm=norm)
        for r, (x, fx, norm) in enumerate(unique)
    ]


def write_optima_csv(optima, path) -> None:
    """Optima table with columns rank, MI, d1..dD."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        dim = len(optima[0].design) if optima else 0
        writer.writerow(["rank", "mi"] + [f"d{i + 1}" for i in range(dim)])
        for opt in optima:
            writer.writerow(
                [opt.rank, f"{opt.utility:.6f}"] + [f"{v:.6f}" for v in opt.design]
            )
