"""Statistical machinery for the empirical evaluation: correlations, z-scores,
Welch's t, and the chi-square independence test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats


def fisher_z(r: float) -> float:
    """Fisher z-transform atanh(r); defined for |r| < 1."""
    r = float(r)
    if abs(r) >= 1.0:
        raise ValueError("correlation must satisfy |r| < 1")
    return float(np.arctanh(r))


@dataclass(frozen=True)
class WelchResult:
    t: float
    df: float
    p_value: float


def welch_t_test(group_a, group_b) -> WelchResult:
    """Two-sided Welch's t-test with Welch-Satterthwaite degrees of freedom."""
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each group needs at least two values")
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va <= 0 and vb <= 0:
        raise ValueError("groups have zero variance")
    se_a, se_b = va / a.size, vb / b.size
    t = (a.mean() - b.mean()) / np.sqrt(se_a + se_b)
    df = (se_a + se_b) ** 2 / (se_a**2 / (a.size - 1) + se_b**2 / (b.size - 1))
    p = 2.0 * stats.t.sf(abs(t), df)
    return WelchResult(t=float(t), df=float(df), p_value=float(p))


@dataclass(frozen=True)
class ChiSquareResult:
    chi2: float
    df: int
    p_value: float


def chi_square_test(table) -> ChiSquareResult:
    """Pearson chi-square against independence for an R x C count table."""
    obs = np.asarray(table, dtype=float)
    if obs.ndim != 2 or np.any(obs < 0):
        raise ValueError("table must be a 2-D array of nonnegative counts")
    row = obs.sum(axis=1)
    col = obs.sum(axis=0)
    if np.any(row <= 0) or np.any(col <= 0):
        raise ValueError("all margins must be positive")
    expected = np.outer(row, col) / obs.sum()
    if np.any(expected == 0):
        raise ValueError("zero expected cell")
    chi2 = float(np.sum((obs - expected) ** 2 / expected))
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    return ChiSquareResult(chi2=chi2, df=df, p_value=float(stats.chi2.sf(chi2, df)))


@dataclass(frozen=True)
class CorrelationResult:
    matrix: np.ndarray
    degenerate: np.ndarray  # per-parameter flag: zero-variance marginal


def posterior_correlations(values, weights) -> CorrelationResult:
    """Weighted Pearson correlations between parameter pairs of a posterior.

    ``values`` are support points (n, d) with probability ``weights`` (n,).
    A zero-variance marginal yields 0 correlation with that parameter, flagged.
    """
    x = np.atleast_2d(np.asarray(values, dtype=float))
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size != x.shape[0]:
        raise ValueError("weights must be one value per support point")
    if np.any(w < 0) or w.sum() <= 0:
        raise ValueError("weights must be nonnegative with positive total")
    w = w / w.sum()
    mean = w @ x
    centered = x - mean
    cov = (centered * w[:, None]).T @ centered
    var = np.diag(cov).copy()
    degenerate = var <= 1e-300
    sd = np.sqrt(np.where(degenerate, 1.0, var))
    corr = cov / np.outer(sd, sd)
    corr[degenerate, :] = 0.0
    corr[:, degenerate] = 0.0
    np.fill_diagonal(corr, 1.0)
    return CorrelationResult(matrix=corr, degenerate=degenerate)


def mean_absolute_z(corr_matrix: np.ndarray) -> float:
    """Mean |fisher z| over the below-diagonal entries of a correlation matrix."""
    m = np.asarray(corr_matrix, dtype=float)
    idx = np.tril_indices(m.shape[0], k=-1)
    return float(np.mean([abs(fisher_z(r)) for r in m[idx]]))


@dataclass(frozen=True)
class DisentanglementReport:
    optimal_scores: np.ndarray
    baseline_scores: np.ndarray
    welch: WelchResult


def disentanglement_comparison(optimal_matrices, baseline_matrices) -> DisentanglementReport:
    """Compare per-participant parameter entanglement between conditions.

    Each participant contributes the mean absolute Fisher z-score of their
    posterior correlation matrix; groups are compared by a two-sided Welch test.
    """
    if not len(optimal_matrices) or not len(baseline_matrices):
        raise ValueError("both groups must be non-empty")
    a = np.array([mean_absolute_z(m) for m in optimal_matrices])
    b = np.array([mean_absolute_z(m) for m in baseline_matrices])
    return DisentanglementReport(
        optimal_scores=a, baseline_scores=b, welch=welch_t_test(a, b)
    )
