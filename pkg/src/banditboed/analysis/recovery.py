"""In-silico validation: model recovery and parameter recovery studies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..critic.posterior import ParamGrid, posterior_density, posterior_discrete
from ..designs import Design
from ..models import ModelKind, validate_params
from ..simulators import simulate_experiment_batch
from .entropy import differential_entropy, shannon_entropy


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows: true model, columns: inferred (MAP) model."""

    counts: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.counts, dtype=np.int64)
        if c.ndim != 2 or np.any(c < 0):
            raise ValueError("counts must be a nonnegative 2-D array")
        object.__setattr__(self, "counts", c)

    def normalized(self) -> np.ndarray:
        row = self.counts.sum(axis=1, keepdims=True)
        out = np.zeros_like(self.counts, dtype=float)
        np.divide(self.counts, row, out=out, where=row > 0)
        return out

    def mean_diagonal(self) -> float:
        return float(np.mean(np.diag(self.normalized())))


@dataclass(frozen=True)
class EntropyReport:
    entropies: np.ndarray
    kind: str  # "shannon" | "differential"
    condition: str

    @property
    def mean(self) -> float:
        return float(np.mean(self.entropies))


def map_decision(probs: np.ndarray, rng: np.random.Generator, tie_tol: float = 1e-12):
    """Index of the posterior mode; exact ties are broken uniformly at random."""
    p = np.asarray(probs, dtype=float)
    top = p.max()
    ties = np.flatnonzero(p >= top - tie_tol)
    if ties.size == 1:
        return int(ties[0]), False
    return int(rng.choice(ties)), True


@dataclass
class RecoveryResult:
    confusion: ConfusionMatrix
    entropy: EntropyReport
    true_models: np.ndarray
    map_models: np.ndarray
    posteriors: np.ndarray
    n_ties: int = 0


def recovery_study(
    task,
    design: Design,
    members,
    n_sims: int,
    seed: int = 0,
    condition: str = "optimal",
) -> RecoveryResult:
    """Simulate prior draws at a design and score amortized model recovery.

    For each simulated participant the ensemble posterior over models is
    computed; MAP decisions against the truth populate the confusion matrix
    and per-participant Shannon entropies form the entropy report.
    """
    sim = task.sample_dataset(design, n_sims, seed=seed)
    post = posterior_discrete(members, sim.dataset.y, task.class_features(), task.prior())
    rng = np.random.default_rng(seed + 1)
    maps = np.zeros(n_sims, dtype=np.int64)
    n_ties = 0
    for i in range(n_sims):
        idx, tied = map_decision(post[i], rng)
        maps[i] = idx + 1
        n_ties += tied
    counts = np.zeros((3, 3), dtype=np.int64)
    for true_m, map_m in zip(sim.models, maps):
        counts[true_m - 1, map_m - 1] += 1
    entropies = np.array([shannon_entropy(p) for p in post])
    return RecoveryResult(
        confusion=ConfusionMatrix(counts),
        entropy=EntropyReport(entropies=entropies, kind="shannon", condition=condition),
        true_models=sim.models,
        map_models=maps,
        posteriors=post,
        n_ties=n_ties,
    )


@dataclass
class ParameterRecoveryResult:
    model: ModelKind
    true_thetas: np.ndarray
    mean_posteriors: list  # one averaged grid density per true theta
    posterior_means: np.ndarray  # (n_thetas, n_params)
    mean_abs_errors: np.ndarray  # (n_thetas, n_params)
    entropy: EntropyReport
    grid: ParamGrid = field(repr=False, default=None)


def parameter_recovery(
    task,
    design: Design,
    members,
    true_thetas,
    n_sims: int,
    seed: int = 0,
    grid: ParamGrid | None = None,
    condition: str = "optimal",
) -> ParameterRecoveryResult:
    """Average posteriors over repeated simulations at fixed ground truths.

    For every true parameter vector, ``n_sims`` datasets are simulated and the
    per-dataset grid posteriors are averaged; reports posterior-mean errors
    and per-dataset differential entropies.
    """
    kind = ModelKind(task.model)
    grid = grid if grid is not None else task.grid()
    thetas = np.atleast_2d(np.asarray(true_thetas, dtype=float))
    validate_params(kind, thetas)
    all_entropies = []
    mean_posts = []
    post_means = np.zeros((thetas.shape[0], thetas.shape[1]))
    for j, theta in enumerate(thetas):
        models = np.full(n_sims, int(kind), dtype=np.int64)
        actions, rewards = simulate_experiment_batch(
            models,
            np.tile(theta, (n_sims, 1)),
            design,
            task.n_trials,
            seed=seed + 7919 * j,
        )
        y = task.encode_data(actions, rewards)
        acc = np.zeros(grid.n_nodes)
        for i in range(n_sims):
            dens = posterior_density(members, y[i], grid)
            acc += dens
            all_entropies.append(differential_entropy(dens, grid.weights))
        mean_post = acc / n_sims
        mean_posts.append(mean_post)
        post_means[j] = grid.mean(mean_post)
    report = EntropyReport(
        entropies=np.asarray(all_entropies), kind="differential", condition=condition
    )
    return ParameterRecoveryResult(
        model=kind,
        true_thetas=thetas,
        mean_posteriors=mean_posts,
        posterior_means=post_means,
        mean_abs_errors=np.abs(post_means - thetas),
        entropy=report,
        grid=grid,
    )
