"""Bayesian-optimization outer loop over the design space.

Each candidate design is scored by simulating a fresh dataset there, training
a critic, and taking the validation mutual-information estimate; a GP
surrogate over these noisy scores proposes the next design by Expected
Improvement.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from ..critic.training import TrainedCritic, train_critic
from ..designs import Design
from .acquisition import maximize_acquisition
from .gp import GPSurrogate, gp_fit


@dataclass
class BOState:
    """Evaluated designs, their utilities, and the evaluation budget."""

    dim: int
    budget: int
    n_initial: int
    designs: list = field(default_factory=list)
    utilities: list = field(default_factory=list)

    def record(self, design: np.ndarray, utility: float) -> None:
        if len(self.designs) >= self.budget:
            raise RuntimeError("evaluation budget exhausted")
        self.designs.append(np.asarray(design, dtype=float))
        self.utilities.append(float(utility))

    @property
    def n_evaluations(self) -> int:
        return len(self.designs)

    @property
    def incumbent_index(self) -> int:
        return int(np.argmax(self.utilities))

    @property
    def incumbent_design(self) -> np.ndarray:
        return self.designs[self.incumbent_index]

    @property
    def incumbent_utility(self) -> float:
        return self.utilities[self.incumbent_index]

    def design_matrix(self) -> np.ndarray:
        return np.stack(self.designs)


def _trace_line(state: BOState, gp: GPSurrogate | None, phase: str) -> dict:
    i = state.n_evaluations - 1
    line = {
        "iteration": i,
        "phase": phase,
        "design": [float(v) for v in state.designs[i]],
        "mi": state.utilities[i],
        "incumbent_mi": state.incumbent_utility,
    }
    if gp is not None:
        line["gp"] = {
            "lengthscales": [float(v) for v in gp.lengthscales],
            "signal_variance": gp.signal_variance,
            "noise_variance": gp.noise_variance,
            "mean": gp.mean,
        }
    return line


def run_boed(
    evaluate,
    dim: int,
    budget: int,
    n_initial: int,
    seed: int = 0,
    trace_path=None,
    fit_restarts: int = 4,
    acquisition_starts: int = 64,
) -> tuple[BOState, GPSurrogate]:
    """Optimize a black-box utility over [0, 1]^dim.

    ``evaluate(design, iteration) -> float`` is called once per evaluation;
    initial designs are scrambled Sobol points, the rest maximize EI under a
    GP refit after every evaluation. Returns the final state and surrogate.
    """
    if budget < n_initial or n_initial < 2:
        raise ValueError("budget must cover at least two initial evaluations")
    state = BOState(dim=dim, budget=budget, n_initial=n_initial)
    sobol = qmc.Sobol(d=dim, scramble=True, seed=seed)
    initial = sobol.random(n_initial)
    trace_fh = Path(trace_path).open("w") if trace_path is not None else None
    gp = None
    try:
        for i in range(n_initial):
            state.record(initial[i], evaluate(initial[i], i))
            if trace_fh:
                trace_fh.write(json.dumps(_trace_line(state, None, "initial")) + "\n")
        for i in range(n_initial, budget):
            gp = gp_fit(
                state.design_matrix(),
                np.asarray(state.utilities),
                n_restarts=fit_restarts,
                seed=seed + 13 * i,
            )
            candidate = maximize_acquisition(
                gp, state.incumbent_utility, dim, n_starts=acquisition_starts, seed=seed + 29 * i
            )
            state.record(candidate, evaluate(candidate, i))
            if trace_fh:
                trace_fh.write(json.dumps(_trace_line(state, gp, "bo")) + "\n")
    finally:
        if trace_fh:
            trace_fh.close()
    gp = gp_fit(
        state.design_matrix(),
        np.asarray(state.utilities),
        n_restarts=max(fit_restarts, 8),
        seed=seed,
    )
    return state, gp


def load_trace(path) -> list[dict]:
    with Path(path).open() as fh:
        return [json.loads(line) for line in fh if line.strip()]


@dataclass
class OptimizationResult:
    state: BOState
    surrogate: GPSurrogate
    best_design: Design
    best_critic: TrainedCritic


def optimize_design(
    task,
    samples: int,
    training_config,
    budget: int,
    n_initial: int,
    ensemble_unused=None,
    seed: int = 0,
    trace_path=None,
) -> OptimizationResult:
    """Design search for an inference task: simulate, train, score, repeat.

    Keeps the critic trained at the incumbent design so the winning network is
    returned alongside the design itself.
    """
    best: dict = {"mi": -np.inf, "critic": None, "design": None}

    def evaluate(flat_design, iteration):
        design = Design.from_flat(flat_design, task.n_arms)
        sim = task.sample_dataset(design, samples, seed=seed + 1009 * iteration)
        trained = train_critic(
            task.architecture(),
            training_config,
            sim.dataset,
            seed=seed + iteration,
            design=flat_design,
        )
        if trained.validation.value > best["mi"]:
            best.update(mi=trained.validation.value, critic=trained, design=design)
        return trained.validation.value

    state, gp = run_boed(
        evaluate, task.design_dim, budget, n_initial, seed=seed, trace_path=trace_path
    )
    return OptimizationResult(
        state=state, surrogate=gp, best_design=best["design"], best_critic=best["critic"]
    )
