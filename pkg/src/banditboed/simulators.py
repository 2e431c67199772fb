"""Stochastic simulators for the three candidate models of bandit behavior.

Each simulator advances one block of trials. The implementations are vectorized
over a batch of independent samples; the single-trajectory functions are thin
wrappers around a batch of size one, so both paths draw from identical
counter-based streams (see :mod:`banditboed.streams`).
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy import special

from .designs import BlockTrajectory, Design, ExperimentData
from .models import (
    ModelKind,
    TEMPERATURE_MAX,
    TEMPERATURE_MIN,
    validate_params,
)
from .streams import (
    BatchBlockStream,
    BlockStream,
    SLOT_BRANCH,
    SLOT_ERR,
    SLOT_INIT,
    SLOT_PICK,
    SLOT_REWARD,
    SLOT_SECOND,
    SLOT_TIE,
)

# above this, Beta(a, b) draws switch from the exact inverse CDF to a normal
# approximation (relative error of the approximation is O(1/sqrt(a+b)))
_LOG_SHAPE_EXACT_MAX = np.log(1e6)


def _beta_icdf(log_a: np.ndarray, log_b: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF Beta draws parameterized by log-shape, stable for huge shapes."""
    out = np.empty_like(u)
    big = np.maximum(log_a, log_b) > _LOG_SHAPE_EXACT_MAX
    small = ~big
    if np.any(small):
        out[small] = special.betaincinv(np.exp(log_a[small]), np.exp(log_b[small]), u[small])
    if np.any(big):
        t = log_a[big] - log_b[big]
        log_mu = -np.logaddexp(0.0, -t)
        log_one_minus = -np.logaddexp(0.0, t)
        sigma = np.exp(0.5 * (log_mu + log_one_minus - np.logaddexp(log_a[big], log_b[big])))
        mu = np.exp(log_mu)
        with np.errstate(invalid="ignore"):
            vals = np.where(sigma > 0.0, mu + sigma * special.ndtri(u[big]), mu)
        out[big] = np.clip(vals, 0.0, 1.0)
    return out


def _pick_from_mask(mask: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Uniform choice among the set bits of each row of a boolean (n, K) mask."""
    counts = mask.sum(axis=1)
    if np.any(counts == 0):
        raise ValueError("cannot pick from an empty candidate set")
    j = np.minimum((u * counts).astype(np.int64), counts - 1)
    hit = mask & (np.cumsum(mask, axis=1) == (j + 1)[:, None])
    return hit.argmax(axis=1)


def _argmax_tiebreak(values: np.ndarray, u: np.ndarray) -> np.ndarray:
    top = values.max(axis=1, keepdims=True)
    return _pick_from_mask(values == top, u)


def _pick_excluding(excluded: np.ndarray, u: np.ndarray, n_arms: int) -> np.ndarray:
    """Uniform choice among the n_arms - 1 arms other than ``excluded`` (0-based)."""
    j = np.minimum((u * (n_arms - 1)).astype(np.int64), n_arms - 2)
    return j + (j >= excluded)


def _check_block_design(block_design) -> np.ndarray:
    d = np.asarray(block_design, dtype=float).reshape(-1)
    if d.size < 2:
        raise ValueError("a block needs at least two arms")
    if np.any(d < 0.0) or np.any(d > 1.0):
        raise ValueError("reward probabilities must lie in [0, 1]")
    return d


def _uniform_first_action(stream: BatchBlockStream, n_arms: int) -> np.ndarray:
    u = stream.uniform(1, SLOT_PICK)
    return np.minimum((u * n_arms).astype(np.int64), n_arms - 1)


def _thompson_sample(alpha, beta, prev, temperature, u_arms, u_tie):
    """Arm choice by reshaped Thompson sampling, excluding the previous arm.

    Draws omega_k ~ Beta(alpha_k^(1/temp), beta_k^(1/temp)) for k != prev and
    fixes omega_prev below every admissible draw. Shapes are handled in log
    space; the temperature is clamped to avoid overflow at extreme values.
    """
    s = 1.0 / np.clip(temperature, TEMPERATURE_MIN, TEMPERATURE_MAX)
    log_a = np.log(alpha) * s[:, None]
    log_b = np.log(beta) * s[:, None]
    omega = _beta_icdf(log_a, log_b, u_arms)
    omega[np.arange(omega.shape[0]), prev] = -1.0
    return _argmax_tiebreak(omega, u_tie)


def _simulate_wslts_batch(theta, design, n_trials, stream):
    n = theta.shape[0]
    n_arms = design.size
    alpha = np.ones((n, n_arms))
    beta = np.ones((n, n_arms))
    actions = np.zeros((n, n_trials), dtype=np.int64)
    rewards = np.zeros((n, n_trials), dtype=np.int64)
    rows = np.arange(n)
    prev = np.zeros(n, dtype=np.int64)
    prev_r = np.zeros(n, dtype=np.int64)
    for t in range(1, n_trials + 1):
        if t == 1:
            a = _uniform_first_action(stream, n_arms)
        else:
            u = stream.uniform(t, SLOT_BRANCH)
            stay = np.where(prev_r == 1, u < theta[:, 0], ~(u < theta[:, 1]))
            a = prev.copy()
            idx = np.flatnonzero(~stay)
            if idx.size:
                a[idx] = _thompson_sample(
                    alpha[idx],
                    beta[idx],
                    prev[idx],
                    theta[idx, 2],
                    stream.arm_uniforms(t, n_arms)[idx],
                    stream.uniform(t, SLOT_TIE)[idx],
                )
        r = (stream.uniform(t, SLOT_REWARD) < design[a]).astype(np.int64)
        alpha[rows, a] += r
        beta[rows, a] += 1 - r
        actions[:, t - 1] = a
        rewards[:, t - 1] = r
        prev, prev_r = a, r
    return actions, rewards


def _simulate_aeg_batch(theta, design, n_trials, stream):
    n = theta.shape[0]
    n_arms = design.size
    alpha = np.ones((n, n_arms))
    beta = np.ones((n, n_arms))
    actions = np.zeros((n, n_trials), dtype=np.int64)
    rewards = np.zeros((n, n_trials), dtype=np.int64)
    rows = np.arange(n)
    prev = np.zeros(n, dtype=np.int64)
    for t in range(1, n_trials + 1):
        if t == 1:
            a = _uniform_first_action(stream, n_arms)
        else:
            u = stream.uniform(t, SLOT_BRANCH)
            v = stream.uniform(t, SLOT_SECOND)
            u_pick = stream.uniform(t, SLOT_PICK)
            means = alpha / (alpha + beta)
            greedy_set = means == means.max(axis=1, keepdims=True)
            a = np.zeros(n, dtype=np.int64)
            explore = u < theta[:, 0]
            if np.any(explore):
                idx = np.flatnonzero(explore)
                sticky = v[idx] < theta[idx, 1] + (1.0 - theta[idx, 1]) / n_arms
                a[idx] = np.where(
                    sticky, prev[idx], _pick_excluding(prev[idx], u_pick[idx], n_arms)
                )
            if np.any(~explore):
                idx = np.flatnonzero(~explore)
                m = greedy_set[idx]
                m_size = m.sum(axis=1)
                prev_greedy = m[np.arange(idx.size), prev[idx]]
                stay = prev_greedy & (v[idx] < theta[idx, 1] + (1.0 - theta[idx, 1]) / m_size)
                # "another arm among M": the previous arm is excluded whenever
                # it belongs to M and the sticky tie-break did not select it
                candidates = m.copy()
                candidates[np.arange(idx.size), prev[idx]] &= ~prev_greedy
                a[idx] = np.where(stay, prev[idx], _pick_from_mask_safe(candidates, m, u_pick[idx]))
        r = (stream.uniform(t, SLOT_REWARD) < design[a]).astype(np.int64)
        alpha[rows, a] += r
        beta[rows, a] += 1 - r
        actions[:, t - 1] = a
        rewards[:, t - 1] = r
        prev = a
    return actions, rewards


def _pick_from_mask_safe(candidates, fallback, u):
    """Pick from candidates, falling back to the unrestricted set where empty.

    Only reachable in theory when M = {previous arm} and the sticky draw lost,
    which cannot happen because the sticky threshold is then 1; kept as a guard.
    """
    empty = ~candidates.any(axis=1)
    if np.any(empty):
        candidates = candidates.copy()
        candidates[empty] = fallback[empty]
    return _pick_from_mask(candidates, u)


def _simulate_gls_batch(theta, design, n_trials, stream):
    n = theta.shape[0]
    n_arms = design.size
    alpha = np.ones((n, n_arms))
    beta = np.ones((n, n_arms))
    actions = np.zeros((n, n_trials), dtype=np.int64)
    rewards = np.zeros((n, n_trials), dtype=np.int64)
    rows = np.arange(n)
    prev_r = np.zeros(n, dtype=np.int64)
    latent = (stream.uniform(0, SLOT_INIT) < 0.5).astype(np.int64)
    for t in range(1, n_trials + 1):
        if t == 1:
            a = _uniform_first_action(stream, n_arms)
        else:
            u = stream.uniform(t, SLOT_BRANCH)
            v = stream.uniform(t, SLOT_SECOND)
            u_pick = stream.uniform(t, SLOT_PICK)
            u_err = stream.uniform(t, SLOT_ERR)
            most_rewards = alpha == alpha.max(axis=1, keepdims=True)
            fewest_failures = beta == beta.min(axis=1, keepdims=True)
            sweet = most_rewards & fewest_failures
            sweet_size = sweet.sum(axis=1)
            a = np.zeros(n, dtype=np.int64)

            idx = np.flatnonzero(sweet_size > 1)
            if idx.size:
                a[idx] = _pick_from_mask(sweet[idx], u_pick[idx])

            idx = np.flatnonzero(sweet_size == 1)
            if idx.size:
                intended = sweet[idx].argmax(axis=1)
                miss = _pick_excluding(intended, u_err[idx], n_arms)
                a[idx] = np.where(u[idx] < theta[idx, 0], intended, miss)

            idx = np.flatnonzero(sweet_size == 0)
            if idx.size:
                # transition the latent state via pi(l, r_{t-1})
                pi = theta[idx, 1 + 2 * latent[idx] + prev_r[idx]]
                exploit = v[idx] < pi
                latent[idx] = exploit.astype(np.int64)
                r_set = most_rewards[idx]
                f_set = fewest_failures[idx]
                masked_beta = np.where(r_set, beta[idx], np.inf)
                exploit_set = r_set & (beta[idx] == masked_beta.min(axis=1, keepdims=True))
                masked_alpha = np.where(f_set, alpha[idx], -np.inf)
                explore_set = f_set & (alpha[idx] == masked_alpha.max(axis=1, keepdims=True))
                target = np.where(exploit[:, None], exploit_set, explore_set)
                intended = _pick_from_mask(target, u_pick[idx])
                miss = _pick_excluding(intended, u_err[idx], n_arms)
                a[idx] = np.where(u[idx] < theta[idx, 0], intended, miss)
        r = (stream.uniform(t, SLOT_REWARD) < design[a]).astype(np.int64)
        alpha[rows, a] += r
        beta[rows, a] += 1 - r
        actions[:, t - 1] = a
        rewards[:, t - 1] = r
        prev_r = r
    return actions, rewards


_BATCH_SIMULATORS = {
    ModelKind.WSLTS: _simulate_wslts_batch,
    ModelKind.AEG: _simulate_aeg_batch,
    ModelKind.GLS: _simulate_gls_batch,
}


def simulate_block_batch(model, theta, block_design, n_trials, seed, samples, block=0):
    """Simulate one block for a batch of parameter rows.

    Returns (actions, rewards) as (n, n_trials) arrays with 1-based actions.
    ``samples`` are the per-row stream indices, so results are independent of
    batch composition and order.
    """
    model = ModelKind(model)
    theta = validate_params(model, np.atleast_2d(np.asarray(theta, dtype=float)))
    design = _check_block_design(block_design)
    samples = np.asarray(samples, dtype=np.int64)
    if samples.shape != (theta.shape[0],):
        raise ValueError("samples must be one stream index per parameter row")
    stream = BatchBlockStream(seed=seed, samples=samples, block=block)
    actions, rewards = _BATCH_SIMULATORS[model](theta, design, int(n_trials), stream)
    return actions + 1, rewards


def _single(model, params, block_design, n_trials, stream: BlockStream) -> BlockTrajectory:
    actions, rewards = simulate_block_batch(
        model,
        np.asarray(params, dtype=float)[None, :],
        block_design,
        n_trials,
        seed=stream.seed,
        samples=np.array([stream.sample]),
        block=stream.block,
    )
    return BlockTrajectory(actions[0], rewards[0])


def simulate_wslts(params, block_design, n_trials, stream: BlockStream) -> BlockTrajectory:
    """Win-Stay Lose-Thompson-Sample agent for one block."""
    return _single(ModelKind.WSLTS, params, block_design, n_trials, stream)


def simulate_aeg(params, block_design, n_trials, stream: BlockStream) -> BlockTrajectory:
    """Autoregressive epsilon-greedy agent for one block."""
    return _single(ModelKind.AEG, params, block_design, n_trials, stream)


def simulate_gls(params, block_design, n_trials, stream: BlockStream) -> BlockTrajectory:
    """Generalized latent-state agent for one block."""
    return _single(ModelKind.GLS, params, block_design, n_trials, stream)


def simulate_experiment(model, params, design: Design, n_trials, seed, sample=0) -> ExperimentData:
    """Run the matching simulator independently on every block of a design.

    Pseudo-counts reset at each block boundary; blocks are exchangeable and
    driven by independent streams keyed on (seed, sample, block).
    """
    model = ModelKind(model)
    blocks = []
    for b in range(design.n_blocks):
        stream = BlockStream(seed=seed, sample=sample, block=b)
        blocks.append(_single(model, params, design.blocks[b], n_trials, stream))
    return ExperimentData(tuple(blocks))


def simulate_experiment_batch(models, thetas, design: Design, n_trials, seed, sample_offset=0):
    """Simulate a batch of participants, possibly of mixed model kinds.

    ``models`` is an int array (n,), ``thetas`` a list/array of parameter rows
    (ragged across kinds is fine: rows are validated per kind). Returns
    (actions, rewards) of shape (n, n_blocks, n_trials) with 1-based actions.
    """
    models = np.asarray(models, dtype=np.int64)
    n = models.size
    actions = np.zeros((n, design.n_blocks, n_trials), dtype=np.int64)
    rewards = np.zeros((n, design.n_blocks, n_trials), dtype=np.int64)
    samples = sample_offset + np.arange(n, dtype=np.int64)
    for kind in ModelKind:
        idx = np.flatnonzero(models == kind)
        if not idx.size:
            continue
        theta = np.stack([np.asarray(thetas[i], dtype=float) for i in idx])
        for b in range(design.n_blocks):
            a, r = simulate_block_batch(
                kind, theta, design.blocks[b], n_trials, seed, samples[idx], block=b
            )
            actions[idx, b] = a
            rewards[idx, b] = r
    return actions, rewards


def write_trajectories_jsonl(path, models, thetas, actions, rewards) -> int:
    """Export a simulated batch as JSON-lines trajectory records.

    One record per trial with fields (sample_id, model, theta, block, trial,
    action, reward). Returns the number of records written.
    """
    models = np.asarray(models, dtype=np.int64)
    count = 0
    with Path(path).open("w") as fh:
        for i in range(models.size):
            theta = [float(x) for x in np.asarray(thetas[i], dtype=float)]
            name = ModelKind(int(models[i])).name
            for b in range(actions.shape[1]):
                for t in range(actions.shape[2]):
                    rec = {
                        "sample_id": int(i),
                        "model": name,
                        "theta": theta,
                        "block": int(b),
                        "trial": int(t + 1),
                        "action": int(actions[i, b, t]),
                        "reward": int(rewards[i, b, t]),
                    }
                    fh.write(json.dumps(rec) + "\n")
                    count += 1
    return count
