import math

import numpy as np
import pytest
import torch

import toyproblem as toy
from banditboed.critic.network import CriticNetwork
from banditboed.critic.training import (
    CriticDataset,
    TrainingConfig,
    estimate_mi,
    nwj_objective,
    train_critic,
    train_ensemble,
)


class ConstantCritic:
    def __init__(self, value):
        self.value = value

    def __call__(self, v, y):
        return torch.full((v.shape[0],), float(self.value))


def test_nwj_constant_critic_values():
    v = torch.rand(64, 2)
    y = torch.rand(64, 2)
    assert nwj_objective(ConstantCritic(1.0), v, y, v, y).item() == pytest.approx(0.0)
    # float32 forward pass: compare at single precision
    assert nwj_objective(ConstantCritic(0.0), v, y, v, y).item() == pytest.approx(
        -math.exp(-1.0), abs=1e-6
    )


def test_nwj_empty_batch_rejected():
    empty = torch.zeros((0, 2))
    with pytest.raises(ValueError):
        nwj_objective(ConstantCritic(0.0), empty, empty, empty, empty)


def test_nwj_clamp_keeps_objective_finite():
    v = torch.rand(32, 2)
    y = torch.rand(32, 2)
    obj = nwj_objective(ConstantCritic(1e6), v, y, v, y)
    assert torch.isfinite(obj)
    # clamped at exponent 20: 1e6 - exp(20)
    assert obj.item() == pytest.approx(1e6 - math.exp(20.0), rel=1e-6)


def test_nwj_optimal_critic_attains_true_mi():
    # T*(v, y) = 1 + log p(v|y)/p(v) evaluated on a large sample reaches the oracle
    design = [1.0, 0.0]
    m, arm, reward = toy.simulate(design, 200_000, seed=8)
    v, y = toy.encode(m, arm, reward)

    table = toy.outcome_table(design)
    marginal = 0.5 * table[0] + 0.5 * table[1]

    class OptimalCritic:
        def __call__(self, v_t, y_t):
            mm = v_t.numpy().argmax(axis=1)
            aa = y_t.numpy()[:, 0].astype(int)
            rr = y_t.numpy()[:, 1].astype(int)
            lik = table[mm, aa, rr]
            # p(m|y)/p(m) = p(y|m)/p(y); zero-likelihood pairs get a large negative T
            post_ratio = np.where(lik > 0, lik / marginal[aa, rr], 1e-12)
            return torch.from_numpy(1.0 + np.log(post_ratio))

    perm = np.roll(np.arange(len(m)), 1)
    vt, yt = torch.from_numpy(v), torch.from_numpy(y)
    vm = torch.from_numpy(v[perm])
    obj = nwj_objective(OptimalCritic(), vt, yt, vm, yt).item()
    assert obj == pytest.approx(toy.true_mi(design), abs=0.02)


def test_split_is_disjoint_and_seeded():
    ds = CriticDataset(np.arange(20, dtype=float)[:, None], np.arange(20, dtype=float)[:, None])
    train, held = ds.split(5, seed=3)
    assert len(train) == 15 and len(held) == 5
    all_vals = np.sort(np.concatenate([train.v[:, 0], held.v[:, 0]]))
    assert np.array_equal(all_vals, np.arange(20, dtype=np.float32))
    train2, held2 = ds.split(5, seed=3)
    assert np.array_equal(held.v, held2.v)


def test_config_validation():
    with pytest.raises(ValueError):
        TrainingConfig(epochs=0)
    with pytest.raises(ValueError):
        TrainingConfig(holdout=-1)


class TestToyTraining:
    @pytest.fixture(scope="class")
    def trained(self):
        design = [1.0, 0.0]
        dataset = toy.make_dataset(design, 20_000, seed=1)
        return train_critic(
            toy.architecture(), toy.training_config(), dataset, seed=42, design=np.array(design)
        )

    def test_recovers_oracle_mi(self, trained):
        assert trained.validation.value == pytest.approx(toy.true_mi([1.0, 0.0]), abs=0.03)

    def test_history_recorded(self, trained):
        assert len(trained.history) == toy.training_config().epochs
        assert {"epoch", "train_objective", "validation_mi", "learning_rate"} <= set(
            trained.history[0]
        )

    def test_training_deterministic(self, trained):
        dataset = toy.make_dataset([1.0, 0.0], 20_000, seed=1)
        again = train_critic(
            toy.architecture(), toy.training_config(), dataset, seed=42, design=np.array([1.0, 0.0])
        )
        for pa, pb in zip(trained.network.parameters(), again.network.parameters()):
            assert torch.equal(pa, pb)
        assert again.validation.value == trained.validation.value


def test_independent_v_and_y_gives_zero_mi():
    # both classes simulate from the same distribution, so v carries no information
    rng = np.random.default_rng(5)
    n = 20_000
    m = rng.integers(0, 2, size=n)
    arm = rng.integers(0, 2, size=n)
    reward = (rng.uniform(size=n) < 0.6).astype(np.int64)
    v, y = toy.encode(m, arm, reward)
    trained = train_critic(
        toy.architecture(), toy.training_config(epochs=40), CriticDataset(v, y), seed=7
    )
    assert -0.05 <= trained.validation.value <= 0.05


def test_estimate_mi_standard_error_shrinks():
    design = [1.0, 0.0]
    dataset = toy.make_dataset(design, 20_000, seed=2)
    net = CriticNetwork(toy.architecture(), seed=0)
    small = estimate_mi(net, CriticDataset(dataset.v[:500], dataset.y[:500]))
    big = estimate_mi(net, dataset)
    assert big.standard_error < small.standard_error
    assert big.n_joint == 20_000


def test_train_ensemble_members_differ_and_are_seeded():
    dataset = toy.make_dataset([1.0, 0.0], 4_000, seed=3)
    cfg = toy.training_config(epochs=5, holdout=500)
    members = train_ensemble(toy.architecture(), cfg, dataset, n_members=3, seed=11)
    assert len(members) == 3
    seeds = [m.seed for m in members]
    assert len(set(seeds)) == 3
    again = train_ensemble(toy.architecture(), cfg, dataset, n_members=3, seed=11)
    for a, b in zip(members, again):
        for pa, pb in zip(a.network.parameters(), b.network.parameters()):
            assert torch.equal(pa, pb)
    w0 = next(members[0].network.parameters())
    w1 = next(members[1].network.parameters())
    assert not torch.equal(w0, w1)
