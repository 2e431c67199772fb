"""Counter-based random streams for reproducible, order-independent simulation.

Every uniform draw is a pure function of ``(seed, sample, block, trial, slot)``,
hashed with a SplitMix64-style mixer. Simulations therefore replay bit-identically
regardless of evaluation order, and batches of samples can be generated with
vectorized draws that match the one-sample-at-a-time path exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# Draw slots within a trial. Slots are positional, not sequential, so a branch
# that consumes fewer draws does not shift the randomness of later trials.
SLOT_BRANCH = 0  # primary branch uniform (u in the simulator pseudo-code)
SLOT_SECOND = 1  # secondary uniform (v)
SLOT_PICK = 2  # uniform choice from a candidate set
SLOT_ERR = 3  # execution-error redirection
SLOT_REWARD = 4  # Bernoulli reward draw
SLOT_TIE = 5  # argmax/argmin tie-breaking
SLOT_INIT = 6  # block-level initialization (drawn at trial 0)
SLOT_ARM_BASE = 8  # per-arm draws occupy slots SLOT_ARM_BASE + k


def _finalize(x: np.ndarray) -> np.ndarray:
    # uint64 arithmetic wraps by design
    with np.errstate(over="ignore"):
        x = (x ^ (x >> np.uint64(30))) * _MIX1
        x = (x ^ (x >> np.uint64(27))) * _MIX2
        return x ^ (x >> np.uint64(31))


def _absorb(h: np.ndarray, field) -> np.ndarray:
    f = np.asarray(field).astype(np.uint64)
    with np.errstate(over="ignore"):
        return _finalize((h + _GOLDEN) ^ (f * _MIX1))


def hash_fields(*fields) -> np.ndarray:
    """Hash integer fields (scalars or broadcastable arrays) to uint64."""
    h = np.uint64(0)
    for f in fields:
        h = _absorb(h, f)
    return h


def unit_uniform(*fields):
    """Uniform draw in [0, 1) keyed by the given integer fields.

    Broadcasts over array-valued fields; scalar fields give a Python float.
    """
    h = hash_fields(*fields)
    u = (h >> np.uint64(11)).astype(np.float64) * 2.0**-53
    if np.ndim(u) == 0:
        return float(u)
    return u


@dataclass(frozen=True)
class BlockStream:
    """Random stream for one (seed, sample, block) simulation context."""

    seed: int
    sample: int = 0
    block: int = 0

    def uniform(self, trial: int, slot: int) -> float:
        return unit_uniform(self.seed, self.sample, self.block, trial, slot)

    def arm_uniforms(self, trial: int, n_arms: int) -> np.ndarray:
        slots = SLOT_ARM_BASE + np.arange(n_arms)
        return unit_uniform(self.seed, self.sample, self.block, trial, slots)


@dataclass(frozen=True)
class BatchBlockStream:
    """Vectorized stream over a batch of sample indices, same keying as BlockStream."""

    seed: int
    samples: np.ndarray  # int array, one entry per batch row
    block: int = 0

    def uniform(self, trial: int, slot: int) -> np.ndarray:
        return unit_uniform(self.seed, self.samples, self.block, trial, slot)

    def arm_uniforms(self, trial: int, n_arms: int) -> np.ndarray:
        slots = SLOT_ARM_BASE + np.arange(n_arms)
        return unit_uniform(
            self.seed, self.samples[:, None], self.block, trial, slots[None, :]
        )
