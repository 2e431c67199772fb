"""Study configuration: designs, baseline pool, quiz, and payout policy."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..designs import Design, sample_baseline_design
from ..models import ModelKind
from ..tasks import MD_OPTIMAL_DESIGN, PE_WSLTS_OPTIMAL_DESIGN

CONFIG_VERSION = 1

MD_BLOCKS = 2
PE_BLOCKS = 3
TOTAL_BLOCKS = MD_BLOCKS + PE_BLOCKS
N_ARMS = 3
N_QUIZ_ITEMS = 5
BASELINE_POOL_SIZE = 10

DEFAULT_QUIZ = (
    {"text": "Each option can pay out a reward on every trial.", "answer": True},
    {"text": "The chance of reward can differ between the options.", "answer": True},
    {"text": "You will complete exactly one block of trials.", "answer": False},
    {"text": "Your bonus payment depends on the rewards you collect.", "answer": True},
    {"text": "An option that paid a reward once will always pay a reward.", "answer": False},
)


@dataclass
class StudyConfig:
    """Everything the live study needs to run one participant."""

    md_design: Design
    pe_designs: dict  # ModelKind -> 3-block Design
    baseline_pool: list  # 10 full 5-block Designs
    quiz: tuple = DEFAULT_QUIZ
    allocation_ratio: float = 0.5
    n_trials: int = 30
    max_bonus_pence: int = 100

    def __post_init__(self):
        if self.md_design.n_blocks != MD_BLOCKS or self.md_design.n_arms != N_ARMS:
            raise ValueError("model-discrimination design must be 2 blocks x 3 arms")
        self.pe_designs = {ModelKind(k): v for k, v in self.pe_designs.items()}
        if set(self.pe_designs) != set(ModelKind):
            raise ValueError("a parameter-estimation design is required for every model")
        for d in self.pe_designs.values():
            if d.n_blocks != PE_BLOCKS or d.n_arms != N_ARMS:
                raise ValueError("parameter-estimation designs must be 3 blocks x 3 arms")
        if len(self.baseline_pool) != BASELINE_POOL_SIZE:
            raise ValueError(f"baseline pool must hold {BASELINE_POOL_SIZE} designs")
        for d in self.baseline_pool:
            if d.n_blocks != TOTAL_BLOCKS or d.n_arms != N_ARMS:
                raise ValueError("baseline designs must cover all 5 blocks")
        if len(self.quiz) != N_QUIZ_ITEMS:
            raise ValueError(f"the comprehension quiz must have {N_QUIZ_ITEMS} items")
        if not 0.0 <= self.allocation_ratio <= 1.0:
            raise ValueError("allocation ratio must lie in [0, 1]")
        if self.n_trials <= 0 or self.max_bonus_pence < 0:
            raise ValueError("invalid trial count or bonus")

    def quiz_answers(self) -> list[bool]:
        return [bool(item["answer"]) for item in self.quiz]


def default_study_config(seed: int = 0) -> StudyConfig:
    """Case-study defaults: published optimal designs and a Beta(2,2) pool.

    The AEG and GLS parameter-estimation designs have no published values and
    default to distinct deterministic-arm layouts; replace them with the
    output of the design optimizer for a real study.
    """
    rng = np.random.default_rng(seed)
    pool = [sample_baseline_design(TOTAL_BLOCKS, N_ARMS, rng) for _ in range(BASELINE_POOL_SIZE)]
    pe = {
        ModelKind.WSLTS: PE_WSLTS_OPTIMAL_DESIGN,
        ModelKind.AEG: Design(np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0], [1.0, 0.0, 0.0]])),
        ModelKind.GLS: Design(np.array([[0.0, 0.0, 1.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]])),
    }
    return StudyConfig(md_design=MD_OPTIMAL_DESIGN, pe_designs=pe, baseline_pool=pool)


def save_study_config(config: StudyConfig, path) -> None:
    payload = {
        "version": CONFIG_VERSION,
        "md_design": config.md_design.to_lists(),
        "pe_designs": {ModelKind(k).name: d.to_lists() for k, d in config.pe_designs.items()},
        "baseline_pool": [d.to_lists() for d in config.baseline_pool],
        "quiz": list(config.quiz),
        "allocation_ratio": config.allocation_ratio,
        "n_trials": config.n_trials,
        "max_bonus_pence": config.max_bonus_pence,
    }
    Path(path).write_text(json.dumps(payload, indent=2) + "\n")


def load_study_config(path) -> StudyConfig:
    raw = json.loads(Path(path).read_text())
    version = raw.get("version")
    if version != CONFIG_VERSION:
        raise ValueError(f"unsupported study config version: {version}")
    return StudyConfig(
        md_design=Design(np.asarray(raw["md_design"], dtype=float)),
        pe_designs={
            ModelKind[name]: Design(np.asarray(rows, dtype=float))
            for name, rows in raw["pe_designs"].items()
        },
        baseline_pool=[Design(np.asarray(rows, dtype=float)) for rows in raw["baseline_pool"]],
        quiz=tuple(raw.get("quiz", DEFAULT_QUIZ)),
        allocation_ratio=float(raw.get("allocation_ratio", 0.5)),
        n_trials=int(raw.get("n_trials", 30)),
        max_bonus_pence=int(raw.get("max_bonus_pence", 100)),
    )
