"""Session state machine for the live two-phase study.

Every stochastic outcome (condition, design draws, rewards, tie-breaks) is a
pure function of the session seed, and everything the session does is written
to its append-only event log, so state = fold(events) exactly.
"""

from __future__ import annotations

import itertools
import math
import threading
import time
import uuid
from dataclasses import dataclass, field

import numpy as np

from ..models import ModelKind
from ..streams import unit_uniform
from .config import MD_BLOCKS, TOTAL_BLOCKS, StudyConfig
from .store import EventRecord, SessionStore

PHASES = ("instructions", "quiz", "md", "pe", "done")

# domain tags for seed-derived draws
_D_ALLOC = 1
_D_REWARD = 2

_INFERENCE_TIMEOUT_MS = 2000.0

_PERMS3 = list(itertools.permutations(range(3)))


class ServiceError(Exception):
    def __init__(self, code: str, message: str, status: int = 400):
        super().__init__(message)
        self.code = code
        self.message = message
        self.status = status


def _u(seed: int, *fields) -> float:
    return unit_uniform(seed, *fields)


@dataclass
class Session:
    id: str
    seed: int
    condition: str
    allocation: dict = field(default_factory=dict)
    phase: str = "instructions"
    block: int = 1
    trial: int = 1
    block_probs: list = field(default_factory=list)
    actions: list = field(default_factory=list)
    rewards: list = field(default_factory=list)
    inferred_model: int | None = None
    md_posterior: list | None = None
    awaiting_inference: bool = False
    total_reward: int = 0
    bonus_pence: int | None = None
    quiz_attempts: int = 0
    seq: int = 0
    created_ts: float | None = None
    completed_ts: float | None = None

    def last_reward(self):
        for block in reversed(self.rewards):
            if block:
                return int(block[-1])
        return None

    def state_view(self, n_trials: int) -> dict:
        return {
            "id": self.id,
            "phase": self.phase,
            "condition": self.condition,
            "block": self.block,
            "trial": min(self.trial, n_trials),
            "block_complete": self.trial > n_trials,
            "total_blocks": TOTAL_BLOCKS,
            "trials_per_block": n_trials,
            "total_reward": self.total_reward,
            "last_reward": self.last_reward(),
            "awaiting_inference": self.awaiting_inference,
            "inferred_model": self.inferred_model,
            "quiz_attempts": self.quiz_attempts,
        }

    def full_state(self) -> dict:
        """Canonical state used to check event-sourcing round trips."""
        return {
            "id": self.id,
            "seed": self.seed,
            "condition": self.condition,
            "allocation": self.allocation,
            "phase": self.phase,
            "block": self.block,
            "trial": self.trial,
            "block_probs": [[float(p) for p in row] for row in self.block_probs],
            "actions": [list(map(int, a)) for a in self.actions],
            "rewards": [list(map(int, r)) for r in self.rewards],
            "inferred_model": self.inferred_model,
            "md_posterior": self.md_posterior,
            "awaiting_inference": self.awaiting_inference,
            "total_reward": self.total_reward,
            "bonus_pence": self.bonus_pence,
            "quiz_attempts": self.quiz_attempts,
        }


def _derive_allocation(config: StudyConfig, seed: int) -> dict:
    """Condition, designs, and block orders as pure functions of the seed."""
    optimal = _u(seed, _D_ALLOC, 0) < config.allocation_ratio
    alloc: dict = {"condition": "optimal" if optimal else "baseline"}
    swap = _u(seed, _D_ALLOC, 2) < 0.5
    if optimal:
        rows = config.md_design.blocks
        alloc["md_pool_index"] = None
    else:
        idx = min(int(_u(seed, _D_ALLOC, 1) * len(config.baseline_pool)), len(config.baseline_pool) - 1)
        rows = config.baseline_pool[idx].blocks[:MD_BLOCKS]
        alloc["md_pool_index"] = idx
    order = (1, 0) if swap else (0, 1)
    alloc["md_block_order"] = list(order)
    alloc["md_rows"] = [list(map(float, rows[i])) for i in order]
    return alloc


def _derive_pe_rows(config: StudyConfig, seed: int, condition: str, model: int | None):
    perm = _PERMS3[min(int(_u(seed, _D_ALLOC, 4) * 6), 5)]
    if condition == "optimal":
        rows = config.pe_designs[ModelKind(model)].blocks
        pool_index = None
    else:
        pool_index = min(
            int(_u(seed, _D_ALLOC, 3) * len(config.baseline_pool)), len(config.baseline_pool) - 1
        )
        rows = config.baseline_pool[pool_index].blocks[MD_BLOCKS:]
    return [list(map(float, rows[i])) for i in perm], list(perm), pool_index


class StudyEngine:
    """All session operations, each serialized per session under its lock."""

    def __init__(
        self,
        config: StudyConfig,
        store: SessionStore,
        inference=None,
        service_seed: int | None = None,
    ):
        self.config = config
        self.store = store
        self.inference = inference
        self._rng = np.random.default_rng(service_seed)
        self.sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self.load_errors: list[dict] = []
        self._load_existing()

    # -- lifecycle ---------------------------------------------------------

    def create_session(self) -> Session:
        session_id = uuid.uuid4().hex
        seed = int(self._rng.integers(0, 2**62))
        alloc = _derive_allocation(self.config, seed)
        session = Session(
            id=session_id,
            seed=seed,
            condition=alloc["condition"],
            allocation=alloc,
            block_probs=[list(row) for row in alloc["md_rows"]],
        )
        session.actions = [[]]
        session.rewards = [[]]
        with self._registry_lock:
            self.sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        record = self._append(
            session,
            "created",
            {
                "seed": seed,
                "condition": session.condition,
                "allocation_ratio": self.config.allocation_ratio,
                "md_rows": alloc["md_rows"],
                "md_block_order": alloc["md_block_order"],
                "md_pool_index": alloc["md_pool_index"],
            },
        )
        session.created_ts = record.ts
        self.store.snapshot(session_id, session.full_state())
        return session

    def _lock(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            lock = self._locks.get(session_id)
        if lock is None:
            raise ServiceError("session_not_found", f"no session {session_id}", status=404)
        return lock

    def get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise ServiceError("session_not_found", f"no session {session_id}", status=404)
        return session

    def state(self, session_id: str) -> dict:
        with self._lock(session_id):
            session = self.get_session(session_id)
            view = session.state_view(self.config.n_trials)
            if session.phase in ("instructions", "quiz"):
                view["quiz"] = [item["text"] for item in self.config.quiz]
            return view

    # -- quiz --------------------------------------------------------------

    def submit_quiz(self, session_id: str, answers) -> dict:
        with self._lock(session_id):
            session = self.get_session(session_id)
            if session.phase not in ("instructions", "quiz"):
                raise ServiceError("wrong_phase", "quiz is only available before the task", 409)
            answers = [bool(a) for a in answers]
            if len(answers) != len(self.config.quiz):
                raise ServiceError("invalid_arm", "quiz needs one answer per item", 422)
            if session.phase == "instructions":
                self._change_phase(session, "quiz")
            passed = answers == self.config.quiz_answers()
            session.quiz_attempts += 1
            self._append(
                session, "quiz_attempt",
                {"answers": answers, "passed": passed, "attempt": session.quiz_attempts},
            )
            self._change_phase(session, "md" if passed else "instructions")
            self.store.snapshot(session.id, session.full_state())
            return {"passed": passed, "phase": session.phase}

    # -- trials ------------------------------------------------------------

    def submit_choice(self, session_id: str, arm) -> dict:
        with self._lock(session_id):
            session = self.get_session(session_id)
            if session.phase not in ("md", "pe"):
                raise ServiceError("wrong_phase", f"cannot choose during {session.phase}", 409)
            if session.awaiting_inference:
                self._finish_md(session)  # retriable; raises if still unavailable
            if not isinstance(arm, int) or isinstance(arm, bool) or not 1 <= arm <= 3:
                raise ServiceError("invalid_arm", "arm must be an integer in 1..3", 422)
            if session.trial > self.config.n_trials:
                raise ServiceError("wrong_phase", "block already complete", 409)
            block, trial = session.block, session.trial
            prob = session.block_probs[block - 1][arm - 1]
            reward = int(_u(session.seed, _D_REWARD, block, trial) < prob)
            self._append(session, "choice", {"block": block, "trial": trial, "arm": int(arm)})
            self._append(session, "reward", {"block": block, "trial": trial, "value": reward})
            session.actions[block - 1].append(int(arm))
            session.rewards[block - 1].append(reward)
            session.total_reward += reward
            session.trial += 1
            if session.trial > self.config.n_trials:
                self._on_block_complete(session)
            return {"reward": reward, "state": session.state_view(self.config.n_trials)}

    def _on_block_complete(self, session: Session) -> None:
        if session.block == MD_BLOCKS:
            try:
                self._finish_md(session)
            except ServiceError:
                # the choice that completed the block already succeeded; the
                # session pauses and the next choice surfaces the failure
                pass
        elif session.block == TOTAL_BLOCKS:
            self._change_phase(session, "done")
            self.store.snapshot(session.id, session.full_state())
        else:
            session.block += 1
            session.trial = 1
            session.actions.append([])
            session.rewards.append([])

    def _finish_md(self, session: Session) -> None:
        """Transition into the parameter-estimation phase, inferring the model first
        for optimal-condition sessions. Fails closed if inference is unavailable."""
        model = None
        if session.condition == "optimal":
            if self.inference is None:
                session.awaiting_inference = True
                raise ServiceError(
                    "inference_unavailable", "model inference is not available", 503
                )
            start = time.perf_counter()
            try:
                probs = np.asarray(
                    self.inference(session.actions[:MD_BLOCKS], session.rewards[:MD_BLOCKS]),
                    dtype=float,
                )
            except Exception as exc:
                session.awaiting_inference = True
                raise ServiceError(
                    "inference_unavailable", f"model inference failed: {exc}", 503
                ) from exc
            latency_ms = (time.perf_counter() - start) * 1000.0
            if latency_ms > _INFERENCE_TIMEOUT_MS:
                session.awaiting_inference = True
                raise ServiceError(
                    "inference_unavailable",
                    f"model inference took {latency_ms:.0f} ms",
                    503,
                )
            top = probs.max()
            ties = np.flatnonzero(probs >= top - 1e-12)
            pick = ties[min(int(_u(session.seed, _D_ALLOC, 5) * ties.size), ties.size - 1)]
            model = int(pick) + 1
            session.inferred_model = model
            session.md_posterior = [float(p) for p in probs]
            session.awaiting_inference = False
            self._append(
                session,
                "inference",
                {
                    "posterior": session.md_posterior,
                    "model": model,
                    "latency_ms": latency_ms,
                    "tie": bool(ties.size > 1),
                },
            )
        rows, order, pool_index = _derive_pe_rows(
            self.config, session.seed, session.condition, model
        )
        session.block_probs.extend(rows)
        session.actions.append([])
        session.rewards.append([])
        session.block = MD_BLOCKS + 1
        session.trial = 1
        self._change_phase(
            session,
            "pe",
            extra={"pe_rows": rows, "pe_block_order": order, "pe_pool_index": pool_index},
        )
        self.store.snapshot(session.id, session.full_state())

    # -- debrief -----------------------------------------------------------

    def debrief(self, session_id: str) -> dict:
        with self._lock(session_id):
            session = self.get_session(session_id)
            if session.phase != "done":
                raise ServiceError("wrong_phase", "session is not complete", 409)
            if session.bonus_pence is None:
                max_trials = TOTAL_BLOCKS * self.config.n_trials
                bonus = math.floor(
                    self.config.max_bonus_pence * session.total_reward / max_trials
                )
                session.bonus_pence = int(bonus)
                record = self._append(
                    session,
                    "completed",
                    {"bonus_pence": session.bonus_pence, "total_reward": session.total_reward},
                )
                session.completed_ts = record.ts
                self.store.snapshot(session.id, session.full_state())
            return {
                "bonus_pence": session.bonus_pence,
                "total_reward": session.total_reward,
                "inferred_model": session.inferred_model,
                "condition": session.condition,
            }

    # -- events ------------------------------------------------------------

    def _append(self, session: Session, kind: str, payload: dict) -> EventRecord:
        record = self.store.append(session.id, session.seq, kind, payload)
        session.seq += 1
        return record

    def _change_phase(self, session: Session, to: str, extra: dict | None = None) -> None:
        payload = {"from": session.phase, "to": to}
        if extra:
            payload.update(extra)
        session.phase = to
        self._append(session, "phase_change", payload)

    # -- replay ------------------------------------------------------------

    def _load_existing(self) -> None:
        for session_id in self.store.session_ids():
            try:
                session = replay_events(self.store.read_events(session_id), self.config.n_trials)
            except Exception as exc:
                self.load_errors.append({"session_id": session_id, "error": str(exc)})
                continue
            with self._registry_lock:
                self.sessions[session_id] = session
                self._locks[session_id] = threading.Lock()

    def export_dataset(self) -> tuple[list[dict], dict]:
        """Analysis-ready records for completed sessions, ordered by session id.

        Incomplete or unreadable sessions are listed in the manifest instead.
        """
        records = []
        skipped = []
        for session_id in self.store.session_ids():
            try:
                events = self.store.read_events(session_id)
                session = replay_events(events, self.config.n_trials)
            except Exception as exc:
                skipped.append({"session_id": session_id, "status": "corrupt", "error": str(exc)})
                continue
            if session.phase != "done":
                skipped.append({"session_id": session_id, "status": session.phase})
                continue
            records.append(
                {
                    "session_id": session.id,
                    "condition": session.condition,
                    "md_design": session.block_probs[:MD_BLOCKS],
                    "pe_design": session.block_probs[MD_BLOCKS:],
                    "inferred_model": session.inferred_model,
                    "blocks": [
                        {"actions": a, "rewards": r}
                        for a, r in zip(session.actions, session.rewards)
                    ],
                    "total_reward": session.total_reward,
                    "created_ts": session.created_ts,
                    "completed_ts": session.completed_ts,
                }
            )
        manifest = {
            "n_records": len(records),
            "skipped": skipped,
            "load_errors": self.load_errors,
        }
        return records, manifest


def replay_events(events: list[EventRecord], n_trials: int = 30) -> Session:
    """Rebuild a session by folding its event log; pure and idempotent."""
    if not events or events[0].kind != "created":
        raise ValueError("log must start with a created event")
    for i, ev in enumerate(events):
        if ev.seq != i:
            raise ValueError(f"event sequence corrupted at index {i}")
    head = events[0]
    session = Session(
        id=head.session_id,
        seed=head.payload["seed"],
        condition=head.payload["condition"],
        allocation={
            "condition": head.payload["condition"],
            "md_pool_index": head.payload.get("md_pool_index"),
            "md_block_order": head.payload.get("md_block_order"),
            "md_rows": head.payload["md_rows"],
        },
        block_probs=[list(row) for row in head.payload["md_rows"]],
    )
    session.actions = [[]]
    session.rewards = [[]]
    session.created_ts = head.ts
    session.seq = 1
    for ev in events[1:]:
        if ev.kind == "quiz_attempt":
            session.quiz_attempts += 1
        elif ev.kind == "phase_change":
            session.phase = ev.payload["to"]
            if ev.payload["to"] == "pe":
                session.block_probs.extend([list(r) for r in ev.payload["pe_rows"]])
                session.actions.append([])
                session.rewards.append([])
                session.block = MD_BLOCKS + 1
                session.trial = 1
                session.awaiting_inference = False
        elif ev.kind == "choice":
            session.actions[ev.payload["block"] - 1].append(ev.payload["arm"])
        elif ev.kind == "reward":
            block = ev.payload["block"]
            session.rewards[block - 1].append(ev.payload["value"])
            session.total_reward += ev.payload["value"]
            session.trial += 1
            if session.trial > n_trials:
                if session.block == MD_BLOCKS:
                    session.awaiting_inference = session.condition == "optimal"
                elif session.block < TOTAL_BLOCKS:
                    session.block += 1
                    session.trial = 1
                    session.actions.append([])
                    session.rewards.append([])
        elif ev.kind == "inference":
            session.inferred_model = ev.payload["model"]
            session.md_posterior = ev.payload["posterior"]
            session.awaiting_inference = False
        elif ev.kind == "completed":
            session.bonus_pence = ev.payload["bonus_pence"]
            session.completed_ts = ev.ts
        session.seq = ev.seq + 1
    return session
