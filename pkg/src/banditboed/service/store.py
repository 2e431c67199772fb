"""Append-only event log, one JSON-lines file per session."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from pathlib import Path

EVENT_KINDS = (
    "created",
    "quiz_attempt",
    "choice",
    "reward",
    "phase_change",
    "inference",
    "completed",
)


@dataclass(frozen=True)
class EventRecord:
    session_id: str
    seq: int
    ts: float
    kind: str
    payload: dict

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")


class SessionStore:
    """Durable per-session logs plus a snapshot written at phase boundaries.

    Appends for one session must be serialized by the caller (the engine holds
    a per-session lock); appends for distinct sessions may run concurrently.
    """

    def __init__(self, base_dir):
        self.base = Path(base_dir)
        (self.base / "sessions").mkdir(parents=True, exist_ok=True)
        (self.base / "snapshots").mkdir(parents=True, exist_ok=True)

    def _log_path(self, session_id: str) -> Path:
        return self.base / "sessions" / f"{session_id}.jsonl"

    def append(self, session_id: str, seq: int, kind: str, payload: dict) -> EventRecord:
        record = EventRecord(
            session_id=session_id, seq=seq, ts=time.time(), kind=kind, payload=payload
        )
        with self._log_path(session_id).open("a") as fh:
            fh.write(json.dumps(asdict(record)) + "\n")
        return record

    def snapshot(self, session_id: str, state: dict) -> None:
        path = self.base / "snapshots" / f"{session_id}.json"
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(state))
        tmp.replace(path)

    def session_ids(self) -> list[str]:
        return sorted(p.stem for p in (self.base / "sessions").glob("*.jsonl"))

    def read_events(self, session_id: str) -> list[EventRecord]:
        path = self._log_path(session_id)
        if not path.exists():
            raise FileNotFoundError(session_id)
        events = []
        for line in path.read_text().splitlines():
            if not line.strip():
                continue
            raw = json.loads(line)
            events.append(EventRecord(**raw))
        return events
