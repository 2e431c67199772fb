"""HTTP+JSON API for the study service.

Endpoints: POST /sessions, GET /sessions/{id}/state, POST /sessions/{id}/quiz,
POST /sessions/{id}/choice, GET /sessions/{id}/debrief, GET /export (operator
token required). Errors carry machine-readable codes.
"""

from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Header, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from ..critic.network import load_critic
from ..critic.posterior import posterior_discrete
from ..tasks import ModelDiscriminationTask
from .config import StudyConfig
from .engine import ServiceError, StudyEngine
from .store import SessionStore

ENV_BIND = "BANDITBOED_BIND"
ENV_DATA_DIR = "BANDITBOED_DATA_DIR"
ENV_ENSEMBLE_DIR = "BANDITBOED_ENSEMBLE_DIR"
ENV_OPERATOR_TOKEN = "BANDITBOED_OPERATOR_TOKEN"
ENV_STATIC_DIR = "BANDITBOED_STATIC_DIR"


class EnsembleInference:
    """Online MAP inference over the model indicator from the MD blocks."""

    def __init__(self, members, task: ModelDiscriminationTask | None = None):
        if not members:
            raise ValueError("ensemble must be non-empty")
        self.members = members
        self.task = task or ModelDiscriminationTask()

    @classmethod
    def from_dir(cls, ensemble_dir) -> "EnsembleInference":
        paths = sorted(Path(ensemble_dir).glob("*.critic"))
        if not paths:
            raise FileNotFoundError(f"no critic files in {ensemble_dir}")
        return cls([load_critic(p) for p in paths])

    def __call__(self, actions, rewards):
        import numpy as np

        a = np.asarray(actions, dtype=np.int64)[None, :, :]
        r = np.asarray(rewards, dtype=np.int64)[None, :, :]
        y = self.task.encode_data(a, r)[0]
        return posterior_discrete(self.members, y, self.task.class_features(), self.task.prior())


class QuizRequest(BaseModel):
    answers: list[bool]


class ChoiceRequest(BaseModel):
    arm: int


def create_app(
    config: StudyConfig,
    data_dir,
    inference=None,
    operator_token: str | None = None,
    service_seed: int | None = None,
    static_dir=None,
) -> FastAPI:
    store = SessionStore(data_dir)
    engine = StudyEngine(config, store, inference=inference, service_seed=service_seed)
    app = FastAPI(title="banditboed study service")
    app.state.engine = engine

    @app.exception_handler(ServiceError)
    async def service_error_handler(_request: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"error": {"code": exc.code, "message": exc.message}},
        )

    @app.post("/sessions")
    def create_session():
        session = engine.create_session()
        return engine.state(session.id)

    @app.get("/sessions/{session_id}/state")
    def get_state(session_id: str):
        return engine.state(session_id)

    @app.post("/sessions/{session_id}/quiz")
    def submit_quiz(session_id: str, body: QuizRequest):
        return engine.submit_quiz(session_id, body.answers)

    @app.post("/sessions/{session_id}/choice")
    def submit_choice(session_id: str, body: ChoiceRequest):
        return engine.submit_choice(session_id, body.arm)

    @app.get("/sessions/{session_id}/debrief")
    def debrief(session_id: str):
        return engine.debrief(session_id)

    @app.get("/export")
    def export(x_operator_token: str | None = Header(default=None)):
        if not operator_token or x_operator_token != operator_token:
            return JSONResponse(
                status_code=401,
                content={"error": {"code": "unauthorized", "message": "operator token required"}},
            )
        records, manifest = engine.export_dataset()
        return {"manifest": manifest, "records": records}

    if static_dir and Path(static_dir).is_dir():
        app.mount("/app", StaticFiles(directory=static_dir, html=True), name="app")

    return app


def app_from_env() -> FastAPI:
    """Build the app from environment variables (used by the serve command)."""
    from .config import load_study_config

    data_dir = os.environ.get(ENV_DATA_DIR, "study-data")
    config_path = os.environ.get("BANDITBOED_STUDY_CONFIG")
    if config_path:
        config = load_study_config(config_path)
    else:
        from .config import default_study_config

        config = default_study_config()
    inference = None
    ensemble_dir = os.environ.get(ENV_ENSEMBLE_DIR)
    if ensemble_dir:
        inference = EnsembleInference.from_dir(ensemble_dir)
    return create_app(
        config,
        data_dir,
        inference=inference,
        operator_token=os.environ.get(ENV_OPERATOR_TOKEN),
        static_dir=os.environ.get(ENV_STATIC_DIR),
    )
