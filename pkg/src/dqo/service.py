"""HTTP session API for interactive survey-taking.

Endpoints (JSON over HTTP):

    GET  /v1/models                     list loaded model bundles
    POST /v1/sessions                   open a session, get the first question
    POST /v1/sessions/{id}/answers      answer (or "don't know") the pending question
    GET  /v1/sessions/{id}              full session snapshot

Sessions live in memory with a TTL; each session mutates under its own lock
while model bundles stay immutable and shared. The engine is deterministic,
so a scripted answer sequence always reproduces the same predictions.
"""

from __future__ import annotations

import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ConfigDict, Field

from .bundle import ModelBundle
from .data import FeatureSpec
from .engine import (
    DONT_KNOW,
    AnswerError,
    SessionComplete,
    SessionState,
    apply_answer,
    next_question,
    session_steps,
    start_session,
)

DEFAULT_TTL_SECONDS = 3600.0


@dataclass
class SessionRecord:
    session_id: str
    model_id: str
    state: SessionState
    created_at: float
    expires_at: float
    lock: threading.Lock = field(default_factory=threading.Lock)


class SessionStore:
    """In-memory session map with TTL eviction."""

    def __init__(self, ttl_seconds: float = DEFAULT_TTL_SECONDS):
        self.ttl_seconds = ttl_seconds
        self._records: dict[str, SessionRecord] = {}
        self._lock = threading.Lock()

    def create(self, model_id: str, state: SessionState) -> SessionRecord:
        now = time.monotonic()
        record = SessionRecord(
            session_id=secrets.token_urlsafe(16),  # 128 bits of entropy
            model_id=model_id,
            state=state,
            created_at=now,
            expires_at=now + self.ttl_seconds,
        )
        with self._lock:
            self._records[record.session_id] = record
        return record

    def get(self, session_id: str) -> SessionRecord:
        with self._lock:
            record = self._records.get(session_id)
            if record is None:
                raise HTTPException(status_code=404, detail="unknown session")
            if time.monotonic() > record.expires_at:
                del self._records[session_id]
                raise HTTPException(status_code=410, detail="session expired")
        return record


class CreateSessionRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    model_id: str
    lam: float = Field(default=0.0, ge=0.0, alias="lambda")
    alpha: float | None = Field(default=None, gt=0.0, lt=1.0)
    prefilled: dict[str, float] = Field(default_factory=dict)


class AnswerRequest(BaseModel):
    feature_id: int
    value: float | None = None
    dont_know: bool = False


def _question_payload(spec: FeatureSpec) -> dict:
    return {
        "id": spec.id,
        "name": spec.name,
        "prompt": spec.prompt or spec.name,
        "kind": spec.kind,
        "range": list(spec.range),
        "cost": spec.cost,
        "cost_tier": spec.cost_tier,
    }


def _prediction_payload(pred) -> dict:
    return {
        "point": pred.point,
        "lower": pred.lower,
        "upper": pred.upper,
        "width": pred.width,
        "alpha": pred.alpha,
    }


def _session_payload(record: SessionRecord, bundle: ModelBundle) -> dict:
    state = record.state
    pending = state.pending
    return {
        "session_id": record.session_id,
        "model_id": record.model_id,
        "complete": state.complete,
        "prediction": _prediction_payload(state.predictions[-1]),
        "question": (
            _question_payload(bundle.specs[pending - 1]) if pending is not None else None
        ),
        "answered": len(state.known) - len(state.initial_known),
        "skipped": len(state.unavailable),
        "questions_total": state.questions_total,
        "questions_remaining": len(state.candidates()),
        "cost_spent": state.cumulative_cost,
        "flags": list(state.flags),
    }


def _snapshot_payload(record: SessionRecord, bundle: ModelBundle) -> dict:
    state = record.state
    payload = _session_payload(record, bundle)
    payload.update(
        {
            "lambda": state.lam,
            "alpha": state.alpha,
            "ordering": list(state.ordering),
            "unavailable": sorted(state.unavailable),
            "predictions": [_prediction_payload(p) for p in state.predictions],
            "trajectory": [
                {
                    "step": s.step,
                    "asked_feature": s.asked_feature,
                    "width": s.width,
                    "point": s.point,
                    "cum_cost": s.cum_cost,
                }
                for s in session_steps(state, bundle.specs)
            ],
        }
    )
    return payload


def create_app(
    bundles: dict[str, ModelBundle], ttl_seconds: float = DEFAULT_TTL_SECONDS
) -> FastAPI:
    """Build the session API over the given immutable model bundles."""
    app = FastAPI(title="dqo survey service")
    app.add_middleware(  # the respondent UI is served from a different origin
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(ttl_seconds=ttl_seconds)
    app.state.store = store

    def _bundle(model_id: str) -> ModelBundle:
        if model_id not in bundles:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}")
        return bundles[model_id]

    def _advance(state: SessionState, bundle: ModelBundle) -> SessionState:
        """Pick the next pending question, if any remain."""
        try:
            state, _ = next_question(bundle.model, state, bundle.specs, bundle.imputer)
        except SessionComplete:
            pass
        return state

    @app.get("/v1/models")
    def list_models() -> list[dict]:
        return [
            {
                "id": model_id,
                "name": bundle.name,
                "target": bundle.target_name,
                "feature_count": len(bundle.specs),
                "free_features": [
                    bundle.specs[f - 1].name for f in sorted(bundle.free_set)
                ],
                "alpha": bundle.alpha,
            }
            for model_id, bundle in sorted(bundles.items())
        ]

    @app.post("/v1/sessions", status_code=201)
    def create_session(request: CreateSessionRequest) -> dict:
        bundle = _bundle(request.model_id)
        by_name = {s.name: s.id for s in bundle.specs}
        prefilled: dict[int, float] = {}
        for name, value in request.prefilled.items():
            if name not in by_name:
                raise HTTPException(status_code=400, detail=f"unknown feature {name!r}")
            prefilled[by_name[name]] = value
        alpha = request.alpha if request.alpha is not None else bundle.alpha
        try:
            state = start_session(
                bundle.model,
                bundle.specs,
                bundle.imputer,
                bundle.delta,
                prefilled=prefilled,
                lam=request.lam,
                alpha=alpha,
            )
        except AnswerError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        state = _advance(state, bundle)
        record = store.create(request.model_id, state)
        return _session_payload(record, bundle)

    @app.post("/v1/sessions/{session_id}/answers")
    def submit_answer(session_id: str, request: AnswerRequest) -> dict:
        record = store.get(session_id)
        bundle = _bundle(record.model_id)
        if request.dont_know == (request.value is not None):
            raise HTTPException(
                status_code=400, detail="provide exactly one of 'value' or 'dont_know'"
            )
        with record.lock:
            state = record.state
            if state.pending != request.feature_id:
                raise HTTPException(
                    status_code=409,
                    detail=f"feature {request.feature_id} is not the pending question "
                    f"(waiting on {state.pending})",
                )
            value = DONT_KNOW if request.dont_know else request.value
            try:
                state = apply_answer(
                    state, request.feature_id, value, bundle.imputer, bundle.model, bundle.specs
                )
            except AnswerError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
            state = _advance(state, bundle)
            record.state = state
        return _session_payload(record, bundle)

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        record = store.get(session_id)
        bundle = _bundle(record.model_id)
        with record.lock:
            return _snapshot_payload(record, bundle)

    return app
