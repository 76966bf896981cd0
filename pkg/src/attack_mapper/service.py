"""HTTP review service: stateless analysis plus persisted review sessions.

Models are loaded read-only at startup from ``<data_dir>/models/*.json``
and the registry from ``<data_dir>/registry.json``. ``data_dir`` comes
from the ``ATTACK_MAPPER_DATA_DIR`` env var unless passed explicitly.
Errors are JSON ``{code, message, details}``.
"""
from __future__ import annotations

import os
from pathlib import Path

from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from . import __version__
from .classifiers import load_model, predict_proba_texts, top_k_from_probs
from .corpus import clean_text, split_sentences
from .sessions import DECISIONS, SessionStore, export_bytes
from .stix_ingest import load_registry

DEFAULT_K = 3
DEFAULT_THETA = 0.2


class AnalyzeRequest(BaseModel):
    text: str = ""
    model_id: str = ""
    k: int = DEFAULT_K
    theta: float = DEFAULT_THETA


class DecisionRequest(BaseModel):
    sentence_index: int
    technique: str
    decision: str


def _error(status: int, code: str, message: str, details: dict | None = None):
    return JSONResponse(
        status_code=status,
        content={"code": code, "message": message, "details": details or {}},
    )


def resolve_data_dir(data_dir=None) -> Path:
    if data_dir is None:
        data_dir = os.environ.get("ATTACK_MAPPER_DATA_DIR", "./attack-mapper-data")
    return Path(data_dir)


def create_app(data_dir=None) -> FastAPI:
    data_dir = resolve_data_dir(data_dir)
    registry = load_registry(data_dir / "registry.json")
    models = {}
    models_dir = data_dir / "models"
    if models_dir.is_dir():
        for path in sorted(models_dir.glob("*.json")):
            models[path.stem] = load_model(path)
    store = SessionStore(data_dir / "sessions.json")
    app = FastAPI(title="attack-mapper", version=__version__)
    app.state.registry = registry
    app.state.models = models
    app.state.sessions = store

    def _score_sentences(model, sentences, k, theta):
        probs = predict_proba_texts(model, sentences)
        rows = []
        doc_set = set()
        for i, (text, row) in enumerate(zip(sentences, probs)):
            candidates = [
                {
                    "technique": registry.techniques[c].id,
                    "name": registry.techniques[c].name,
                    "prob": float(p),
                }
                for c, p in top_k_from_probs(row, k)
            ]
            rows.append({"index": i, "text": text, "candidates": candidates})
            doc_set.update(
                registry.techniques[c].id for c in (row > theta).nonzero()[0]
            )
        return rows, sorted(doc_set)

    def _validated(body: AnalyzeRequest):
        if not body.text.strip():
            return None, _error(400, "empty_text", "text must be non-empty")
        model = models.get(body.model_id)
        if model is None:
            return None, _error(404, "unknown_model", f"no model {body.model_id!r}")
        if not (1 <= body.k <= len(registry)):
            return None, _error(400, "bad_k", f"k must be in [1, {len(registry)}]")
        if not (0.0 < body.theta < 1.0):
            return None, _error(400, "bad_theta", "theta must be in (0, 1)")
        sentences = split_sentences(clean_text(body.text))
        if not sentences:
            return None, _error(400, "empty_text", "no sentences after cleaning")
        return (model, sentences), None

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "models": sorted(models), "version": __version__}

    @app.get("/v1/techniques")
    def techniques():
        return {
            "techniques": [
                {"id": t.id, "name": t.name, "tactics": sorted(t.tactics)}
                for t in registry.techniques
            ]
        }

    @app.get("/v1/models")
    def list_models():
        return {
            "models": [
                {
                    "model_id": mid,
                    "kind": m.spec.kind,
                    "balanced": m.spec.balanced,
                    "n_classes": m.n_classes,
                }
                for mid, m in sorted(models.items())
            ]
        }

    @app.post("/v1/analyze")
    def analyze(body: AnalyzeRequest):
        ok, err = _validated(body)
        if err is not None:
            return err
        model, sentences = ok
        rows, doc_set = _score_sentences(model, sentences, body.k, body.theta)
        return {
            "sentences": rows,
            "document": {"threshold": body.theta, "techniques": doc_set},
        }

    @app.post("/v1/sessions")
    def create_session(body: AnalyzeRequest):
        ok, err = _validated(body)
        if err is not None:
            return err
        model, sentences = ok
        rows, _ = _score_sentences(model, sentences, body.k, body.theta)
        session = store.create(
            model_id=body.model_id, threshold=body.theta, sentences=rows
        )
        return session.to_dict()

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        return session.to_dict()

    @app.post("/v1/sessions/{session_id}/decisions")
    def record_decision(session_id: str, body: DecisionRequest):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        if session.status != "open":
            return _error(409, "session_closed", "session is closed")
        if not (0 <= body.sentence_index < len(session.sentences)):
            return _error(
                422,
                "bad_sentence_index",
                f"index {body.sentence_index} outside [0, {len(session.sentences) - 1}]",
            )
        if registry.resolve(body.technique) is None:
            return _error(422, "unknown_technique", f"{body.technique!r} not in registry")
        if body.decision not in DECISIONS:
            return _error(422, "bad_decision", f"decision must be one of {DECISIONS}")
        session = store.record_decision(
            session_id, body.sentence_index, body.technique, body.decision
        )
        return session.to_dict()

    @app.get("/v1/sessions/{session_id}/export")
    def export_session(session_id: str, close: bool = False):
        session = store.get(session_id)
        if session is None:
            return _error(404, "unknown_session", f"no session {session_id!r}")
        if close and session.status == "open":
            session = store.close(session_id)
        return Response(content=export_bytes(session), media_type="application/json")

    @app.exception_handler(Exception)
    async def on_error(request: Request, exc: Exception):
        return _error(500, "internal_error", str(exc))

    return app
