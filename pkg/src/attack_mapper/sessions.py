"""Analyst review sessions persisted in a single JSON file.

One file keyed by session id; every mutation rewrites it atomically.
Good enough for a single-host review console; a real store can replace
this behind the same interface.
"""
from __future__ import annotations

import json
import os
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ArgumentError

DECISIONS = ("accepted", "rejected")


@dataclass
class ReviewSession:
    session_id: str
    created_at: str
    model_id: str
    threshold: float
    sentences: list  # [{index, text, candidates: [{technique, name, prob}]}]
    decisions: dict = field(default_factory=dict)  # "idx:tid" -> accepted|rejected
    status: str = "open"

    def to_dict(self) -> dict:
        return {
            "session_id": self.session_id,
            "created_at": self.created_at,
            "model_id": self.model_id,
            "threshold": self.threshold,
            "sentences": self.sentences,
            "decisions": self.decisions,
            "status": self.status,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReviewSession":
        return cls(
            session_id=d["session_id"],
            created_at=d.get("created_at", ""),
            model_id=d.get("model_id", ""),
            threshold=float(d.get("threshold", 0.2)),
            sentences=list(d.get("sentences", [])),
            decisions=dict(d.get("decisions", {})),
            status=d.get("status", "open"),
        )

    def accepted_pairs(self) -> list[tuple[int, str]]:
        pairs = []
        for key, decision in self.decisions.items():
            if decision != "accepted":
                continue
            idx, tid = key.split(":", 1)
            pairs.append((int(idx), tid))
        return sorted(pairs)

    def export_document(self) -> dict:
        pairs = self.accepted_pairs()
        return {
            "sentence_annotations": [[i, t] for i, t in pairs],
            "techniques": sorted({t for _, t in pairs}),
        }


def export_bytes(session: ReviewSession) -> bytes:
    """Canonical export serialization; clients compare this byte-for-byte."""
    return json.dumps(
        session.export_document(), sort_keys=True, separators=(",", ":")
    ).encode("utf-8")


class SessionStore:
    def __init__(self, path: Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._sessions: dict[str, ReviewSession] = {}
        if self.path.exists():
            with open(self.path, "r", encoding="utf-8") as f:
                doc = json.load(f)
            for sid, entry in doc.get("sessions", {}).items():
                self._sessions[sid] = ReviewSession.from_dict(entry)

    def _flush(self) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self.path.with_suffix(".tmp")
        with open(tmp, "w", encoding="utf-8") as f:
            json.dump(
                {"sessions": {sid: s.to_dict() for sid, s in self._sessions.items()}},
                f,
                sort_keys=True,
            )
        os.replace(tmp, self.path)

    def create(self, model_id: str, threshold: float, sentences: list) -> ReviewSession:
        with self._lock:
            session = ReviewSession(
                session_id=uuid.uuid4().hex,
                created_at=time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
                model_id=model_id,
                threshold=threshold,
                sentences=sentences,
            )
            self._sessions[session.session_id] = session
            self._flush()
            return session

    def get(self, session_id: str) -> ReviewSession | None:
        with self._lock:
            return self._sessions.get(session_id)

    def record_decision(
        self, session_id: str, sentence_index: int, technique: str, decision: str
    ) -> ReviewSession:
        if decision not in DECISIONS:
            raise ArgumentError(f"decision must be one of {DECISIONS}")
        with self._lock:
            session = self._sessions[session_id]
            session.decisions[f"{sentence_index}:{technique}"] = decision
            self._flush()
            return session

    def close(self, session_id: str) -> ReviewSession:
        with self._lock:
            session = self._sessions[session_id]
            session.status = "closed"
            self._flush()
            return session
