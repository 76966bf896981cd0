"""Document-level technique mapping by per-sentence probability thresholding.

A document's predicted technique set is the union, over its sentences,
of the classes whose probability strictly exceeds the threshold.
Raising the threshold can only shrink the set, so predicted sets are
nested along a sweep grid and the per-sentence probability rows are
computed once and reused.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .classifiers import ClassifierModel, predict_proba_texts
from .corpus import GroundTruthDocument
from .errors import ArgumentError
from .stix_ingest import TechniqueRegistry

DEFAULT_GRID = tuple(round(0.1 * i, 10) for i in range(1, 9))


@dataclass(frozen=True)
class DocumentPrediction:
    doc_id: str
    threshold: float
    per_sentence: tuple[tuple[int, tuple[tuple[str, float], ...]], ...]
    predicted_set: frozenset[str]


@dataclass(frozen=True)
class DocMetrics:
    n_cu: int
    n_u: int
    n_gt: int

    @property
    def precision(self) -> float:
        return self.n_cu / self.n_u if self.n_u else 0.0

    @property
    def recall(self) -> float:
        return self.n_cu / self.n_gt if self.n_gt else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) > 0 else 0.0

    def to_dict(self) -> dict:
        return {
            "n_cu": self.n_cu,
            "n_u": self.n_u,
            "n_gt": self.n_gt,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
        }


def _check_theta(theta: float) -> None:
    if not (0.0 < theta < 1.0):
        raise ArgumentError("threshold must be in (0, 1)")


def prediction_from_probs(
    prob_rows: np.ndarray,
    registry: TechniqueRegistry,
    theta: float,
    doc_id: str = "",
) -> DocumentPrediction:
    """Thresholding step, reusable across a sweep grid."""
    _check_theta(theta)
    per_sentence = []
    union: set[str] = set()
    ids = registry.ids
    for i, row in enumerate(prob_rows):
        above = tuple(
            (ids[j], float(row[j])) for j in np.where(row > theta)[0]
        )
        per_sentence.append((i, above))
        union.update(tid for tid, _ in above)
    return DocumentPrediction(
        doc_id=doc_id,
        threshold=theta,
        per_sentence=tuple(per_sentence),
        predicted_set=frozenset(union),
    )


def predict_document(
    model: ClassifierModel,
    registry: TechniqueRegistry,
    sentences: Sequence[str],
    theta: float,
    doc_id: str = "",
) -> DocumentPrediction:
    _check_theta(theta)
    if not sentences:
        raise ArgumentError("document has no sentences")
    probs = predict_proba_texts(model, list(sentences))
    return prediction_from_probs(probs, registry, theta, doc_id=doc_id)


def _parent_set(techniques, registry: TechniqueRegistry) -> frozenset[str]:
    out = set()
    for tid in techniques:
        resolved = registry.resolve(tid) or tid.split(".", 1)[0]
        out.add(resolved)
    return frozenset(out)


def doc_metrics(
    pred: DocumentPrediction,
    truth: GroundTruthDocument,
    registry: TechniqueRegistry | None = None,
) -> DocMetrics:
    """Set arithmetic over unique techniques; truth resolved to parents."""
    if not truth.techniques:
        raise ArgumentError("ground truth lists no techniques")
    if registry is not None:
        truth_set = _parent_set(truth.techniques, registry)
    else:
        truth_set = frozenset(t.split(".", 1)[0] for t in truth.techniques)
    predicted = pred.predicted_set
    n_cu = len(predicted & truth_set)
    return DocMetrics(n_cu=n_cu, n_u=len(predicted), n_gt=len(truth_set))


@dataclass(frozen=True)
class SweepResult:
    grid: tuple[float, ...]
    per_doc: dict  # doc_id -> {theta: DocMetrics}
    macro: dict  # theta -> mean f1
    best_theta: float

    def to_dict(self, model_id: str = "") -> dict:
        return {
            "model_id": model_id,
            "grid": list(self.grid),
            "per_doc": {
                doc: {f"{t:g}": m.to_dict() for t, m in by_theta.items()}
                for doc, by_theta in self.per_doc.items()
            },
            "macro": {f"{t:g}": v for t, v in self.macro.items()},
            "best_theta": self.best_theta,
        }


def threshold_sweep(
    model: ClassifierModel,
    docs: Sequence[tuple[Sequence[str], GroundTruthDocument]],
    grid: Sequence[float] = DEFAULT_GRID,
    registry: TechniqueRegistry | None = None,
) -> SweepResult:
    """Evaluate every document at every threshold; probabilities scored once."""
    grid = tuple(grid)
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
        raise ArgumentError("grid must be non-empty and strictly increasing")
    for theta in grid:
        _check_theta(theta)
    if registry is None:
        raise ArgumentError("threshold_sweep requires the registry")
    per_doc: dict = {}
    for sentences, truth in docs:
        if not sentences:
            raise ArgumentError(f"document {truth.doc_id} has no sentences")
        probs = predict_proba_texts(model, list(sentences))
        by_theta = {}
        for theta in grid:
            pred = prediction_from_probs(probs, registry, theta, doc_id=truth.doc_id)
            by_theta[theta] = doc_metrics(pred, truth, registry)
        per_doc[truth.doc_id] = by_theta
    macro = {
        theta: float(np.mean([per_doc[d][theta].f1 for d in per_doc]))
        for theta in grid
    }
    best_theta = grid[0]
    for theta in grid:
        if macro[theta] > macro[best_theta]:
            best_theta = theta
    return SweepResult(grid=grid, per_doc=per_doc, macro=macro, best_theta=best_theta)


def sweep_csv_rows(result: SweepResult) -> list[tuple]:
    """(doc, theta, precision, recall, f1) rows for plotting."""
    rows = []
    for doc_id in sorted(result.per_doc):
        for theta in result.grid:
            m = result.per_doc[doc_id][theta]
            rows.append((doc_id, theta, m.precision, m.recall, m.f1))
    return rows
