"""Sentence-level evaluation: confusion counts, weighted metrics, AC@K.

Weighted precision/recall/F1 follow the per-class definitions with
support weighting; AC@K is the plain sample-level top-K accuracy.
Zero-denominator metrics are defined as 0 so reports are total.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ArgumentError,
    DatasetImportError,
    ParseError,
    ValidationError,
)
from .stix_ingest import TechniqueRegistry


@dataclass
class ConfusionCounts:
    tp: np.ndarray
    fp: np.ndarray
    fn: np.ndarray
    support: np.ndarray
    pairs: dict  # (true_idx, pred_idx) -> count


def confusion(true_labels, predicted_labels, registry: TechniqueRegistry) -> ConfusionCounts:
    true = np.asarray(true_labels, dtype=np.int64)
    pred = np.asarray(predicted_labels, dtype=np.int64)
    if true.shape != pred.shape or true.size == 0:
        raise ArgumentError("need equal-length, non-empty label arrays")
    n_classes = len(registry)
    tp = np.zeros(n_classes, dtype=np.int64)
    fp = np.zeros(n_classes, dtype=np.int64)
    fn = np.zeros(n_classes, dtype=np.int64)
    support = np.bincount(true, minlength=n_classes).astype(np.int64)
    pairs: dict = {}
    for t, p in zip(true, pred):
        pairs[(int(t), int(p))] = pairs.get((int(t), int(p)), 0) + 1
        if t == p:
            tp[t] += 1
        else:
            fn[t] += 1
            fp[p] += 1
    return ConfusionCounts(tp=tp, fp=fp, fn=fn, support=support, pairs=pairs)


@dataclass
class EvalReport:
    per_class: dict  # technique id -> {precision, recall, f1, support}
    weighted: dict  # {precision, recall, f1}
    ac_at_k: dict  # k -> accuracy
    n_samples: int
    model_id: str = ""

    def to_dict(self) -> dict:
        return {
            "model_id": self.model_id,
            "n_samples": self.n_samples,
            "weighted": self.weighted,
            "ac_at_k": {str(k): v for k, v in sorted(self.ac_at_k.items())},
            "per_class": self.per_class,
        }


def _safe_div(num: float, den: float) -> float:
    return num / den if den > 0 else 0.0


def topk_hits(true: np.ndarray, probs: np.ndarray, k: int) -> np.ndarray:
    """True where the true class ranks in the top k (ties: lower index first)."""
    n, c = probs.shape
    idx = np.arange(c)
    hits = np.empty(n, dtype=bool)
    for i in range(n):
        order = np.lexsort((idx, -probs[i]))
        hits[i] = true[i] in order[:k]
    return hits


def classification_report(
    true_labels,
    proba_rows,
    registry: TechniqueRegistry,
    k_values: Sequence[int] = (1, 3),
    model_id: str = "",
) -> EvalReport:
    true = np.asarray(true_labels, dtype=np.int64)
    probs = np.asarray(proba_rows, dtype=np.float64)
    if probs.ndim != 2 or probs.shape[0] != true.shape[0] or true.size == 0:
        raise ArgumentError("need matching non-empty labels and probability rows")
    if probs.shape[1] != len(registry):
        raise ArgumentError("probability rows do not match the registry size")
    for k in k_values:
        if not (1 <= k <= len(registry)):
            raise ArgumentError(f"k={k} outside [1, {len(registry)}]")
    pred = np.argmax(probs, axis=1)
    counts = confusion(true, pred, registry)
    per_class: dict = {}
    w_precision = w_recall = w_f1 = 0.0
    for idx, tech in enumerate(registry.techniques):
        p = _safe_div(counts.tp[idx], counts.tp[idx] + counts.fp[idx])
        r = _safe_div(counts.tp[idx], counts.tp[idx] + counts.fn[idx])
        f1 = _safe_div(2 * p * r, p + r)
        s = int(counts.support[idx])
        per_class[tech.id] = {"precision": p, "recall": r, "f1": f1, "support": s}
        w_precision += s * p
        w_recall += s * r
        w_f1 += s * f1
    n = int(true.size)
    ac = {int(k): float(topk_hits(true, probs, int(k)).mean()) for k in k_values}
    return EvalReport(
        per_class=per_class,
        weighted={
            "precision": w_precision / n,
            "recall": w_recall / n,
            "f1": w_f1 / n,
        },
        ac_at_k=ac,
        n_samples=n,
        model_id=model_id,
    )


@dataclass(frozen=True)
class Misprediction:
    text: str
    true_id: str
    predicted_id: str
    true_tactics: frozenset[str]
    predicted_tactics: frozenset[str]

    @property
    def same_tactic(self) -> bool:
        return bool(self.true_tactics & self.predicted_tactics)


def collect_mispredictions(
    texts: Sequence[str],
    true_labels,
    predicted_labels,
    registry: TechniqueRegistry,
) -> list[Misprediction]:
    true = np.asarray(true_labels, dtype=np.int64)
    pred = np.asarray(predicted_labels, dtype=np.int64)
    if not (len(texts) == true.size == pred.size):
        raise ArgumentError("texts and label arrays must align")
    out = []
    for text, t, p in zip(texts, true, pred):
        if t == p:
            continue
        true_ref = registry.techniques[int(t)]
        pred_ref = registry.techniques[int(p)]
        out.append(
            Misprediction(
                text=text,
                true_id=true_ref.id,
                predicted_id=pred_ref.id,
                true_tactics=true_ref.tactics,
                predicted_tactics=pred_ref.tactics,
            )
        )
    return out


@dataclass(frozen=True)
class TacticAgreement:
    same_tactic: int
    total: int

    @property
    def empty(self) -> bool:
        return self.total == 0

    @property
    def fraction(self) -> float:
        return self.same_tactic / self.total if self.total else 0.0


def tactic_agreement(mispredictions: Iterable[Misprediction]) -> TacticAgreement:
    """Fraction of mispredictions whose tactics intersect the truth's."""
    total = same = 0
    for m in mispredictions:
        total += 1
        if m.same_tactic:
            same += 1
    return TacticAgreement(same_tactic=same, total=total)


def write_mispredictions_csv(path, mispredictions, registry: TechniqueRegistry) -> None:
    names = {t.id: t.name for t in registry.techniques}
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["text", "true_id", "pred_id", "true_name", "pred_name", "same_tactic"])
        for m in mispredictions:
            writer.writerow(
                [
                    m.text,
                    m.true_id,
                    m.predicted_id,
                    names.get(m.true_id, ""),
                    names.get(m.predicted_id, ""),
                    str(m.same_tactic).lower(),
                ]
            )


@dataclass
class ExternalPredictions:
    """Probability rows from an out-of-repo model, aligned to the registry."""

    label_order: tuple[str, ...]
    rows: np.ndarray


def import_predictions(path, registry: TechniqueRegistry) -> ExternalPredictions:
    """Read header (JSON array of technique ids) + space-separated rows."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.rstrip("\n") for line in f]
    lines = [ln for ln in lines if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: empty predictions file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: header is not a JSON array: {exc}") from exc
    if not isinstance(header, list) or not header:
        raise ParseError(f"{path}: header must be a non-empty JSON array")
    col_for: list[int] = []
    unknown = []
    for tid in header:
        resolved = registry.resolve(str(tid))
        if resolved is None:
            unknown.append(tid)
        else:
            col_for.append(registry.index_of(resolved))
    if unknown:
        raise DatasetImportError(
            f"{path}: header lists unknown techniques {unknown}",
            rows=[(0, t) for t in unknown],
        )
    n_classes = len(registry)
    rows = np.zeros((len(lines) - 1, n_classes))
    for r, line in enumerate(lines[1:], start=1):
        values = line.split()
        if len(values) != len(header):
            raise ValidationError(
                f"{path}: row {r}: expected {len(header)} values, got {len(values)}"
            )
        try:
            vals = np.array([float(v) for v in values])
        except ValueError as exc:
            raise ParseError(f"{path}: row {r}: non-numeric value: {exc}") from exc
        if abs(vals.sum() - 1.0) > 1e-2:
            raise ValidationError(
                f"{path}: row {r}: probabilities sum to {vals.sum():.6f}, not 1"
            )
        for j, col in enumerate(col_for):
            rows[r - 1, col] += vals[j]
    rows /= rows.sum(axis=1, keepdims=True)
    return ExternalPredictions(label_order=registry.ids, rows=rows)
