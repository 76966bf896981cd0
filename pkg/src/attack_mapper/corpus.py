"""Cleaning, sentence splitting, and labeled-corpus handling.

A corpus is an immutable list of sentence-level samples tied to one
technique registry. CSV layout is fixed (UTF-8, comma, RFC-4180
quoting, header ``text,technique_id,subtechnique_id,technique_name``)
so exports round-trip byte-stably.
"""
from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import (
    ArgumentError,
    DatasetImportError,
    EmptyCorpusError,
    MergeError,
    ParseError,
)
from .stix_ingest import RawSample, TechniqueRegistry

CSV_HEADER = ("text", "technique_id", "subtechnique_id", "technique_name")

_CITATION = re.compile(r"\(Citation:[^)]*\)")
_MARKDOWN_LINK = re.compile(r"!?\[([^\]]*)\]\([^)]*\)")
_HTML_TAG = re.compile(r"<[^>]+>")
_URL = re.compile(r"(?:https?|ftp)://\S+|www\.\S+")
_WHITESPACE = re.compile(r"\s+")


def clean_text(raw: str) -> str:
    """Drop citation markers, links, URLs, and HTML; collapse whitespace."""
    text = _CITATION.sub(" ", raw)
    text = _MARKDOWN_LINK.sub(r"\1", text)
    text = _URL.sub(" ", text)
    text = _HTML_TAG.sub(" ", text)
    return _WHITESPACE.sub(" ", text).strip()


# Trailing-word forms that do not end a sentence even before an uppercase
# letter. Compared lowercase, with any leading punctuation stripped.
_ABBREVIATIONS = frozenset(
    {
        "e.g.",
        "i.e.",
        "etc.",
        "vs.",
        "cf.",
        "al.",
        "fig.",
        "no.",
        "inc.",
        "ltd.",
        "dr.",
        "mr.",
        "mrs.",
        "ms.",
        "st.",
        "approx.",
    }
)

_INITIAL = re.compile(r"^[A-Z]\.$")
_BOUNDARY = re.compile(r"[.!?](\s+)(?=[A-Z0-9])")


def _word_ending_at(text: str, end: int) -> str:
    start = end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:end].lstrip("\"'([{")


def split_sentences(text: str) -> list[str]:
    """Deterministic rule-based sentence splitting.

    A boundary is ``. ! ?`` followed by whitespace and an uppercase
    letter or digit, unless the terminated word is a known abbreviation
    or a single capital initial. Dots inside ids like T1059.003 are
    never boundaries (no whitespace follows them).
    """
    pieces: list[str] = []
    start = 0
    for m in _BOUNDARY.finditer(text):
        word = _word_ending_at(text, m.start() + 1)
        if word.lower() in _ABBREVIATIONS or _INITIAL.match(word):
            continue
        pieces.append(text[start : m.start() + 1])
        start = m.end()
    pieces.append(text[start:])
    out = []
    for piece in pieces:
        piece = _WHITESPACE.sub(" ", piece).strip()
        if piece:
            out.append(piece)
    return out


@dataclass(frozen=True)
class AttackSample:
    text: str
    technique_id: str
    subtechnique_id: Optional[str] = None
    technique_name: str = ""
    source_kind: str = "import"  # not persisted in CSV

    def key(self) -> tuple:
        """Identity over the persisted CSV columns."""
        return (self.text, self.technique_id, self.subtechnique_id, self.technique_name)


@dataclass(frozen=True)
class LabeledCorpus:
    samples: tuple[AttackSample, ...]
    registry: TechniqueRegistry
    stats: dict = field(default=None, compare=False)

    def __post_init__(self):
        if self.stats is None:
            counts: dict = {}
            for s in self.samples:
                counts[s.technique_id] = counts.get(s.technique_id, 0) + 1
            object.__setattr__(
                self,
                "stats",
                {
                    "n_samples": len(self.samples),
                    "n_classes_present": len(counts),
                    "class_counts": counts,
                },
            )

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def texts(self) -> list[str]:
        return [s.text for s in self.samples]

    @property
    def label_indices(self) -> np.ndarray:
        return np.array(
            [self.registry.index_of(s.technique_id) for s in self.samples],
            dtype=np.int64,
        )

    def content_equals(self, other: "LabeledCorpus") -> bool:
        return [s.key() for s in self.samples] == [s.key() for s in other.samples]


def build_dataset(
    raws: Sequence[RawSample],
    registry: TechniqueRegistry,
    split_descriptions: bool = True,
) -> LabeledCorpus:
    """Clean and sentence-split raw samples into a labeled corpus."""
    samples: list[AttackSample] = []
    for raw in raws:
        cleaned = clean_text(raw.text)
        if not cleaned:
            continue
        sentences = split_sentences(cleaned) if split_descriptions else [cleaned]
        for sent in sentences:
            samples.append(
                AttackSample(
                    text=sent,
                    technique_id=raw.technique_id,
                    subtechnique_id=raw.subtechnique_id,
                    technique_name=raw.technique_name,
                    source_kind=raw.source_kind,
                )
            )
    if not samples:
        raise EmptyCorpusError("no usable samples after cleaning")
    return LabeledCorpus(samples=tuple(samples), registry=registry)


def export_csv(corpus: LabeledCorpus, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for s in corpus.samples:
            writer.writerow(
                [s.text, s.technique_id, s.subtechnique_id or "", s.technique_name]
            )


def import_csv(path, registry: TechniqueRegistry) -> LabeledCorpus:
    samples: list[AttackSample] = []
    bad_rows: list[tuple[int, str]] = []
    try:
        with open(path, "r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration:
                raise EmptyCorpusError(f"{path}: empty file")
            if tuple(h.strip() for h in header) != CSV_HEADER:
                raise ParseError(f"{path}: line 1: unexpected header {header!r}")
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(CSV_HEADER):
                    raise ParseError(f"{path}: line {lineno}: expected 4 fields")
                text, tid, sub, name = row
                parent = registry.resolve(tid.strip())
                if parent is None:
                    bad_rows.append((lineno, tid))
                    continue
                samples.append(
                    AttackSample(
                        text=text,
                        technique_id=parent,
                        subtechnique_id=sub.strip() or None,
                        technique_name=name,
                    )
                )
    except csv.Error as exc:
        raise ParseError(f"{path}: malformed CSV: {exc}") from exc
    if bad_rows:
        raise DatasetImportError(
            f"{path}: {len(bad_rows)} rows with unknown technique ids "
            f"(first: line {bad_rows[0][0]} -> {bad_rows[0][1]!r})",
            rows=bad_rows,
        )
    if not samples:
        raise EmptyCorpusError(f"{path}: no data rows")
    return LabeledCorpus(samples=tuple(samples), registry=registry)


@dataclass
class ImportReport:
    accepted: int = 0
    rejected: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"accepted": self.accepted, "rejected": self.rejected}


def import_tram(path, registry: TechniqueRegistry) -> tuple[LabeledCorpus, ImportReport]:
    """Import a TRAM-style export: a JSON list of sentence/technique records.

    Records whose technique does not resolve through the registry are
    rejected row by row and listed in the report instead of aborting the
    import.
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    if isinstance(doc, dict) and "sentences" in doc:
        records = doc["sentences"]
    elif isinstance(doc, list):
        records = doc
    else:
        raise ParseError(f"{path}: expected a list of records")
    report = ImportReport()
    samples: list[AttackSample] = []
    for i, rec in enumerate(records):
        text = clean_text(str(rec.get("text", "")))
        tid = str(rec.get("technique_id") or rec.get("attack_id") or "").strip()
        if not text:
            report.rejected.append({"row": i, "reason": "empty text"})
            continue
        parent = registry.resolve(tid)
        if parent is None:
            report.rejected.append({"row": i, "reason": f"unknown technique {tid!r}"})
            continue
        samples.append(
            AttackSample(
                text=text,
                technique_id=parent,
                subtechnique_id=tid if "." in tid else None,
                technique_name=str(rec.get("technique_name", "")),
                source_kind="tram",
            )
        )
    if not samples:
        raise EmptyCorpusError(f"{path}: no importable records")
    report.accepted = len(samples)
    return LabeledCorpus(samples=tuple(samples), registry=registry), report


def merge(a: LabeledCorpus, b: LabeledCorpus) -> LabeledCorpus:
    """Concatenate two corpora over the same registry; duplicates kept."""
    if a.registry.fingerprint() != b.registry.fingerprint():
        raise MergeError("corpora were built against different registries")
    return LabeledCorpus(samples=a.samples + b.samples, registry=a.registry)


@dataclass(frozen=True)
class SplitPair:
    train: LabeledCorpus
    test: LabeledCorpus
    seed: int
    ratio: float


def stratified_split(corpus: LabeledCorpus, ratio: float, seed: int) -> SplitPair:
    """Per-class split: test takes floor(n_c * (1 - ratio)) samples.

    Classes with a single sample go entirely to train. Selection within
    a class is uniform from the seed; the same (corpus, ratio, seed)
    always produces the same membership.
    """
    if not (0.0 < ratio < 1.0):
        raise ArgumentError("ratio must be in (0, 1)")
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot split an empty corpus")
    by_class: dict = {}
    for i, s in enumerate(corpus.samples):
        by_class.setdefault(s.technique_id, []).append(i)
    rng = np.random.default_rng(seed)
    test_idx: set = set()
    for tid in sorted(by_class):
        members = by_class[tid]
        # epsilon guards floor against 10 * (1 - 0.8) = 1.999...
        n_test = int(np.floor(len(members) * (1.0 - ratio) + 1e-9))
        if len(members) == 1 or n_test == 0:
            continue
        picked = rng.permutation(len(members))[:n_test]
        test_idx.update(members[p] for p in picked)
    train_samples = tuple(
        s for i, s in enumerate(corpus.samples) if i not in test_idx
    )
    test_samples = tuple(s for i, s in enumerate(corpus.samples) if i in test_idx)
    return SplitPair(
        train=LabeledCorpus(samples=train_samples, registry=corpus.registry),
        test=LabeledCorpus(samples=test_samples, registry=corpus.registry),
        seed=seed,
        ratio=ratio,
    )


@dataclass(frozen=True)
class GroundTruthDocument:
    doc_id: str
    title: str
    source_url: str
    sentences: tuple[str, ...]
    techniques: frozenset[str]


def load_ground_truth(path, registry: TechniqueRegistry | None = None) -> GroundTruthDocument:
    """Load a document fixture: {doc_id, title, source_url, sentences, techniques}."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: not valid JSON: {exc}") from exc
    try:
        gt = GroundTruthDocument(
            doc_id=doc["doc_id"],
            title=doc.get("title", ""),
            source_url=doc.get("source_url", ""),
            sentences=tuple(s for s in doc["sentences"] if s.strip()),
            techniques=frozenset(doc["techniques"]),
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing key {exc}") from exc
    if not gt.sentences:
        raise ArgumentError(f"{path}: document has no sentences")
    if registry is not None:
        unknown = [t for t in gt.techniques if registry.resolve(t) is None]
        if unknown:
            raise DatasetImportError(
                f"{path}: ground truth lists unknown techniques {unknown}",
                rows=[(0, t) for t in unknown],
            )
    return gt
