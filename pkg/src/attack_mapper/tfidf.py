"""TF-IDF vectorizer over unigram/bigram token streams.

The weighting formula is pinned so fitted models are reproducible
bit-for-bit:

    idf(t) = ln((1 + N) / (1 + df(t))) + 1
    w(t)   = tf(t) * idf(t)        (tf raw, or 1 + ln(tf) if sublinear)

followed by optional L2 normalization. Vocabulary selection keeps the
``max_features`` terms with the highest total corpus count, ties broken
lexicographically ascending; kept terms are indexed in lexicographic
order.
"""
from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .errors import ArgumentError, FitError


@dataclass(frozen=True)
class VectorizerConfig:
    ngram_min: int = 1
    ngram_max: int = 2
    max_features: int = 10000
    sublinear_tf: bool = False
    l2_normalize: bool = True
    idf_smoothing: str = "add-one"

    def __post_init__(self):
        if not (1 <= self.ngram_min <= self.ngram_max):
            raise ArgumentError("need 1 <= ngram_min <= ngram_max")
        if self.max_features < 1:
            raise ArgumentError("max_features must be >= 1")
        if self.idf_smoothing != "add-one":
            raise ArgumentError("only add-one idf smoothing is supported")

    def to_dict(self) -> dict:
        return {
            "ngram_min": self.ngram_min,
            "ngram_max": self.ngram_max,
            "max_features": self.max_features,
            "sublinear_tf": self.sublinear_tf,
            "l2_normalize": self.l2_normalize,
            "idf_smoothing": self.idf_smoothing,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "VectorizerConfig":
        return cls(
            ngram_min=int(d.get("ngram_min", 1)),
            ngram_max=int(d.get("ngram_max", 2)),
            max_features=int(d.get("max_features", 10000)),
            sublinear_tf=bool(d.get("sublinear_tf", False)),
            l2_normalize=bool(d.get("l2_normalize", True)),
            idf_smoothing=d.get("idf_smoothing", "add-one"),
        )


@dataclass(frozen=True)
class FeatureVector:
    """Sparse document vector: (index, weight) pairs sorted by index."""

    entries: tuple[tuple[int, float], ...]
    dim: int

    def to_dense(self) -> np.ndarray:
        v = np.zeros(self.dim)
        for i, w in self.entries:
            v[i] = w
        return v


def ngrams(tokens: Sequence[str], nmin: int, nmax: int) -> list[str]:
    """All n-grams in document order; bigrams join tokens with one space."""
    out = []
    for n in range(nmin, nmax + 1):
        for i in range(len(tokens) - n + 1):
            out.append(" ".join(tokens[i : i + n]))
    return out


@dataclass(frozen=True)
class TfidfModel:
    config: VectorizerConfig
    vocabulary: tuple[str, ...]
    idf: np.ndarray
    fitted_on: str = ""
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._index is None:
            object.__setattr__(
                self, "_index", {t: i for i, t in enumerate(self.vocabulary)}
            )

    @property
    def dim(self) -> int:
        return len(self.vocabulary)

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "vocabulary": list(self.vocabulary),
            "idf": [float(x) for x in self.idf],
            "fitted_on": self.fitted_on,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TfidfModel":
        return cls(
            config=VectorizerConfig.from_dict(d["config"]),
            vocabulary=tuple(d["vocabulary"]),
            idf=np.asarray([float(x) for x in d["idf"]], dtype=np.float64),
            fitted_on=d.get("fitted_on", ""),
        )


def corpus_fingerprint(token_lists: Iterable[Sequence[str]]) -> str:
    h = hashlib.sha256()
    for tokens in token_lists:
        h.update("\x1f".join(tokens).encode("utf-8"))
        h.update(b"\x1e")
    return h.hexdigest()


def fit_vectorizer(
    token_lists: Sequence[Sequence[str]], cfg: VectorizerConfig | None = None
) -> TfidfModel:
    """Build vocabulary and idf weights from tokenized documents."""
    cfg = cfg or VectorizerConfig()
    if not any(len(t) > 0 for t in token_lists):
        raise FitError("cannot fit a vectorizer on empty input")
    df: Counter = Counter()
    total: Counter = Counter()
    for tokens in token_lists:
        grams = ngrams(tokens, cfg.ngram_min, cfg.ngram_max)
        total.update(grams)
        df.update(set(grams))
    if len(total) > cfg.max_features:
        ranked = sorted(total.items(), key=lambda kv: (-kv[1], kv[0]))
        kept = [term for term, _ in ranked[: cfg.max_features]]
    else:
        kept = list(total)
    vocab = tuple(sorted(kept))
    n_docs = len(token_lists)
    idf = np.array(
        [math.log((1 + n_docs) / (1 + df[t])) + 1.0 for t in vocab],
        dtype=np.float64,
    )
    return TfidfModel(
        config=cfg,
        vocabulary=vocab,
        idf=idf,
        fitted_on=corpus_fingerprint(token_lists),
    )


def vectorize(model: TfidfModel, tokens: Sequence[str]) -> FeatureVector:
    """Weight a tokenized document against a fitted model."""
    cfg = model.config
    counts: Counter = Counter()
    for gram in ngrams(tokens, cfg.ngram_min, cfg.ngram_max):
        idx = model._index.get(gram)
        if idx is not None:
            counts[idx] += 1
    entries = []
    for idx in sorted(counts):
        tf = float(counts[idx])
        if cfg.sublinear_tf:
            tf = 1.0 + math.log(tf)
        entries.append((idx, tf * float(model.idf[idx])))
    if cfg.l2_normalize and entries:
        norm = math.sqrt(sum(w * w for _, w in entries))
        entries = [(i, w / norm) for i, w in entries]
    return FeatureVector(entries=tuple(entries), dim=model.dim)


def vectors_to_csr(vectors: Sequence[FeatureVector]) -> sparse.csr_matrix:
    """Stack feature vectors into one scipy CSR matrix."""
    if not vectors:
        raise ArgumentError("no vectors to stack")
    dim = vectors[0].dim
    data, indices, indptr = [], [], [0]
    for v in vectors:
        if v.dim != dim:
            raise ArgumentError("inconsistent vector dimensions")
        for i, w in v.entries:
            indices.append(i)
            data.append(w)
        indptr.append(len(indices))
    return sparse.csr_matrix(
        (np.asarray(data, dtype=np.float64), indices, indptr),
        shape=(len(vectors), dim),
    )
