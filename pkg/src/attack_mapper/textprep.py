"""Token normalization for the bag-of-words pipeline.

Pipeline order is fixed: lowercase, split on non-alphanumeric runs, drop
short tokens, drop stopwords, stem. The stopword list ships with the
package and is addressed by id so a list change is an explicit version
bump rather than silent drift.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from .errors import ArgumentError
from .porter import stem

_TOKEN_SPLIT = re.compile(r"[^0-9a-zA-Z]+")

STOPWORD_LISTS = {"english-basic-v1": "stopwords_en.txt"}


@dataclass(frozen=True)
class PrepConfig:
    lowercase: bool = True
    stopword_list_id: str = "english-basic-v1"
    stem: bool = True
    min_token_len: int = 2

    def __post_init__(self):
        if self.min_token_len < 1:
            raise ArgumentError("min_token_len must be >= 1")
        if self.stopword_list_id not in STOPWORD_LISTS:
            raise ArgumentError(f"unknown stopword list: {self.stopword_list_id}")

    def to_dict(self) -> dict:
        return {
            "lowercase": self.lowercase,
            "stopword_list_id": self.stopword_list_id,
            "stem": self.stem,
            "min_token_len": self.min_token_len,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PrepConfig":
        return cls(
            lowercase=bool(d.get("lowercase", True)),
            stopword_list_id=d.get("stopword_list_id", "english-basic-v1"),
            stem=bool(d.get("stem", True)),
            min_token_len=int(d.get("min_token_len", 2)),
        )


_STOPWORD_CACHE: dict[str, frozenset[str]] = {}


def load_stopwords(list_id: str = "english-basic-v1") -> frozenset[str]:
    if list_id not in STOPWORD_LISTS:
        raise ArgumentError(f"unknown stopword list: {list_id}")
    if list_id not in _STOPWORD_CACHE:
        text = (
            resources.files("attack_mapper")
            .joinpath("data")
            .joinpath(STOPWORD_LISTS[list_id])
            .read_text(encoding="utf-8")
        )
        words = frozenset(
            line.strip().lower()
            for line in text.splitlines()
            if line.strip() and not line.startswith("#")
        )
        _STOPWORD_CACHE[list_id] = words
    return _STOPWORD_CACHE[list_id]


def normalize_tokens(text: str, cfg: PrepConfig | None = None) -> list[str]:
    """Turn raw text into the normalized token stream fed to the vectorizer."""
    cfg = cfg or PrepConfig()
    stopwords = load_stopwords(cfg.stopword_list_id)
    if cfg.lowercase:
        text = text.lower()
    out = []
    for tok in _TOKEN_SPLIT.split(text):
        if len(tok) < cfg.min_token_len:
            continue
        if tok.lower() in stopwords:
            continue
        out.append(stem(tok.lower()) if cfg.stem else tok)
    return out
