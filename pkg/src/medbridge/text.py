"""Tokenization and clinical term counting.

One tokenizer is shared by the report index, the knowledge-topic ranker
and the evaluation metrics so that counts line up everywhere: lowercase,
split on runs of non-alphanumeric characters, drop empties.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path

_SPLIT = re.compile(r"[^0-9a-z]+")

# 14 CheXpert-style observation labels plus three single-word aliases.
# A stand-in: the production term list is configuration, not code.
DEFAULT_TERMS = (
    "enlarged cardiomediastinum",
    "cardiomegaly",
    "lung opacity",
    "lung lesion",
    "edema",
    "consolidation",
    "pneumonia",
    "atelectasis",
    "pneumothorax",
    "pleural effusion",
    "pleural other",
    "fracture",
    "support devices",
    "no finding",
    "effusion",
    "opacity",
    "infiltration",
)


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric run."""
    return [tok for tok in _SPLIT.split(text.lower()) if tok]


def phrase_occurrences(phrase: tuple[str, ...], tokens: list[str]) -> list[int]:
    """Start positions of non-overlapping occurrences, scanning left to right."""
    if not phrase:
        return []
    starts = []
    i = 0
    n, m = len(tokens), len(phrase)
    while i + m <= n:
        if tuple(tokens[i:i + m]) == phrase:
            starts.append(i)
            i += m
        else:
            i += 1
    return starts


@dataclass(frozen=True)
class TermSet:
    """Ordered, case-normalized clinical term list; terms may be phrases."""

    terms: tuple[str, ...]

    def __post_init__(self):
        if not self.terms:
            raise ValueError("term set must be non-empty")
        normalized = tuple(" ".join(tokenize(t)) for t in self.terms)
        if any(not t for t in normalized):
            raise ValueError("term set contains an empty term")
        if len(set(normalized)) != len(normalized):
            raise ValueError("term set contains duplicates")
        object.__setattr__(self, "terms", normalized)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self):
        return iter(self.terms)

    @property
    def token_forms(self) -> list[tuple[str, ...]]:
        return [tuple(t.split(" ")) for t in self.terms]

    @classmethod
    def default(cls) -> "TermSet":
        return cls(DEFAULT_TERMS)

    @classmethod
    def from_file(cls, path: str | Path) -> "TermSet":
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        if isinstance(data, dict):
            data = data["terms"]
        return cls(tuple(data))

    def to_file(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"terms": list(self.terms)}, indent=2) + "\n", encoding="utf-8"
        )


def term_count(term: str, tokens: list[str]) -> int:
    """Occurrences of ``term`` in ``tokens``.

    Single-word terms count exact token matches; multi-word terms count
    non-overlapping phrase occurrences scanning left to right.
    """
    phrase = tuple(tokenize(term))
    if len(phrase) == 1:
        return sum(1 for tok in tokens if tok == phrase[0])
    return len(phrase_occurrences(phrase, tokens))
