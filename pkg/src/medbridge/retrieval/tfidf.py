"""Term-restricted TF-IDF embeddings and their unit-sphere projection.

TF(t, d) = count(t in d) / |d| with |d| the total token count, and
IDF(t) = ln(|corpus| / df(t)) with the convention idf := 0 when df = 0.
Natural log throughout: the base only rescales embeddings uniformly and
leaves cosine ranking untouched, but a fixed choice keeps numeric tests
exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ZeroEmbedding
from ..text import TermSet, term_count, tokenize


@dataclass(frozen=True)
class CorpusStats:
    """Document frequencies fitted once on a corpus, then frozen."""

    doc_count: int
    doc_freq: tuple[int, ...]  # aligned with the term set order

    def __post_init__(self):
        if self.doc_count < 0:
            raise ValueError("doc_count must be >= 0")
        for df in self.doc_freq:
            if not 0 <= df <= self.doc_count:
                raise ValueError(f"df {df} outside [0, {self.doc_count}]")

    @property
    def idf(self) -> np.ndarray:
        return np.array(
            [math.log(self.doc_count / df) if df > 0 else 0.0 for df in self.doc_freq],
            dtype=np.float64,
        )


def fit_corpus_stats(token_lists: list[list[str]], term_set: TermSet) -> CorpusStats:
    doc_freq = [
        sum(1 for tokens in token_lists if term_count(term, tokens) > 0)
        for term in term_set
    ]
    return CorpusStats(doc_count=len(token_lists), doc_freq=tuple(doc_freq))


def compute_tie(text: str, stats: CorpusStats, term_set: TermSet) -> np.ndarray:
    """TF-IDF embedding of ``text`` restricted to ``term_set``.

    A document with no tokens (or no term occurrences) yields the zero
    vector; callers decide whether that is an error.
    """
    tokens = tokenize(text)
    return compute_tie_from_tokens(tokens, stats, term_set)


def compute_tie_from_tokens(
    tokens: list[str], stats: CorpusStats, term_set: TermSet
) -> np.ndarray:
    idf = stats.idf
    values = np.zeros(len(term_set), dtype=np.float64)
    if not tokens:
        return values
    length = len(tokens)
    for i, term in enumerate(term_set):
        count = term_count(term, tokens)
        if count:
            values[i] = (count / length) * idf[i]
    return values


def spherical_project(tie: np.ndarray) -> np.ndarray:
    """Project onto the unit hypersphere; raises on the zero vector."""
    norm = float(np.linalg.norm(tie))
    if norm <= 0.0:
        raise ZeroEmbedding("cannot project a zero embedding onto the sphere")
    return tie / norm
