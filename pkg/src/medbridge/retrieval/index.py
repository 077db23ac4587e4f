"""Report corpus index: offline build, serialization, and top-k querying.

Offline: fit document frequencies over the whole corpus, embed every
report, drop zero-embedding documents (counted), project survivors onto
the unit sphere and build the KD-tree. Online: embed the query with the
frozen stats and run pruned k-NN; ascending L2 on the sphere is the same
ranking as descending cosine.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import AllDocumentsEmpty, EmptyCorpus, ZeroEmbedding
from ..text import TermSet, tokenize
from .kdtree import KdNode, build_tree, knn, linear_scan
from .tfidf import CorpusStats, compute_tie_from_tokens, fit_corpus_stats, spherical_project

INDEX_FORMAT = "report-index@1"


@dataclass(frozen=True)
class ReportRecord:
    id: int  # dense insertion index among indexed (non-zero) documents
    source_id: str
    text: str
    tie: np.ndarray
    point: np.ndarray


@dataclass
class ReportIndex:
    term_set: TermSet
    stats: CorpusStats
    records: list[ReportRecord]
    root: KdNode | None
    excluded_count: int
    _points: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.records:
            self._points = np.stack([r.point for r in self.records])
        else:
            self._points = np.zeros((0, len(self.term_set)))

    def __len__(self) -> int:
        return len(self.records)

    def query_tie(self, text: str) -> np.ndarray:
        return compute_tie_from_tokens(tokenize(text), self.stats, self.term_set)

    def query_top_k(
        self, text: str, k: int, with_visits: bool = False
    ) -> list[tuple[ReportRecord, float]] | tuple[list[tuple[ReportRecord, float]], int]:
        """Top-k records by similarity to ``text``, ascending L2 distance.

        Raises ZeroEmbedding when the query has no term-set occurrences;
        the caller decides whether to degrade (k := 0) or surface it.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        point = spherical_project(self.query_tie(text))  # raises ZeroEmbedding
        pairs, visits = knn(self.root, self._points, point, k)
        result = [(self.records[i], dist) for i, dist in pairs]
        return (result, visits) if with_visits else result

    def brute_force_top_k(self, text: str, k: int) -> list[tuple[ReportRecord, float]]:
        """Linear-scan oracle over the same records and distance arithmetic."""
        point = spherical_project(self.query_tie(text))
        return [(self.records[i], dist) for i, dist in linear_scan(self._points, point, k)]

    # --- persistence ---

    def to_json(self) -> str:
        doc = {
            "format": INDEX_FORMAT,
            "terms": list(self.term_set.terms),
            "stats": {
                "doc_count": self.stats.doc_count,
                "doc_freq": list(self.stats.doc_freq),
            },
            "excluded_count": self.excluded_count,
            "records": [
                {"id": r.id, "source_id": r.source_id, "text": r.text, "tie": r.tie.tolist()}
                for r in self.records
            ],
            "tree": self.root.to_dict() if self.root else None,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, raw: str) -> "ReportIndex":
        doc = json.loads(raw)
        if doc.get("format") != INDEX_FORMAT:
            raise ValueError(f"unsupported index format: {doc.get('format')!r}")
        term_set = TermSet(tuple(doc["terms"]))
        stats = CorpusStats(doc["stats"]["doc_count"], tuple(doc["stats"]["doc_freq"]))
        records = [
            ReportRecord(
                id=rec["id"],
                source_id=rec["source_id"],
                text=rec["text"],
                tie=np.array(rec["tie"], dtype=np.float64),
                point=spherical_project(np.array(rec["tie"], dtype=np.float64)),
            )
            for rec in doc["records"]
        ]
        return cls(
            term_set=term_set,
            stats=stats,
            records=records,
            root=KdNode.from_dict(doc["tree"]),
            excluded_count=doc["excluded_count"],
        )


def load_index(path: str | Path) -> ReportIndex:
    return ReportIndex.from_json(Path(path).read_text(encoding="utf-8"))


def build_index(
    corpus: list[str] | list[tuple[str, str]],
    term_set: TermSet | None = None,
) -> ReportIndex:
    """Build the index over ``corpus`` (texts, or (source_id, text) pairs)."""
    if not corpus:
        raise EmptyCorpus("cannot index an empty corpus")
    term_set = term_set or TermSet.default()
    pairs = [
        item if isinstance(item, tuple) else (str(i), item)
        for i, item in enumerate(corpus)
    ]
    token_lists = [tokenize(text) for _, text in pairs]
    stats = fit_corpus_stats(token_lists, term_set)

    records: list[ReportRecord] = []
    excluded = 0
    for (source_id, text), tokens in zip(pairs, token_lists):
        tie = compute_tie_from_tokens(tokens, stats, term_set)
        if not np.any(tie):
            excluded += 1
            continue
        records.append(
            ReportRecord(
                id=len(records),
                source_id=source_id,
                text=text,
                tie=tie,
                point=spherical_project(tie),
            )
        )
    if not records:
        raise AllDocumentsEmpty(
            f"all {len(pairs)} documents produced zero embeddings"
        )
    points = np.stack([r.point for r in records])
    return ReportIndex(
        term_set=term_set,
        stats=stats,
        records=records,
        root=build_tree(points),
        excluded_count=excluded,
    )


def read_corpus_jsonl(path: str | Path) -> list[tuple[str, str]]:
    """Read a newline-delimited JSON corpus of {"id", "text"} objects."""
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            pairs.append((str(obj["id"]), obj["text"]))
    return pairs
