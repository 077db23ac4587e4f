"""Hierarchical knowledge dictionary: topics, sections, subsections.

Two ingest formats: nested JSON objects and markdown where heading level
is the tier. A section titled "abstract" (any case) never becomes a
child — its body text is stored on the parent's abstract field.
Candidate-topic selection is lexical: TF-IDF cosine between the query
and each topic's title + abstract, over that corpus's own vocabulary.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import (
    DuplicateSiblingTitle,
    EmptyDocument,
    MalformedStructure,
    PathNotFound,
)
from ..text import TermSet, tokenize
from ..retrieval.tfidf import compute_tie_from_tokens, fit_corpus_stats

TREE_FORMAT = "knowledge-tree@1"

_HEADING = re.compile(r"^(#{1,6})\s+(.*\S)\s*$")


@dataclass
class KnowledgeNode:
    title: str
    abstract: str | None = None
    content: str | None = None
    children: list["KnowledgeNode"] = field(default_factory=list)

    def __post_init__(self):
        if not self.title or not self.title.strip():
            raise MalformedStructure("node title must be non-empty")
        if self.abstract is None and self.content is None and not self.children:
            raise MalformedStructure(
                f"node {self.title!r} has no abstract, content, or children"
            )
        seen = set()
        for child in self.children:
            key = child.title.lower()
            if key in seen:
                raise DuplicateSiblingTitle(
                    f"{child.title!r} appears twice under {self.title!r}"
                )
            seen.add(key)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "abstract": self.abstract,
            "content": self.content,
            "children": [c.to_dict() for c in self.children],
        }

    def walk(self):
        """Yield (path, node) over the subtree, depth-first preorder."""
        stack = [((self.title,), self)]
        while stack:
            path, node = stack.pop()
            yield path, node
            for child in reversed(node.children):
                stack.append((path + (child.title,), child))


@dataclass(frozen=True)
class NodePath:
    titles: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "titles", tuple(self.titles))
        if not self.titles:
            raise ValueError("path must have at least one title")


class KnowledgeTree:
    def __init__(self, roots: list[KnowledgeNode]):
        if not roots:
            raise EmptyDocument("tree needs at least one topic")
        seen = set()
        for root in roots:
            key = root.title.lower()
            if key in seen:
                raise DuplicateSiblingTitle(f"duplicate topic title {root.title!r}")
            seen.add(key)
        self.roots = list(roots)
        self._build_topic_index()

    def _build_topic_index(self) -> None:
        # one "document" per topic: its title plus abstract
        docs = [tokenize(f"{r.title} {r.abstract or ''}") for r in self.roots]
        vocab = sorted({tok for doc in docs for tok in doc})
        if not vocab:
            raise MalformedStructure("topic titles produced no indexable words")
        self._vocab = TermSet(tuple(vocab))
        self._stats = fit_corpus_stats(docs, self._vocab)
        self._topic_vectors = [
            compute_tie_from_tokens(doc, self._stats, self._vocab) for doc in docs
        ]

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    def walk(self):
        for root in self.roots:
            yield from root.walk()

    def lookup(self, path: NodePath | list[str] | tuple[str, ...]) -> KnowledgeNode:
        titles = path.titles if isinstance(path, NodePath) else tuple(path)
        if not titles:
            raise PathNotFound("empty path")
        level = self.roots
        node = None
        for title in titles:
            node = next((n for n in level if n.title.lower() == title.lower()), None)
            if node is None:
                raise PathNotFound(" / ".join(titles))
            level = node.children
        return node

    def candidate_topics(self, query: str, n: int = 5) -> list[str]:
        if n < 1:
            raise ValueError("n must be >= 1")
        q = compute_tie_from_tokens(tokenize(query), self._stats, self._vocab)
        qn = float(np.linalg.norm(q))
        scores = []
        for i, vec in enumerate(self._topic_vectors):
            vn = float(np.linalg.norm(vec))
            score = float(np.dot(q, vec) / (qn * vn)) if qn > 0 and vn > 0 else 0.0
            scores.append((-score, i))
        scores.sort()  # ties keep tree order via the index
        return [self.roots[i].title for _, i in scores[:n]]

    # --- persistence ---

    def to_json(self) -> str:
        doc = {"format": TREE_FORMAT, "roots": [r.to_dict() for r in self.roots]}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")

    @classmethod
    def from_json(cls, raw: str) -> "KnowledgeTree":
        doc = json.loads(raw)
        if doc.get("format") != TREE_FORMAT:
            raise MalformedStructure(f"unsupported tree format: {doc.get('format')!r}")
        return cls([_node_from_dict(obj) for obj in doc["roots"]])


def load_tree(path: str | Path) -> KnowledgeTree:
    return KnowledgeTree.from_json(Path(path).read_text(encoding="utf-8"))


def lookup(tree: KnowledgeTree, path: NodePath | list[str]) -> KnowledgeNode:
    return tree.lookup(path)


def candidate_topics(tree: KnowledgeTree, query: str, n: int = 5) -> list[str]:
    return tree.candidate_topics(query, n)


# --- ingest: nested JSON ------------------------------------------------


def _node_from_dict(obj: dict) -> KnowledgeNode:
    if not isinstance(obj, dict) or "title" not in obj:
        raise MalformedStructure("each node must be an object with a title")
    abstract = obj.get("abstract")
    children = []
    for child_obj in obj.get("children", []):
        child = _node_from_dict(child_obj)
        if child.title.lower() == "abstract":
            if abstract is not None:
                raise MalformedStructure(
                    f"{obj['title']!r} has both an abstract field and an abstract section"
                )
            abstract = child.content if child.content is not None else child.abstract
        else:
            children.append(child)
    return KnowledgeNode(
        title=obj["title"],
        abstract=abstract,
        content=obj.get("content"),
        children=children,
    )


def parse_nested(doc: dict | list) -> list[KnowledgeNode]:
    """Topics from format A: one object or a list of objects."""
    objs = doc if isinstance(doc, list) else [doc]
    if not objs:
        raise EmptyDocument("no topics in document")
    return [_node_from_dict(obj) for obj in objs]


# --- ingest: markdown ---------------------------------------------------


def parse_markdown(text: str) -> list[KnowledgeNode]:
    """Topics from markdown; heading level = tier, H1 = topic."""
    headings: list[tuple[int, str, list[str]]] = []  # (level, title, body lines)
    for line in text.splitlines():
        match = _HEADING.match(line)
        if match:
            headings.append((len(match.group(1)), match.group(2), []))
        elif headings:
            headings[-1][2].append(line)
        elif line.strip():
            raise MalformedStructure(f"text before first heading: {line.strip()!r}")
    if not headings:
        raise EmptyDocument("markdown document has no headings")

    def build(start: int, end: int) -> KnowledgeNode:
        level, title, body = headings[start]
        text_body = "\n".join(body).strip() or None
        abstract = None
        children = []
        i = start + 1
        while i < end:
            child_level = headings[i][0]
            if child_level <= level:
                raise MalformedStructure("heading levels out of order")
            if child_level > level + 1:
                raise MalformedStructure(
                    f"heading level jumps from {level} to {child_level} at {headings[i][1]!r}"
                )
            j = i + 1
            while j < end and headings[j][0] > child_level:
                j += 1
            child = build(i, j)
            if child.title.lower() == "abstract":
                if abstract is not None:
                    raise MalformedStructure(f"{title!r} has two abstract sections")
                abstract = child.content
            else:
                children.append(child)
            i = j
        return KnowledgeNode(
            title=title, abstract=abstract, content=text_body, children=children
        )

    roots = []
    i = 0
    while i < len(headings):
        if headings[i][0] != 1:
            raise MalformedStructure(
                f"expected a top-level heading, got level {headings[i][0]}"
            )
        j = i + 1
        while j < len(headings) and headings[j][0] > 1:
            j += 1
        roots.append(build(i, j))
        i = j
    return roots


# --- ingest entry points ------------------------------------------------


def ingest(documents) -> KnowledgeTree:
    """Build a tree from parsed-JSON objects and/or markdown strings."""
    roots: list[KnowledgeNode] = []
    for doc in documents:
        if isinstance(doc, str):
            roots.extend(parse_markdown(doc))
        else:
            roots.extend(parse_nested(doc))
    return KnowledgeTree(roots)


def ingest_dir(path: str | Path) -> KnowledgeTree:
    """Ingest every .md and .json file under ``path``, sorted by name."""
    base = Path(path)
    if not base.is_dir():
        raise EmptyDocument(f"{base} is not a directory")
    docs = []
    for file in sorted(base.iterdir()):
        if file.suffix == ".md":
            docs.append(file.read_text(encoding="utf-8"))
        elif file.suffix == ".json":
            docs.append(json.loads(file.read_text(encoding="utf-8")))
    if not docs:
        raise EmptyDocument(f"no .md or .json files in {base}")
    return ingest(docs)
