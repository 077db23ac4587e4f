#!/usr/bin/env python3
"""Rebuild the derived fixtures (report index, knowledge tree).

Run from the repository root after editing the source fixtures:

    python3 scripts/build_fixtures.py
"""

from pathlib import Path

from medbridge.knowledge.tree import ingest_dir
from medbridge.retrieval.index import build_index, read_corpus_jsonl
from medbridge.text import TermSet

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def main() -> None:
    terms = TermSet.from_file(FIXTURES / "terms.json")
    corpus = read_corpus_jsonl(FIXTURES / "report_corpus.jsonl")
    index = build_index(corpus, terms)
    index.save(FIXTURES / "report_index.json")
    print(f"report_index.json: {len(index)} records, {index.excluded_count} excluded")

    tree = ingest_dir(FIXTURES / "knowledge")
    tree.save(FIXTURES / "knowledge_tree.json")
    print(f"knowledge_tree.json: {len(tree.roots)} topics, {tree.node_count()} nodes")


if __name__ == "__main__":
    main()
