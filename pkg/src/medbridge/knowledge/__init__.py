from .tree import (
    KnowledgeNode,
    KnowledgeTree,
    NodePath,
    candidate_topics,
    ingest,
    ingest_dir,
    load_tree,
    lookup,
    parse_markdown,
    parse_nested,
)
from .search import (
    LlmNavigator,
    NavigatorAction,
    RetrievalTrace,
    ScriptNavigator,
    answer_with_knowledge,
    format_choice_prompt,
    parse_navigator_reply,
    retrieve_knowledge,
)

__all__ = [
    "KnowledgeNode",
    "KnowledgeTree",
    "NodePath",
    "candidate_topics",
    "ingest",
    "ingest_dir",
    "load_tree",
    "lookup",
    "parse_markdown",
    "parse_nested",
    "LlmNavigator",
    "NavigatorAction",
    "RetrievalTrace",
    "ScriptNavigator",
    "answer_with_knowledge",
    "format_choice_prompt",
    "parse_navigator_reply",
    "retrieve_knowledge",
]
