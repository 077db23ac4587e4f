"""LLM-guided depth-first knowledge retrieval with backtracking.

The navigator (an LLM or a script) is shown one node at a time: the
node's abstract plus a numbered list of its not-yet-tried children. It
answers with a child number, FOUND, or BACK. Candidate topics are walked
in ranked order; BACK at a topic root moves on to the next candidate.
Every presentation is one step against the step budget; invalid or
unavailable choices degrade to BACK rather than failing the retrieval.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Protocol

from ..errors import LlmUnavailable, ParseFailure
from ..llm import Gateway, user_request
from ..templates import TemplateSet
from ..text import tokenize
from .tree import KnowledgeNode, KnowledgeTree

RETRIEVAL_TRACE_FORMAT = "retrieval-trace@1"

DEFAULT_BUDGET = 30
DEFAULT_MAX_DEPTH = 5
PARSE_RETRIES = 2
CANDIDATE_COUNT = 5


@dataclass(frozen=True)
class NavigatorAction:
    kind: str  # "select" | "found" | "back"
    index: int | None = None  # zero-based original child index for "select"

    def __post_init__(self):
        if self.kind not in ("select", "found", "back"):
            raise ValueError(f"unknown action kind {self.kind!r}")
        if (self.kind == "select") != (self.index is not None):
            raise ValueError("select needs an index; found/back must not have one")

    @classmethod
    def select(cls, index: int) -> "NavigatorAction":
        return cls("select", index)

    @classmethod
    def found(cls) -> "NavigatorAction":
        return cls("found")

    @classmethod
    def back(cls) -> "NavigatorAction":
        return cls("back")


class Navigator(Protocol):
    def reply(self, prompt: str) -> str: ...


class ScriptNavigator:
    """Replays fixed raw replies; answers BACK once the script runs out."""

    def __init__(self, replies: list[str]):
        self._replies = list(replies)
        self._next = 0
        self.prompts: list[str] = []

    def reply(self, prompt: str) -> str:
        self.prompts.append(prompt)
        if self._next < len(self._replies):
            text = self._replies[self._next]
            self._next += 1
            return text
        return "BACK"


class LlmNavigator:
    def __init__(self, gateway: Gateway):
        self._gateway = gateway

    def reply(self, prompt: str) -> str:
        return self._gateway.complete(user_request(prompt, tag="navigator"))


def format_choice_prompt(
    query: str,
    node: KnowledgeNode | None,
    children: list[tuple[int, str]],
) -> str:
    """Prompt for one navigation step.

    ``children`` carries (original one-based number, title) pairs so
    numbering stays stable while tried siblings disappear from the list.
    ``node=None`` formats the virtual root tier over candidate topics.
    """
    lines = [f"Question: {query}", ""]
    if node is None:
        lines.append("Choose the most relevant medical topic.")
    else:
        lines.append(f"Current section: {node.title}")
        if node.abstract:
            lines.append(f"Overview: {node.abstract}")
    if children:
        lines.append("")
        lines.append("Subsections:")
        for number, title in children:
            lines.append(f"{number}. {title}")
        lines.append("")
        lines.append(
            "Reply with the number of the most relevant subsection, "
            "FOUND if this section already answers the question, "
            "or BACK if none of it is relevant."
        )
    else:
        lines.append("")
        lines.append(
            "Reply FOUND if this section answers the question, or BACK if not."
        )
    return "\n".join(lines)


def parse_navigator_reply(text: str, child_titles: list[tuple[int, str]]) -> NavigatorAction:
    """Map a raw reply onto an action.

    Precedence: bare number, then a FOUND/BACK token, then a verbatim
    child title (longest first). Numbers are the original one-based ones
    shown in the prompt. Anything else is a ParseFailure.
    """
    stripped = text.strip()
    numbers = {number for number, _ in child_titles}
    if stripped.isdigit():
        number = int(stripped)
        if number in numbers:
            return NavigatorAction.select(number - 1)
        raise ParseFailure(f"number {number} not among presented choices")
    tokens = set(tokenize(text))
    if "found" in tokens:
        return NavigatorAction.found()
    if "back" in tokens:
        return NavigatorAction.back()
    lowered = text.lower()
    for number, title in sorted(child_titles, key=lambda p: -len(p[1])):
        if title.lower() in lowered:
            return NavigatorAction.select(number - 1)
    raise ParseFailure(f"could not read a choice from {text!r}")


@dataclass
class SearchStep:
    path: tuple[str, ...]
    presented: list[tuple[int, str]]
    action: NavigatorAction
    raw_reply: str
    converted: bool = False  # invalid/deep/empty choice rewritten to BACK

    def to_dict(self) -> dict:
        return {
            "path": list(self.path),
            "presented": [[n, t] for n, t in self.presented],
            "action": {"kind": self.action.kind, "index": self.action.index},
            "raw_reply": self.raw_reply,
            "converted": self.converted,
        }


@dataclass
class RetrievalTrace:
    query: str
    candidates: list[str]
    steps: list[SearchStep] = field(default_factory=list)
    outcome: str = "exhausted"  # "found" | "exhausted" | "budget_stop"
    found_path: tuple[str, ...] | None = None
    knowledge: str | None = None
    low_confidence: bool = False
    error: str | None = None

    @property
    def steps_used(self) -> int:
        return len(self.steps)

    def visited_paths(self) -> list[tuple[str, ...]]:
        """Paths in first-entry order (each node at most once)."""
        seen: list[tuple[str, ...]] = []
        for step in self.steps:
            if step.path not in seen:
                seen.append(step.path)
        return seen

    def to_dict(self) -> dict:
        return {
            "format": RETRIEVAL_TRACE_FORMAT,
            "query": self.query,
            "candidates": self.candidates,
            "steps": [s.to_dict() for s in self.steps],
            "steps_used": self.steps_used,
            "outcome": self.outcome,
            "found_path": list(self.found_path) if self.found_path else None,
            "knowledge": self.knowledge,
            "low_confidence": self.low_confidence,
            "error": self.error,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


@dataclass
class _Frame:
    node: KnowledgeNode
    path: tuple[str, ...]
    tried: set[int] = field(default_factory=set)  # original zero-based child indices


def _found_payload(node: KnowledgeNode) -> str:
    if node.content:
        return node.content
    parts = [node.abstract] if node.abstract else []
    parts.extend(c.abstract for c in node.children if c.abstract)
    return "\n\n".join(parts)


def _path_abstracts(tree: KnowledgeTree, path: tuple[str, ...]) -> str:
    parts = []
    for depth in range(1, len(path) + 1):
        node = tree.lookup(path[:depth])
        if node.abstract:
            parts.append(node.abstract)
        elif node.content:
            parts.append(node.content)
    return "\n\n".join(parts)


def retrieve_knowledge(
    query: str,
    tree: KnowledgeTree,
    navigator: Navigator,
    budget: int = DEFAULT_BUDGET,
    max_depth: int = DEFAULT_MAX_DEPTH,
) -> RetrievalTrace:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    candidates = tree.candidate_topics(query, CANDIDATE_COUNT)
    trace = RetrievalTrace(query=query, candidates=candidates)
    stack: list[_Frame] = []
    next_candidate = 0

    def deepest_visited() -> tuple[str, ...] | None:
        best = None
        for path in trace.visited_paths():
            if best is None or len(path) > len(best):
                best = path
        return best

    def budget_stop(error: str | None = None) -> RetrievalTrace:
        trace.outcome = "budget_stop"
        trace.error = error
        trace.low_confidence = True
        deepest = deepest_visited()
        trace.knowledge = _path_abstracts(tree, deepest) if deepest else None
        return trace

    while True:
        if not stack:
            if next_candidate >= len(candidates):
                trace.outcome = "exhausted"
                return trace
            title = candidates[next_candidate]
            next_candidate += 1
            stack.append(_Frame(node=tree.lookup((title,)), path=(title,)))

        if trace.steps_used >= budget:
            return budget_stop()

        frame = stack[-1]
        presented = [
            (i + 1, child.title)
            for i, child in enumerate(frame.node.children)
            if i not in frame.tried
        ]
        prompt = format_choice_prompt(query, frame.node, presented)

        action: NavigatorAction | None = None
        raw = ""
        try:
            for _ in range(PARSE_RETRIES + 1):
                raw = navigator.reply(prompt)
                try:
                    action = parse_navigator_reply(raw, presented)
                    break
                except ParseFailure:
                    continue
        except LlmUnavailable as exc:
            return budget_stop(f"{type(exc).__name__}: {exc}")
        converted = False
        if action is None:
            action = NavigatorAction.back()
            converted = True

        if action.kind == "select":
            too_deep = len(stack) >= max_depth
            invalid = action.index in frame.tried or action.index >= len(frame.node.children)
            if too_deep or invalid:
                action, converted = NavigatorAction.back(), True
        if action.kind == "found":
            payload = _found_payload(frame.node)
            if payload:
                trace.steps.append(SearchStep(frame.path, presented, action, raw, converted))
                trace.outcome = "found"
                trace.found_path = frame.path
                trace.knowledge = payload
                return trace
            action, converted = NavigatorAction.back(), True

        trace.steps.append(SearchStep(frame.path, presented, action, raw, converted))

        if action.kind == "select":
            child = frame.node.children[action.index]
            stack.append(_Frame(node=child, path=frame.path + (child.title,)))
        else:  # back
            stack.pop()
            if stack:
                parent = stack[-1]
                for i, sibling in enumerate(parent.node.children):
                    if sibling is frame.node:
                        parent.tried.add(i)
                        break


def answer_with_knowledge(
    query: str,
    knowledge: str,
    llm: Gateway,
    templates: TemplateSet | None = None,
) -> str:
    if not knowledge:
        raise ValueError("knowledge must be non-empty; answer ungrounded instead")
    templates = templates or TemplateSet.default()
    prompt = templates.get("chat_answer").render(query=query, knowledge=knowledge)
    return llm.complete(user_request(prompt, tag="chat_answer"))
