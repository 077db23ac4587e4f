"""HTTP service: report generation, knowledge-grounded chat, trace audit.

All state is assembled from the configuration file at startup; sessions
and traces live in append-only JSONL stores so a restarted service
replays to exactly the state it had.
"""

from __future__ import annotations

import datetime as _dt
from dataclasses import dataclass, field
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..domains import DomainDescriptor, DomainRegistry, FileCadAdapter, FileEmbeddingProvider
from ..errors import ConfigError, LlmUnavailable, UnknownImage
from ..knowledge.search import LlmNavigator, answer_with_knowledge, retrieve_knowledge
from ..knowledge.tree import KnowledgeTree, load_tree
from ..llm import Gateway, user_request
from ..pipeline import MAX_K, generate_report
from ..prob2text import PromptStyle
from ..retrieval.index import ReportIndex, load_index
from ..templates import TemplateSet
from .config import ServiceConfig, build_gateway
from .stores import SessionStore, TraceStore


def _utc_now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


@dataclass
class AppState:
    config: ServiceConfig
    registry: DomainRegistry
    index: ReportIndex
    tree: KnowledgeTree
    embeddings: FileEmbeddingProvider
    gateway: Gateway
    templates: TemplateSet
    traces: TraceStore
    sessions: SessionStore
    now_fn: Callable[[], str] = field(default=_utc_now)

    def case_list(self) -> list[dict]:
        cases = []
        for descriptor in self.registry.descriptors:
            adapter = self.registry.dispatch(descriptor.id)
            for image_id in adapter.image_ids():
                cases.append({"image_id": image_id, "domain": descriptor.id})
        return cases


def build_state(config: ServiceConfig, gateway: Gateway | None = None) -> AppState:
    embeddings = FileEmbeddingProvider.from_file(config.embedding_path)
    adapters = {}
    for path in config.cad_paths:
        adapter = FileCadAdapter(path)
        if adapter.domain_id in adapters:
            raise ConfigError(f"two CAD fixtures claim domain {adapter.domain_id!r}")
        adapters[adapter.domain_id] = adapter

    registry = DomainRegistry()
    for domain_id, text in config.domains:
        if domain_id not in embeddings:
            raise ConfigError(f"no embedding for domain {domain_id!r}")
        if domain_id not in adapters:
            raise ConfigError(f"no CAD fixture for domain {domain_id!r}")
        registry.register(
            DomainDescriptor(domain_id, text, embeddings.embedding(domain_id)),
            adapters[domain_id],
        )

    templates = (
        TemplateSet.from_file(config.templates_path)
        if config.templates_path
        else TemplateSet.default()
    )
    config.data_dir.mkdir(parents=True, exist_ok=True)
    return AppState(
        config=config,
        registry=registry,
        index=load_index(config.index_path),
        tree=load_tree(config.tree_path),
        embeddings=embeddings,
        gateway=gateway or build_gateway(config.llm),
        templates=templates,
        traces=TraceStore(config.data_dir / "traces.jsonl"),
        sessions=SessionStore(config.data_dir / "sessions.jsonl"),
    )


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def run_report(state: AppState, image_id: str, k: int, style) -> tuple[dict, str]:
    """Generate, persist, and return (trace doc, trace id).

    Raises UnknownImage / LlmUnavailable / ValueError for bad k.
    """
    trace = generate_report(
        image_id, k, style, state.registry, state.index,
        state.gateway, state.embeddings, state.templates,
    )
    trace_id = state.traces.new_id()
    state.traces.put(trace_id, "generation", trace.to_dict())
    return state.traces.get(trace_id)["doc"], trace_id


def run_chat_turn(
    state: AppState,
    message: str,
    session_id: str | None = None,
    report_trace_id: str | None = None,
) -> dict:
    """One chat turn: retrieve knowledge, answer, persist session + trace.

    Raises ValueError (empty message), KeyError (unknown session or
    report trace), LlmUnavailable.
    """
    if not message or not message.strip():
        raise ValueError("message must be non-empty")
    if session_id is not None and session_id not in state.sessions:
        raise KeyError(f"unknown session {session_id!r}")

    query = message
    if report_trace_id is not None:
        row = state.traces.get(report_trace_id)
        if row is None or row["kind"] != "generation":
            raise KeyError(f"unknown report trace {report_trace_id!r}")
        if state.config.chat_uses_report_context:
            query = f"{message}\n\nReport under discussion:\n{row['doc']['enhanced_report']}"

    retrieval = retrieve_knowledge(
        query,
        state.tree,
        LlmNavigator(state.gateway),
        budget=state.config.chat_budget,
        max_depth=state.config.chat_max_depth,
    )
    if retrieval.knowledge:
        answer = answer_with_knowledge(
            query, retrieval.knowledge, state.gateway, state.templates
        )
    else:
        answer = state.gateway.complete(user_request(query, tag="chat_ungrounded"))

    trace_id = state.traces.new_id()
    state.traces.put(trace_id, "retrieval", retrieval.to_dict())
    if session_id is None:
        session_id = state.sessions.create(state.now_fn())
    state.sessions.append_turn(session_id, "user", message, None)
    state.sessions.append_turn(session_id, "assistant", answer, {"trace_id": trace_id})
    citation = None
    if retrieval.outcome == "found":
        citation = {
            "path": list(retrieval.found_path),
            "excerpt": retrieval.knowledge[:300],
        }
    return {
        "session_id": session_id,
        "answer": answer,
        "citation": citation,
        "trace_id": trace_id,
        "grounded": retrieval.knowledge is not None,
        "low_confidence": retrieval.low_confidence,
    }


def create_app(state: AppState) -> FastAPI:
    app = FastAPI(title="medbridge", docs_url=None, redoc_url=None)
    app.state.medbridge = state
    config = state.config

    if config.cors_origins:
        app.add_middleware(
            CORSMiddleware,
            allow_origins=list(config.cors_origins),
            allow_methods=["*"],
            allow_headers=["*"],
        )

    def _auth_failure(request: Request) -> JSONResponse | None:
        if config.api_token is None:
            return None
        if request.headers.get("Authorization") == f"Bearer {config.api_token}":
            return None
        return _error(401, "missing or invalid API token")

    @app.get("/v1/health")
    async def health():
        return {"status": "ok", "cases": len(state.case_list())}

    @app.get("/v1/cases")
    async def cases(request: Request):
        denied = _auth_failure(request)
        if denied:
            return denied
        return {"cases": state.case_list()}

    @app.post("/v1/report")
    async def report(request: Request):
        denied = _auth_failure(request)
        if denied:
            return denied
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be JSON")
        image_id = body.get("image_id")
        if not image_id or not isinstance(image_id, str):
            return _error(400, "image_id is required")
        k = body.get("k", config.default_k)
        if not isinstance(k, int) or isinstance(k, bool) or not 0 <= k <= MAX_K:
            return _error(400, f"k must be an integer in [0, {MAX_K}]")
        style = body.get("style", config.default_style)
        try:
            style = PromptStyle.parse(style)
        except ValueError:
            return _error(400, f"unknown style {style!r}")
        try:
            doc, trace_id = run_report(state, image_id, k, style)
        except UnknownImage:
            return _error(404, f"unknown image {image_id!r}")
        except LlmUnavailable as exc:
            return _error(502, str(exc))
        return {"report": doc["enhanced_report"], "trace_id": trace_id}

    @app.post("/v1/chat")
    async def chat(request: Request):
        denied = _auth_failure(request)
        if denied:
            return denied
        try:
            body = await request.json()
        except Exception:
            return _error(400, "body must be JSON")
        message = body.get("message")
        if not message or not isinstance(message, str):
            return _error(400, "message must be a non-empty string")
        try:
            return run_chat_turn(
                state,
                message,
                session_id=body.get("session_id"),
                report_trace_id=body.get("report_trace_id"),
            )
        except ValueError as exc:
            return _error(400, str(exc))
        except KeyError as exc:
            return _error(404, str(exc.args[0]))
        except LlmUnavailable as exc:
            return _error(502, str(exc))

    @app.get("/v1/trace/{trace_id}")
    async def get_trace(trace_id: str, request: Request):
        denied = _auth_failure(request)
        if denied:
            return denied
        row = state.traces.get(trace_id)
        if row is None:
            return _error(404, f"unknown trace {trace_id!r}")
        return row

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str, request: Request):
        denied = _auth_failure(request)
        if denied:
            return denied
        doc = state.sessions.get(session_id)
        if doc is None:
            return _error(404, f"unknown session {session_id!r}")
        return doc

    if config.static_dir is not None:
        app.mount("/", StaticFiles(directory=config.static_dir, html=True), name="ui")

    return app
