"""Service configuration: one JSON file wiring fixtures, LLM, and limits.

Every referenced file must exist at load time; a bad configuration is a
ConfigError (CLI exit code 2), never a runtime surprise.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..llm import GatewayPolicy, RemoteGateway, RuleGateway, ScriptedGateway
from ..prob2text import PromptStyle

MAX_K = 5


@dataclass(frozen=True)
class LlmConfig:
    backend: str  # "rule" | "scripted" | "remote"
    rules: tuple[tuple[str, str], ...] = ()
    default_reply: str | None = None
    replies: tuple[str, ...] = ()
    base_url: str | None = None
    model: str | None = None
    policy: GatewayPolicy = field(default_factory=GatewayPolicy)


@dataclass(frozen=True)
class ServiceConfig:
    index_path: Path
    tree_path: Path
    cad_paths: tuple[Path, ...]
    embedding_path: Path
    templates_path: Path | None
    domains: tuple[tuple[str, str], ...]  # (id, textual representation)
    llm: LlmConfig
    default_k: int = 3
    default_style: str = "p3"
    host: str = "127.0.0.1"
    port: int = 8000
    data_dir: Path = Path("data")
    cors_origins: tuple[str, ...] = ("*",)
    api_token: str | None = None
    chat_uses_report_context: bool = True
    chat_budget: int = 30
    chat_max_depth: int = 5
    static_dir: Path | None = None


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise ConfigError(message)


def _existing(path_str: str, base: Path, what: str) -> Path:
    path = Path(path_str)
    if not path.is_absolute():
        path = base / path
    _require(path.exists(), f"{what} does not exist: {path}")
    return path


def _parse_llm(doc: dict) -> LlmConfig:
    backend = doc.get("backend", "rule")
    _require(backend in ("rule", "scripted", "remote"), f"unknown llm backend {backend!r}")
    policy_doc = doc.get("policy", {})
    try:
        policy = GatewayPolicy(
            max_retries=policy_doc.get("max_retries", 3),
            backoff_base=policy_doc.get("backoff_base", 0.5),
            timeout=policy_doc.get("timeout", 30.0),
            max_in_flight=policy_doc.get("max_in_flight", 4),
            requests_per_minute=policy_doc.get("requests_per_minute"),
        )
    except ValueError as exc:
        raise ConfigError(f"bad llm policy: {exc}") from exc
    if backend == "remote":
        _require(bool(doc.get("base_url")), "remote llm backend needs base_url")
        _require(bool(doc.get("model")), "remote llm backend needs model")
    return LlmConfig(
        backend=backend,
        rules=tuple((r[0], r[1]) for r in doc.get("rules", [])),
        default_reply=doc.get("default_reply"),
        replies=tuple(doc.get("replies", [])),
        base_url=doc.get("base_url"),
        model=doc.get("model"),
        policy=policy,
    )


def load_config(path: str | Path) -> ServiceConfig:
    path = Path(path)
    _require(path.exists(), f"config file does not exist: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    _require(isinstance(doc, dict), "config root must be an object")
    base = path.parent

    for key in ("index_path", "tree_path", "cad_paths", "embedding_path", "domains"):
        _require(key in doc, f"config missing required key {key!r}")

    default_k = doc.get("default_k", 3)
    _require(
        isinstance(default_k, int) and 0 <= default_k <= MAX_K,
        f"default_k must be an integer in [0, {MAX_K}]",
    )
    style = doc.get("default_style", "p3")
    try:
        PromptStyle.parse(style)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    domains = []
    for entry in doc["domains"]:
        _require(
            isinstance(entry, dict) and "id" in entry and "text" in entry,
            "each domain needs an id and a text description",
        )
        domains.append((entry["id"], entry["text"]))
    _require(bool(domains), "at least one domain required")

    cad_paths = tuple(
        _existing(p, base, "CAD fixture") for p in doc["cad_paths"]
    )
    _require(bool(cad_paths), "at least one CAD fixture required")

    templates_path = (
        _existing(doc["templates_path"], base, "templates file")
        if doc.get("templates_path")
        else None
    )
    static_dir = (
        _existing(doc["static_dir"], base, "static dir") if doc.get("static_dir") else None
    )

    data_dir = Path(doc.get("data_dir", "data"))
    if not data_dir.is_absolute():
        data_dir = base / data_dir

    listen = doc.get("listen", {})
    return ServiceConfig(
        index_path=_existing(doc["index_path"], base, "index file"),
        tree_path=_existing(doc["tree_path"], base, "tree file"),
        cad_paths=cad_paths,
        embedding_path=_existing(doc["embedding_path"], base, "embedding fixture"),
        templates_path=templates_path,
        domains=tuple(domains),
        llm=_parse_llm(doc.get("llm", {})),
        default_k=default_k,
        default_style=style,
        host=listen.get("host", "127.0.0.1"),
        port=int(listen.get("port", 8000)),
        data_dir=data_dir,
        cors_origins=tuple(doc.get("cors_origins", ["*"])),
        api_token=doc.get("api_token"),
        chat_uses_report_context=doc.get("chat_uses_report_context", True),
        chat_budget=int(doc.get("chat_budget", 30)),
        chat_max_depth=int(doc.get("chat_max_depth", 5)),
        static_dir=static_dir,
    )


def build_gateway(llm: LlmConfig):
    if llm.backend == "scripted":
        return ScriptedGateway(list(llm.replies))
    if llm.backend == "rule":
        return RuleGateway([(p, r) for p, r in llm.rules], default=llm.default_reply)
    return RemoteGateway(llm.base_url, llm.model, llm.policy)
