"""Command-line interface.

Thin bindings over the library modules: build and query the report
index, ingest and search the knowledge base, generate reports, chat,
evaluate, and serve the HTTP API. Exit codes: 0 success, 1 domain
errors, 2 configuration errors (argparse uses 2 for usage errors too).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from .errors import ConfigError, MedbridgeError
from .knowledge.search import ScriptNavigator, LlmNavigator, retrieve_knowledge
from .knowledge.tree import ingest_dir, load_tree
from .metrics import ce_scores, corpus_bleu, extract_labels, mean_rouge_l
from .retrieval.index import build_index, load_index, read_corpus_jsonl
from .retrieval.kdtree import build_tree, knn
from .service.app import build_state, create_app, run_chat_turn, run_report
from .service.config import build_gateway, load_config
from .text import TermSet


def _print_json(doc) -> None:
    print(json.dumps(doc, indent=2, sort_keys=True))


# --- index --------------------------------------------------------------


def cmd_index_build(args) -> int:
    terms = TermSet.from_file(args.terms) if args.terms else TermSet.default()
    corpus = read_corpus_jsonl(args.corpus)
    index = build_index(corpus, terms)
    index.save(args.out)
    print(f"indexed {len(index)} of {len(corpus)} reports "
          f"({index.excluded_count} without term occurrences) -> {args.out}")
    return 0


def cmd_index_query(args) -> int:
    index = load_index(args.index)
    for record, distance in index.query_top_k(args.text, args.k):
        print(f"{record.source_id}\t{distance:.6f}\t{record.text}")
    return 0


def cmd_index_bench(args) -> int:
    # mean visited nodes for pruned search vs. full scan on unit-sphere data
    rng = np.random.default_rng(args.seed)
    print("n\tdim\tqueries\tk\tmean_visits\tlinear\tvisit_fraction")
    for n in args.sizes:
        points = rng.standard_normal((n, args.dim))
        points /= np.linalg.norm(points, axis=1, keepdims=True)
        root = build_tree(points)
        visits = []
        started = time.perf_counter()
        for _ in range(args.queries):
            q = rng.standard_normal(args.dim)
            q /= np.linalg.norm(q)
            pairs, visited = knn(root, points, q, args.k)
            visits.append(visited)
        elapsed = time.perf_counter() - started
        mean_visits = sum(visits) / len(visits)
        print(f"{n}\t{args.dim}\t{args.queries}\t{args.k}"
              f"\t{mean_visits:.1f}\t{n}\t{mean_visits / n:.4f}"
              f"\t({elapsed:.2f}s)")
    return 0


# --- knowledge base -----------------------------------------------------


def cmd_kb_ingest(args) -> int:
    tree = ingest_dir(args.in_dir)
    tree.save(args.out)
    print(f"ingested {len(tree.roots)} topics, {tree.node_count()} nodes -> {args.out}")
    return 0


def cmd_kb_topics(args) -> int:
    tree = load_tree(args.tree)
    for i, title in enumerate(tree.candidate_topics(args.query, args.n), start=1):
        print(f"{i}. {title}")
    return 0


def cmd_kb_search(args) -> int:
    tree = load_tree(args.tree)
    if args.navigator == "script":
        if not args.script:
            raise ConfigError("--script FILE is required with --navigator script")
        replies = json.loads(Path(args.script).read_text(encoding="utf-8"))
        if not isinstance(replies, list) or not all(isinstance(r, str) for r in replies):
            raise ConfigError("script file must be a JSON list of reply strings")
        navigator = ScriptNavigator(replies)
    else:
        if not args.config:
            raise ConfigError("--config FILE is required with --navigator llm")
        navigator = LlmNavigator(build_gateway(load_config(args.config).llm))
    trace = retrieve_knowledge(
        args.query, tree, navigator, budget=args.budget, max_depth=args.max_depth
    )
    _print_json(trace.to_dict())
    return 0


# --- report and chat ----------------------------------------------------


def cmd_report(args) -> int:
    state = build_state(load_config(args.config))
    doc, trace_id = run_report(state, args.image, args.k, args.style)
    _print_json({"trace_id": trace_id, "trace": doc})
    return 0


def cmd_chat(args) -> int:
    state = build_state(load_config(args.config))
    session_id = args.session

    def one_turn(message: str) -> None:
        nonlocal session_id
        result = run_chat_turn(state, message, session_id=session_id)
        session_id = result["session_id"]
        print(f"[{session_id}] {result['answer']}")
        if result["citation"]:
            path = " > ".join(result["citation"]["path"])
            print(f"  cited: {path}")
        if result["low_confidence"]:
            print("  (low confidence: retrieval stopped before a definite match)")

    if args.message:
        one_turn(args.message)
        return 0
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        if line in ("exit", "quit"):
            break
        one_turn(line)
    return 0


# --- evaluation ---------------------------------------------------------


def _read_texts_by_id(path: str) -> dict[str, str]:
    return dict(read_corpus_jsonl(path))


def _aligned(pred_path: str, ref_path: str) -> tuple[list[str], list[str]]:
    pred = _read_texts_by_id(pred_path)
    ref = _read_texts_by_id(ref_path)
    if set(pred) != set(ref):
        missing = set(pred) ^ set(ref)
        raise MedbridgeError(f"prediction/reference ids differ: {sorted(missing)[:5]}")
    ids = sorted(pred)
    return [pred[i] for i in ids], [ref[i] for i in ids]


def cmd_eval_nlg(args) -> int:
    candidates, references = _aligned(args.pred, args.ref)
    _print_json(
        {
            "samples": len(candidates),
            "bleu": corpus_bleu(candidates, references),
            "rouge_l": mean_rouge_l(candidates, references),
        }
    )
    return 0


def cmd_eval_ce(args) -> int:
    terms = TermSet.from_file(args.terms) if args.terms else TermSet.default()
    candidates, references = _aligned(args.pred, args.ref)
    scores = ce_scores(
        [extract_labels(c, terms) for c in candidates],
        [extract_labels(r, terms) for r in references],
    )
    _print_json(
        {
            "samples": len(candidates),
            "precision": scores.precision,
            "recall": scores.recall,
            "f1": scores.f1,
        }
    )
    return 0


# --- serve --------------------------------------------------------------


def cmd_serve(args) -> int:
    import uvicorn

    config = load_config(args.config)
    app = create_app(build_state(config))
    host = args.host or config.host
    port = args.port or config.port
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


# --- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medbridge",
        description="Report generation, report retrieval, and knowledge-grounded chat.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--config", required=True)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.set_defaults(fn=cmd_serve)

    index = sub.add_parser("index", help="report index operations")
    index_sub = index.add_subparsers(dest="subcommand", required=True)
    p = index_sub.add_parser("build", help="build an index from a JSONL corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--terms", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_index_build)
    p = index_sub.add_parser("query", help="top-k similar reports")
    p.add_argument("--index", required=True)
    p.add_argument("--text", required=True)
    p.add_argument("--k", type=int, default=3)
    p.set_defaults(fn=cmd_index_query)
    p = index_sub.add_parser("bench", help="pruning benchmark on synthetic data")
    p.add_argument("--sizes", type=lambda s: [int(x) for x in s.split(",")],
                   default=[1000, 10000, 100000])
    p.add_argument("--dim", type=int, default=17)
    p.add_argument("--queries", type=int, default=50)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_index_bench)

    kb = sub.add_parser("kb", help="knowledge base operations")
    kb_sub = kb.add_subparsers(dest="subcommand", required=True)
    p = kb_sub.add_parser("ingest", help="build a tree from a directory of documents")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_kb_ingest)
    p = kb_sub.add_parser("topics", help="rank candidate topics for a query")
    p.add_argument("--tree", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--n", type=int, default=5)
    p.set_defaults(fn=cmd_kb_topics)
    p = kb_sub.add_parser("search", help="navigate the tree and print the trace")
    p.add_argument("--tree", required=True)
    p.add_argument("--query", required=True)
    p.add_argument("--navigator", choices=["llm", "script"], required=True)
    p.add_argument("--script", default=None, help="JSON list of raw replies")
    p.add_argument("--config", default=None, help="service config (for --navigator llm)")
    p.add_argument("--budget", type=int, default=30)
    p.add_argument("--max-depth", type=int, default=5)
    p.set_defaults(fn=cmd_kb_search)

    p = sub.add_parser("report", help="generate a report for a fixture image")
    p.add_argument("--config", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--style", default="p3", choices=["p1", "p2", "p3"])
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("chat", help="chat against the knowledge base")
    p.add_argument("--config", required=True)
    p.add_argument("--session", default=None)
    p.add_argument("--message", default=None, help="single turn instead of stdin loop")
    p.set_defaults(fn=cmd_chat)

    ev = sub.add_parser("eval", help="evaluate generated reports")
    ev_sub = ev.add_subparsers(dest="subcommand", required=True)
    p = ev_sub.add_parser("nlg", help="BLEU and ROUGE-L")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.set_defaults(fn=cmd_eval_nlg)
    p = ev_sub.add_parser("ce", help="label precision/recall/F1")
    p.add_argument("--pred", required=True)
    p.add_argument("--ref", required=True)
    p.add_argument("--terms", default=None)
    p.set_defaults(fn=cmd_eval_ce)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MedbridgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
