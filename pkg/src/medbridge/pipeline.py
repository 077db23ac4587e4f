"""End-to-end report generation.

Chain: image embedding → domain identification → CAD findings →
description lines → preliminary report (LLM) → top-k exemplar retrieval
using the preliminary text as the query → refinement (LLM). With k = 0,
or when the preliminary text has no term-set words at all, the
refinement pass is skipped and the preliminary report is final.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable

from .domains import CadOutput, DomainRegistry, EmbeddingProvider, ImageEmbedding
from .errors import ZeroEmbedding
from .llm import Gateway, user_request
from .prob2text import PromptStyle, VisualDescription, prob2text
from .retrieval.index import ReportIndex
from .templates import TemplateSet

TRACE_FORMAT = "generation-trace@1"

DEFAULT_K = 3
MAX_K = 5


@dataclass(frozen=True)
class LlmCall:
    tag: str
    prompt: str
    completion: str


@dataclass
class GenerationTrace:
    image_ref: str
    domain_id: str
    style: str
    cad_output: CadOutput
    visual_description: VisualDescription
    preliminary_report: str
    retrieved: list[tuple[str, str, float]]  # (report id, text, distance) ascending
    enhanced_report: str
    k_requested: int
    k_used: int
    degraded: bool
    llm_calls: list[LlmCall] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "format": TRACE_FORMAT,
            "image_ref": self.image_ref,
            "domain_id": self.domain_id,
            "style": self.style,
            "cad_output": {
                "domain_id": self.cad_output.domain_id,
                "findings": [[d, p] for d, p in self.cad_output.findings],
                "raw_report": self.cad_output.raw_report,
            },
            "visual_description": list(self.visual_description.lines),
            "preliminary_report": self.preliminary_report,
            "retrieved": [[rid, text, dist] for rid, text, dist in self.retrieved],
            "enhanced_report": self.enhanced_report,
            "k_requested": self.k_requested,
            "k_used": self.k_used,
            "degraded": self.degraded,
            "llm_calls": [
                {"tag": c.tag, "prompt": c.prompt, "completion": c.completion}
                for c in self.llm_calls
            ],
            "timings": self.timings,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, doc: dict) -> "GenerationTrace":
        if doc.get("format") != TRACE_FORMAT:
            raise ValueError(f"unsupported trace format: {doc.get('format')!r}")
        cad = CadOutput(
            domain_id=doc["cad_output"]["domain_id"],
            findings=tuple((d, float(p)) for d, p in doc["cad_output"]["findings"]),
            raw_report=doc["cad_output"]["raw_report"],
        )
        return cls(
            image_ref=doc["image_ref"],
            domain_id=doc["domain_id"],
            style=doc["style"],
            cad_output=cad,
            visual_description=VisualDescription(
                domain_id=doc["domain_id"], lines=tuple(doc["visual_description"])
            ),
            preliminary_report=doc["preliminary_report"],
            retrieved=[(rid, text, float(d)) for rid, text, d in doc["retrieved"]],
            enhanced_report=doc["enhanced_report"],
            k_requested=doc["k_requested"],
            k_used=doc["k_used"],
            degraded=doc["degraded"],
            llm_calls=[
                LlmCall(c["tag"], c["prompt"], c["completion"]) for c in doc["llm_calls"]
            ],
            timings=dict(doc["timings"]),
        )


def format_examples(exemplars: list[str]) -> str:
    """Numbered exemplar blocks; adding one exemplar appends one block."""
    return "\n\n".join(
        f"Example {i}:\n{text}" for i, text in enumerate(exemplars, start=1)
    )


def build_preliminary_prompt(desc: VisualDescription, templates: TemplateSet) -> str:
    return templates.get("preliminary").render(visual_description=desc.text)


def build_refine_prompt(
    preliminary: str, exemplars: list[str], templates: TemplateSet
) -> str:
    return templates.get("refine").render(
        preliminary_report=preliminary, examples=format_examples(exemplars)
    )


def generate_preliminary(
    desc: VisualDescription,
    llm: Gateway,
    templates: TemplateSet,
    trace_calls: list[LlmCall] | None = None,
) -> str:
    prompt = build_preliminary_prompt(desc, templates)
    completion = llm.complete(user_request(prompt, tag="preliminary"))
    if trace_calls is not None:
        trace_calls.append(LlmCall("preliminary", prompt, completion))
    return completion


def enhance_with_examples(
    preliminary: str,
    exemplars: list[str],
    llm: Gateway,
    templates: TemplateSet,
    trace_calls: list[LlmCall] | None = None,
) -> str:
    if not exemplars:
        return preliminary
    prompt = build_refine_prompt(preliminary, exemplars, templates)
    completion = llm.complete(user_request(prompt, tag="refine"))
    if trace_calls is not None:
        trace_calls.append(LlmCall("refine", prompt, completion))
    return completion


def generate_report(
    image_ref: str,
    k: int,
    style: PromptStyle | str,
    registry: DomainRegistry,
    index: ReportIndex,
    llm: Gateway,
    embeddings: EmbeddingProvider,
    templates: TemplateSet | None = None,
    clock: Callable[[], float] = time.perf_counter,
) -> GenerationTrace:
    """Run the full chain and return a complete trace of what happened.

    ``clock`` is injectable so tests can pin timings and make the whole
    trace byte-reproducible.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    style = PromptStyle.parse(style)
    templates = templates or TemplateSet.default()
    timings: dict[str, float] = {}
    calls: list[LlmCall] = []

    def staged(name: str, fn):
        started = clock()
        result = fn()
        timings[name] = clock() - started
        return result

    domain_id = staged(
        "identify",
        lambda: registry.identify(ImageEmbedding(embeddings.embedding(image_ref), image_ref)),
    )
    cad = staged("cad", lambda: registry.dispatch(domain_id).infer(image_ref))
    desc = staged("describe", lambda: prob2text(cad, style))
    preliminary = staged(
        "preliminary", lambda: generate_preliminary(desc, llm, templates, calls)
    )

    degraded = False
    retrieved: list[tuple[str, str, float]] = []
    if k > 0:
        started = clock()
        try:
            hits = index.query_top_k(preliminary, k)
            retrieved = [(rec.source_id, rec.text, dist) for rec, dist in hits]
        except ZeroEmbedding:
            degraded = True
        timings["retrieve"] = clock() - started

    exemplars = [text for _, text, _ in retrieved]
    enhanced = staged(
        "enhance",
        lambda: enhance_with_examples(preliminary, exemplars, llm, templates, calls),
    )

    return GenerationTrace(
        image_ref=image_ref,
        domain_id=domain_id,
        style=style.value,
        cad_output=cad,
        visual_description=desc,
        preliminary_report=preliminary,
        retrieved=retrieved,
        enhanced_report=enhanced,
        k_requested=k,
        k_used=len(retrieved),
        degraded=degraded,
        llm_calls=calls,
        timings=timings,
    )
