"""Domain identification and dispatch to per-domain CAD adapters.

The registry holds textual domain descriptors with precomputed
embeddings; an input image embedding is routed to the domain whose
descriptor has the highest cosine similarity. Embeddings are supplied by
an EmbeddingProvider (file-backed or remote HTTP), never computed here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

import requests

from .errors import (
    DimensionMismatch,
    DuplicateDomain,
    EmptyRegistry,
    MalformedModelOutput,
    ResponseMalformed,
    UnknownImage,
    ZeroNormVector,
)


def _norm(vector: tuple[float, ...]) -> float:
    return math.sqrt(sum(x * x for x in vector))


def cosine(a: tuple[float, ...], b: tuple[float, ...]) -> float:
    return sum(x * y for x, y in zip(a, b)) / (_norm(a) * _norm(b))


@dataclass(frozen=True)
class DomainDescriptor:
    id: str
    textual_representation: str
    embedding: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "embedding", tuple(float(x) for x in self.embedding))
        if _norm(self.embedding) <= 0.0:
            raise ZeroNormVector(f"domain {self.id!r} has a zero-norm embedding")


@dataclass(frozen=True)
class ImageEmbedding:
    vector: tuple[float, ...]
    source_id: str

    def __post_init__(self):
        object.__setattr__(self, "vector", tuple(float(x) for x in self.vector))
        if _norm(self.vector) <= 0.0:
            raise ZeroNormVector(f"image {self.source_id!r} has a zero-norm embedding")


@dataclass(frozen=True)
class CadOutput:
    domain_id: str
    findings: tuple[tuple[str, float], ...]  # (disease label, probability)
    raw_report: str | None = None

    def __post_init__(self):
        labels = [label for label, _ in self.findings]
        if len(set(labels)) != len(labels):
            raise MalformedModelOutput(f"duplicate disease labels in {self.domain_id!r}")
        for label, prob in self.findings:
            if not 0.0 <= prob <= 1.0:
                raise MalformedModelOutput(f"{label!r} probability {prob} outside [0, 1]")


class CadAdapter(Protocol):
    def infer(self, image_ref: str) -> CadOutput: ...


class EmbeddingProvider(Protocol):
    def embedding(self, item_id: str) -> tuple[float, ...]: ...


def identify_domain(image: ImageEmbedding, domains: list[DomainDescriptor]) -> str:
    """Id of the descriptor with the highest cosine similarity to the image.

    Ties go to the lowest registry index so results are deterministic.
    """
    if not domains:
        raise EmptyRegistry("no domains registered")
    dims = {len(d.embedding) for d in domains}
    if len(dims) != 1 or len(image.vector) not in dims:
        raise DimensionMismatch(
            f"image dim {len(image.vector)} vs domain dims {sorted(dims)}"
        )
    best_id, best_score = domains[0].id, cosine(image.vector, domains[0].embedding)
    for desc in domains[1:]:
        score = cosine(image.vector, desc.embedding)
        if score > best_score:
            best_id, best_score = desc.id, score
    return best_id


class DomainRegistry:
    """Immutable-after-construction mapping of domain ids to adapters."""

    def __init__(self):
        self._descriptors: list[DomainDescriptor] = []
        self._adapters: dict[str, CadAdapter] = {}
        self._dimension: int | None = None

    def register(self, descriptor: DomainDescriptor, adapter: CadAdapter) -> "DomainRegistry":
        if descriptor.id in self._adapters:
            raise DuplicateDomain(f"domain {descriptor.id!r} already registered")
        if self._dimension is None:
            self._dimension = len(descriptor.embedding)
        elif len(descriptor.embedding) != self._dimension:
            raise DimensionMismatch(
                f"domain {descriptor.id!r} dim {len(descriptor.embedding)} != {self._dimension}"
            )
        self._descriptors.append(descriptor)
        self._adapters[descriptor.id] = adapter
        return self

    @property
    def descriptors(self) -> list[DomainDescriptor]:
        return list(self._descriptors)

    @property
    def dimension(self) -> int | None:
        return self._dimension

    def ids(self) -> list[str]:
        return [d.id for d in self._descriptors]

    def dispatch(self, domain_id: str) -> CadAdapter:
        if domain_id not in self._adapters:
            raise EmptyRegistry(f"domain {domain_id!r} not registered")
        return self._adapters[domain_id]

    def identify(self, image: ImageEmbedding) -> str:
        return identify_domain(image, self._descriptors)


def load_cad_output(record: dict, domain_id: str) -> CadOutput:
    findings = tuple(
        (f["disease"], float(f["prob"])) for f in record.get("findings", [])
    )
    return CadOutput(
        domain_id=domain_id,
        findings=findings,
        raw_report=record.get("raw_report"),
    )


class FileCadAdapter:
    """Read-only adapter over a JSON fixture of precomputed CAD outputs.

    Fixture schema: {"domain": id, "records": {image_id: {"findings":
    [{"disease", "prob"}...], "raw_report": str|null}}}.
    """

    def __init__(self, path: str | Path):
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        self.domain_id: str = doc["domain"]
        self._records: dict = doc["records"]

    def image_ids(self) -> list[str]:
        return list(self._records)

    def infer(self, image_ref: str) -> CadOutput:
        if image_ref not in self._records:
            raise UnknownImage(f"image {image_ref!r} not in {self.domain_id!r} fixture")
        return load_cad_output(self._records[image_ref], self.domain_id)


@dataclass
class FileEmbeddingProvider:
    """Precomputed vectors keyed by id: {"dimension": E, "vectors": {id: [...]}}."""

    dimension: int
    vectors: dict[str, tuple[float, ...]] = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "FileEmbeddingProvider":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        dim = int(doc["dimension"])
        vectors = {}
        for item_id, vec in doc["vectors"].items():
            if len(vec) != dim:
                raise DimensionMismatch(f"vector {item_id!r} has dim {len(vec)} != {dim}")
            vectors[item_id] = tuple(float(x) for x in vec)
        return cls(dimension=dim, vectors=vectors)

    def __contains__(self, item_id: str) -> bool:
        return item_id in self.vectors

    def embedding(self, item_id: str) -> tuple[float, ...]:
        if item_id not in self.vectors:
            raise UnknownImage(f"no embedding for {item_id!r}")
        return self.vectors[item_id]


class RemoteEmbeddingProvider:
    """Fetches vectors over HTTP: POST {base}/embeddings {"id": ...}."""

    def __init__(self, base_url: str, timeout: float = 10.0, token: str | None = None):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._headers = {"Authorization": f"Bearer {token}"} if token else {}

    def embedding(self, item_id: str) -> tuple[float, ...]:
        resp = requests.post(
            f"{self.base_url}/embeddings",
            json={"id": item_id},
            headers=self._headers,
            timeout=self.timeout,
        )
        if resp.status_code == 404:
            raise UnknownImage(f"no embedding for {item_id!r}")
        resp.raise_for_status()
        try:
            vector = resp.json()["vector"]
            return tuple(float(x) for x in vector)
        except (KeyError, TypeError, ValueError) as exc:
            raise ResponseMalformed(f"bad embedding payload for {item_id!r}") from exc
