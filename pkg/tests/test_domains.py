import json
import math
import random

import pytest

from medbridge.domains import (
    CadOutput,
    DomainDescriptor,
    DomainRegistry,
    FileCadAdapter,
    FileEmbeddingProvider,
    ImageEmbedding,
    cosine,
    identify_domain,
)
from medbridge.errors import (
    DimensionMismatch,
    DuplicateDomain,
    EmptyRegistry,
    MalformedModelOutput,
    UnknownImage,
    ZeroNormVector,
)


def _unit(rng, dim):
    while True:
        v = [rng.gauss(0, 1) for _ in range(dim)]
        n = math.sqrt(sum(x * x for x in v))
        if n > 1e-6:
            return tuple(x / n for x in v)


def _brute_force(image, domains):
    best, best_score = None, -math.inf
    for d in domains:
        s = cosine(image.vector, d.embedding)
        if s > best_score:
            best, best_score = d.id, s
    return best


def test_identify_matches_brute_force_argmax():
    rng = random.Random(11)
    for _ in range(100):
        dim = rng.randrange(3, 12)
        domains = [
            DomainDescriptor(f"dom{i}", f"domain {i}", _unit(rng, dim))
            for i in range(9)
        ]
        image = ImageEmbedding(_unit(rng, dim), "img")
        assert identify_domain(image, domains) == _brute_force(image, domains)


def test_exact_descriptor_match_wins():
    rng = random.Random(5)
    domains = [DomainDescriptor(f"dom{i}", "", _unit(rng, 6)) for i in range(5)]
    for i, d in enumerate(domains):
        image = ImageEmbedding(d.embedding, f"probe{i}")
        assert identify_domain(image, domains) == d.id


def test_tie_resolved_to_lowest_index():
    # dom0 and dom1 are the same direction: cosine ties exactly.
    domains = [
        DomainDescriptor("dom0", "", (1.0, 0.0)),
        DomainDescriptor("dom1", "", (2.0, 0.0)),
        DomainDescriptor("dom2", "", (0.0, 1.0)),
    ]
    image = ImageEmbedding((3.0, 0.0), "img")
    assert identify_domain(image, domains) == "dom0"


def test_identify_is_scale_invariant():
    rng = random.Random(23)
    domains = [DomainDescriptor(f"dom{i}", "", _unit(rng, 4)) for i in range(6)]
    base = _unit(rng, 4)
    picked = {
        identify_domain(ImageEmbedding(tuple(s * x for x in base), "img"), domains)
        for s in (0.001, 1.0, 7.5, 4096.0)
    }
    assert len(picked) == 1


def test_empty_registry_rejected():
    image = ImageEmbedding((1.0, 0.0), "img")
    with pytest.raises(EmptyRegistry):
        identify_domain(image, [])


def test_dimension_mismatch_rejected():
    domains = [DomainDescriptor("dom0", "", (1.0, 0.0, 0.0))]
    with pytest.raises(DimensionMismatch):
        identify_domain(ImageEmbedding((1.0, 0.0), "img"), domains)


def test_zero_norm_vectors_rejected_at_construction():
    with pytest.raises(ZeroNormVector):
        DomainDescriptor("dom0", "", (0.0, 0.0))
    with pytest.raises(ZeroNormVector):
        ImageEmbedding((0.0, 0.0, 0.0), "img")


class _StubAdapter:
    def __init__(self, domain_id):
        self.domain_id = domain_id

    def infer(self, image_ref):
        return CadOutput(self.domain_id, (("cardiomegaly", 0.5),))


def test_registry_rejects_duplicate_ids_and_mixed_dims():
    reg = DomainRegistry()
    reg.register(DomainDescriptor("chest", "chest x-ray", (1.0, 0.0)), _StubAdapter("chest"))
    with pytest.raises(DuplicateDomain):
        reg.register(DomainDescriptor("chest", "again", (0.0, 1.0)), _StubAdapter("chest"))
    with pytest.raises(DimensionMismatch):
        reg.register(DomainDescriptor("knee", "knee mri", (0.0, 1.0, 0.0)), _StubAdapter("knee"))


def test_registry_identify_then_dispatch():
    reg = DomainRegistry()
    reg.register(DomainDescriptor("chest", "", (1.0, 0.0)), _StubAdapter("chest"))
    reg.register(DomainDescriptor("knee", "", (0.0, 1.0)), _StubAdapter("knee"))
    domain = reg.identify(ImageEmbedding((0.9, 0.1), "img"))
    assert domain == "chest"
    out = reg.dispatch(domain).infer("img")
    assert out.domain_id == "chest"
    with pytest.raises(EmptyRegistry):
        reg.dispatch("dental")


def test_cad_output_validation():
    with pytest.raises(MalformedModelOutput):
        CadOutput("chest", (("edema", 0.4), ("edema", 0.6)))
    with pytest.raises(MalformedModelOutput):
        CadOutput("chest", (("edema", 1.2),))


def test_file_cad_adapter_roundtrip(tmp_path):
    fixture = {
        "domain": "chest",
        "records": {
            "img1": {
                "findings": [
                    {"disease": "cardiomegaly", "prob": 0.95},
                    {"disease": "edema", "prob": 0.30},
                ],
                "raw_report": "heart enlarged",
            }
        },
    }
    path = tmp_path / "cad.json"
    path.write_text(json.dumps(fixture), encoding="utf-8")
    adapter = FileCadAdapter(path)
    assert adapter.domain_id == "chest"
    assert adapter.image_ids() == ["img1"]
    out = adapter.infer("img1")
    assert out.findings == (("cardiomegaly", 0.95), ("edema", 0.30))
    assert out.raw_report == "heart enlarged"
    with pytest.raises(UnknownImage):
        adapter.infer("img2")


def test_file_embedding_provider(tmp_path):
    path = tmp_path / "emb.json"
    path.write_text(
        json.dumps({"dimension": 3, "vectors": {"img1": [1, 2, 2]}}), encoding="utf-8"
    )
    provider = FileEmbeddingProvider.from_file(path)
    assert provider.embedding("img1") == (1.0, 2.0, 2.0)
    assert "img1" in provider and "img9" not in provider
    with pytest.raises(UnknownImage):
        provider.embedding("img9")
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps({"dimension": 3, "vectors": {"img1": [1, 2]}}), encoding="utf-8"
    )
    with pytest.raises(DimensionMismatch):
        FileEmbeddingProvider.from_file(bad)
