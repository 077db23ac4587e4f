"""Acceptance gate: one test per release criterion.

Each test prints a single `acceptance: <name>: PASS|FAIL` line on the
real stdout (past pytest's capture) so the gate's outcome is readable at
a glance in any log. Expected values come from independent oracles or
hand simulation, never from the code under test.
"""

import itertools
import json
import math
import random
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
from fastapi.testclient import TestClient

from medbridge.domains import (
    DomainDescriptor,
    FileCadAdapter,
    FileEmbeddingProvider,
    DomainRegistry,
    ImageEmbedding,
    identify_domain,
)
from medbridge.knowledge import ScriptNavigator, ingest_dir, retrieve_knowledge
from medbridge.llm import RuleGateway
from medbridge.metrics import corpus_bleu, mean_rouge_l, rouge_l
from medbridge.pipeline import generate_report
from medbridge.prob2text import PromptStyle, describe_finding
from medbridge.retrieval.index import build_index, load_index
from medbridge.retrieval.tfidf import (
    compute_tie_from_tokens,
    fit_corpus_stats,
    spherical_project,
)
from medbridge.service.app import build_state, create_app
from medbridge.service.config import load_config
from medbridge.templates import TemplateSet
from medbridge.text import TermSet, tokenize

from .oracles import oracle_bleu, oracle_rouge_l, oracle_tfidf_vectors
from .test_service import write_config

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@contextmanager
def criterion(capsys, name):
    status = "PASS"
    try:
        yield
    except BaseException:
        status = "FAIL"
        raise
    finally:
        with capsys.disabled():
            print(f"acceptance: {name}: {status}")


# --- 1. KD-tree vs. brute-force cosine ranking --------------------------

_TERM_WORDS = sorted({w for t in TermSet.default() for w in t.split(" ")})
_FILLERS = ["the", "patient", "is", "stable", "and", "clear", "on", "exam", "seen"]
_POOL = _TERM_WORDS + _FILLERS


def _random_report(rng) -> str:
    n_words = int(rng.integers(3, 40))
    return " ".join(_POOL[int(i)] for i in rng.integers(0, len(_POOL), n_words))


def _cosine_rank_oracle(query_tie, records, k):
    """Rank ids by descending cosine of unit vectors, ties to lower id.

    Normalizing before the dot product makes documents that share a
    direction (same term profile at different lengths) tie bit-exactly,
    so the id rule applies to them on both sides of the comparison.
    """
    u = np.asarray(query_tie, dtype=float)
    u = u / np.linalg.norm(u)
    cos = {r.id: float(np.dot(u, r.tie / np.linalg.norm(r.tie))) for r in records}
    order = sorted(cos, key=lambda i: (-cos[i], i))
    return order[: min(k, len(records))], cos


def _assert_rank_equal(got, expected, cos, tol=1e-12):
    """Positional equality, except inside clusters of equal cosine.

    Tree search orders by L2, the oracle by cosine; when two documents
    are mathematically tied but not bit-identical, the two arithmetic
    paths may disagree in the last ulp, so either order is accepted
    there — and only there.
    """
    assert len(got) == len(expected)
    for g, e in zip(got, expected):
        if g != e:
            assert abs(cos[g] - cos[e]) <= tol


def test_kdtree_matches_cosine_oracle(capsys):
    with criterion(capsys, "kdtree-oracle-equivalence"):
        rng = np.random.default_rng(101)
        terms = TermSet.default()
        started = time.perf_counter()
        for _ in range(200):
            n = int(rng.integers(1, 501))
            corpus = [_random_report(rng) for _ in range(n)]
            # make sure at least one document is indexable
            corpus[0] += " " + _TERM_WORDS[int(rng.integers(0, len(_TERM_WORDS)))]
            index = build_index(corpus, terms)
            assert len(index.records[0].tie) == len(terms)
            # querying with an indexed text plus noise never yields a zero
            # embedding, so every trial exercises the tree
            query = index.records[int(rng.integers(0, len(index)))].text
            query += " " + _random_report(rng)
            query_tie = index.query_tie(query)
            for k in (1, 3, 5):
                got = [rec.id for rec, _ in index.query_top_k(query, k)]
                expected, cos = _cosine_rank_oracle(query_tie, index.records, k)
                _assert_rank_equal(got, expected, cos)
        assert time.perf_counter() - started <= 60.0


# --- 2. chord length equals 2 sin(theta/2) on the unit sphere -----------


def test_projection_distance_identity(capsys):
    with criterion(capsys, "projection-identity"):
        rng = np.random.default_rng(202)
        started = time.perf_counter()
        for _ in range(1000):
            q = rng.normal(size=17)
            v = rng.normal(size=17)
            q /= np.linalg.norm(q)
            v /= np.linalg.norm(v)
            theta = math.acos(max(-1.0, min(1.0, float(np.dot(q, v)))))
            chord = float(np.linalg.norm(q - v))
            assert abs(chord - 2.0 * math.sin(theta / 2.0)) <= 1e-9
        assert time.perf_counter() - started <= 1.0


# --- 3. TF-IDF on the three-document corpus -----------------------------


def test_tfidf_three_document_example(capsys):
    with criterion(capsys, "tfidf-hand-example"):
        corpus = ["effusion effusion present", "no effusion", "cardiomegaly noted"]
        terms = TermSet(("effusion", "cardiomegaly"))
        stats = fit_corpus_stats([tokenize(d) for d in corpus], terms)
        got = [compute_tie_from_tokens(tokenize(d), stats, terms) for d in corpus]

        expected = oracle_tfidf_vectors(corpus, list(terms))
        for got_vec, exp_vec in zip(got, expected):
            for g, e in zip(got_vec, exp_vec):
                assert abs(g - e) <= 1e-12

        # closed forms for the first and last document
        assert abs(got[0][0] - (2 / 3) * math.log(3 / 2)) <= 1e-12
        assert abs(got[0][1] - 0.0) <= 1e-12
        assert abs(got[2][0] - 0.0) <= 1e-12
        assert abs(got[2][1] - (1 / 2) * math.log(3)) <= 1e-12

        # unit-norm projection of a hand vector
        point = spherical_project(np.array([3.0, 4.0]))
        assert abs(point[0] - 0.6) <= 1e-12 and abs(point[1] - 0.8) <= 1e-12


# --- 4. probability phrasing golden table -------------------------------

_GOLDEN_PROBS = [0.0, 0.19999999, 0.2, 0.49999999, 0.5, 0.89999999, 0.9, 1.0]

_GOLDEN = {
    "p1": [
        "edema score: 0.000",
        "edema score: 0.200",
        "edema score: 0.200",
        "edema score: 0.500",
        "edema score: 0.500",
        "edema score: 0.900",
        "edema score: 0.900",
        "edema score: 1.000",
    ],
    "p2": [
        "No Finding",
        "No Finding",
        "No Finding",
        "No Finding",
        "The prediction is edema",
        "The prediction is edema",
        "The prediction is edema",
        "The prediction is edema",
    ],
    "p3": [
        "No sign of edema",
        "No sign of edema",
        "Small possibility of edema",
        "Small possibility of edema",
        "Patient is likely to have edema",
        "Patient is likely to have edema",
        "Definitely have edema",
        "Definitely have edema",
    ],
}


def test_prob2text_golden_table(capsys):
    with criterion(capsys, "prob2text-golden-table"):
        for style_value, lines in _GOLDEN.items():
            style = PromptStyle.parse(style_value)
            for prob, expected in zip(_GOLDEN_PROBS, lines):
                assert describe_finding("edema", prob, style) == expected


# --- 5. domain identification vs. brute-force argmax --------------------


def test_domain_dispatch_oracle(capsys):
    with criterion(capsys, "domain-dispatch-oracle"):
        rng = np.random.default_rng(505)
        for _ in range(100):
            dim = int(rng.integers(5, 33))
            mats = rng.normal(size=(9, dim))
            domains = [
                DomainDescriptor(f"d{i}", f"domain {i}", tuple(float(x) for x in mats[i]))
                for i in range(9)
            ]
            for _ in range(20):
                v = rng.normal(size=dim)
                got = identify_domain(ImageEmbedding(tuple(float(x) for x in v), "q"), domains)
                sims = mats @ v / (np.linalg.norm(mats, axis=1) * np.linalg.norm(v))
                assert got == f"d{int(np.argmax(sims))}"

        # well-separated clusters: centers on distinct axes, small noise
        dim = 12
        centers = np.zeros((9, dim))
        for i in range(9):
            centers[i, i] = 5.0
        domains = [
            DomainDescriptor(f"c{i}", f"cluster {i}", tuple(float(x) for x in centers[i]))
            for i in range(9)
        ]
        correct = 0
        total = 0
        for i in range(9):
            for _ in range(25):
                v = centers[i] + rng.normal(scale=0.05, size=dim)
                got = identify_domain(ImageEmbedding(tuple(float(x) for x in v), "q"), domains)
                correct += got == f"c{i}"
                total += 1
        assert correct == total == 225


# --- 6. depth-first retrieval vs. hand simulation -----------------------

_PE = "Pleural Effusion"
_QUERY = "pleural effusion drainage"

_PE_ABSTRACT = (
    "A pleural effusion is a buildup of fluid between the layers of tissue "
    "that line the lungs and the chest cavity. Common causes include heart "
    "failure, pneumonia, and malignancy."
)
_PE_SYMPTOMS = (
    "Many small effusions cause no symptoms. Larger effusions cause shortness "
    "of breath, chest pain that worsens with deep breathing, and a dry cough. "
    "Breath sounds are decreased over the fluid."
)
_PE_DRAINAGE = (
    "Large or symptomatic effusions are drained by therapeutic thoracentesis "
    "or a chest tube. Recurrent effusions may need pleurodesis or an "
    "indwelling pleural catheter."
)
_PE_MEDICATION = (
    "Treatment targets the underlying cause: diuretics for heart failure, "
    "antibiotics for infection related effusions."
)

_ALL_SECTIONS = [(1, "Symptoms and Signs"), (2, "Diagnosis"), (3, "Treatment"), (4, "Prognosis")]
_TREATMENT_SUBS = [(1, "Drainage"), (2, "Medication")]


def _steps_view(trace):
    return [
        (s.path, s.presented, s.action.kind, s.action.index, s.converted)
        for s in trace.steps
    ]


def test_dfs_trace_equivalence(capsys):
    with criterion(capsys, "dfs-trace-equivalence"):
        tree = ingest_dir(FIXTURES / "knowledge")
        assert tree.node_count() == 17  # 3 topics, max depth 3

        # ranked candidates: only the first topic overlaps the query;
        # the others tie at zero and keep document order
        expected_candidates = [_PE, "Meniscus Tear", "Periodontitis"]

        # program 1: straight descent to a leaf, then Found
        t = retrieve_knowledge(_QUERY, tree, ScriptNavigator(["3", "1", "FOUND"]))
        assert t.candidates == expected_candidates
        assert _steps_view(t) == [
            ((_PE,), _ALL_SECTIONS, "select", 2, False),
            ((_PE, "Treatment"), _TREATMENT_SUBS, "select", 0, False),
            ((_PE, "Treatment", "Drainage"), [], "found", None, False),
        ]
        assert t.outcome == "found"
        assert t.found_path == (_PE, "Treatment", "Drainage")
        assert t.knowledge == _PE_DRAINAGE
        assert not t.low_confidence

        # program 2: try a sibling, Back, descend elsewhere; the tried
        # sibling disappears but numbering is preserved
        t = retrieve_knowledge(_QUERY, tree, ScriptNavigator(["2", "BACK", "3", "2", "FOUND"]))
        assert _steps_view(t) == [
            ((_PE,), _ALL_SECTIONS, "select", 1, False),
            ((_PE, "Diagnosis"), [], "back", None, False),
            ((_PE,), [(1, "Symptoms and Signs"), (3, "Treatment"), (4, "Prognosis")],
             "select", 2, False),
            ((_PE, "Treatment"), _TREATMENT_SUBS, "select", 1, False),
            ((_PE, "Treatment", "Medication"), [], "found", None, False),
        ]
        assert t.found_path == (_PE, "Treatment", "Medication")
        assert t.knowledge == _PE_MEDICATION

        # program 3: always Back walks each candidate once, then exhausts
        t = retrieve_knowledge(_QUERY, tree, ScriptNavigator([]))
        assert [s.path for s in t.steps] == [
            (_PE,), ("Meniscus Tear",), ("Periodontitis",)
        ]
        assert all(s.action.kind == "back" for s in t.steps)
        assert t.outcome == "exhausted"
        assert t.knowledge is None and t.found_path is None

        # program 4: budget runs out mid-walk; the deepest visited path's
        # overview text comes back flagged low-confidence
        t = retrieve_knowledge(
            _QUERY, tree, ScriptNavigator(["1", "BACK", "2", "BACK"]), budget=4
        )
        assert _steps_view(t) == [
            ((_PE,), _ALL_SECTIONS, "select", 0, False),
            ((_PE, "Symptoms and Signs"), [], "back", None, False),
            ((_PE,), [(2, "Diagnosis"), (3, "Treatment"), (4, "Prognosis")],
             "select", 1, False),
            ((_PE, "Diagnosis"), [], "back", None, False),
        ]
        assert t.outcome == "budget_stop"
        assert t.low_confidence
        assert t.knowledge == _PE_ABSTRACT + "\n\n" + _PE_SYMPTOMS

        # program 5: Found at the topic root returns the abstract
        t = retrieve_knowledge(_QUERY, tree, ScriptNavigator(["FOUND"]))
        assert _steps_view(t) == [((_PE,), _ALL_SECTIONS, "found", None, False)]
        assert t.found_path == (_PE,)
        assert t.knowledge == _PE_ABSTRACT

        # termination for a random-action navigator, with the budget far
        # above the structural bound (every node entered once, every
        # parent re-presented once per child return)
        n = tree.node_count()
        rng = random.Random(606)
        replies = ["1", "2", "3", "4", "5", "FOUND", "BACK", "???"]

        class _RandomNav:
            def reply(self, prompt):
                return rng.choice(replies)

        for _ in range(1000):
            t = retrieve_knowledge(_QUERY, tree, _RandomNav(), budget=200)
            assert t.outcome in ("found", "exhausted", "budget_stop")
            assert t.steps_used <= 2 * n + 1


# --- 7. pipeline determinism, identity at k=0, call budget --------------

_REPORT_RULES = [
    ("Example reports:", "Marked cardiomegaly with interstitial edema; no effusion."),
    ("Findings:", "Enlarged cardiac silhouette with cardiomegaly and mild edema."),
]


def _pipeline_parts():
    """A fresh, fully independent object graph over the same fixtures."""
    index = load_index(FIXTURES / "report_index.json")
    embeddings = FileEmbeddingProvider.from_file(FIXTURES / "embeddings.json")
    registry = DomainRegistry()
    for domain_id, text in (("chest", "chest x-ray"), ("dental", "dental x-ray"), ("knee", "knee mri")):
        registry.register(
            DomainDescriptor(domain_id, text, embeddings.embedding(domain_id)),
            FileCadAdapter(FIXTURES / f"cad_{domain_id}.json"),
        )
    return registry, index, embeddings


def _run_once(k):
    registry, index, embeddings = _pipeline_parts()
    gateway = RuleGateway(_REPORT_RULES)
    counter = itertools.count()
    return (
        generate_report(
            "img1", k, "p3", registry, index, gateway, embeddings,
            templates=TemplateSet.default(), clock=lambda: float(next(counter)),
        ),
        gateway,
    )


def test_pipeline_determinism_and_budget(capsys):
    with criterion(capsys, "end-to-end-determinism"):
        first, gw1 = _run_once(3)
        second, gw2 = _run_once(3)
        assert first.to_json() == second.to_json()  # byte-identical
        assert first.k_used == 3
        assert [c.tag for c in first.llm_calls] == ["preliminary", "refine"]
        assert len(gw1.requests) == len(gw2.requests) == 2

        bare, gw0 = _run_once(0)
        assert bare.enhanced_report == bare.preliminary_report
        assert bare.retrieved == []
        assert [c.tag for c in bare.llm_calls] == ["preliminary"]
        assert len(gw0.requests) == 1

        # the k=0 run shares every stage up to retrieval with the k=3 run
        assert bare.preliminary_report == first.preliminary_report
        assert bare.visual_description.lines == first.visual_description.lines


# --- 8. metric implementations vs. independent references ---------------

_METRIC_WORDS = ["the", "cat", "sat", "on", "mat", "a", "dog", "ran", "fast", "slept"]


def test_metrics_sanity(capsys):
    with criterion(capsys, "metrics-sanity"):
        same = ["the cat sat on the mat", "a dog ran fast"]
        assert abs(corpus_bleu(same, same) - 100.0) <= 1e-9
        assert abs(mean_rouge_l(same, same) - 100.0) <= 1e-9

        disjoint = (["alpha beta gamma delta"], ["epsilon zeta eta theta"])
        assert corpus_bleu(*disjoint) <= 1e-3
        assert mean_rouge_l(*disjoint) <= 1e-3

        rng = random.Random(808)
        for _ in range(50):
            cands, refs = [], []
            for _ in range(rng.randint(1, 6)):
                cands.append(" ".join(rng.choice(_METRIC_WORDS) for _ in range(rng.randint(1, 15))))
                refs.append(" ".join(rng.choice(_METRIC_WORDS) for _ in range(rng.randint(1, 15))))
            expected = oracle_bleu([tokenize(c) for c in cands], [tokenize(r) for r in refs])
            assert abs(corpus_bleu(cands, refs) - expected) <= 1e-6
            for c, r in zip(cands, refs):
                assert abs(rouge_l(c, r) - oracle_rouge_l(tokenize(c), tokenize(r))) <= 1e-6


# --- 9. one in-context example moves output toward the corpus -----------


def _copy_first_example(request):
    text = request.prompt_text
    start = text.index("Example 1:\n") + len("Example 1:\n")
    end = text.index("\n\nRevised report:", start)
    return text[start:end]


def test_k_ablation_direction(capsys):
    with criterion(capsys, "k-ablation-shape"):
        gateway = RuleGateway(
            [
                ("Example reports:", _copy_first_example),
                ("Findings:", "Enlarged cardiac silhouette with cardiomegaly and mild edema."),
            ]
        )
        registry, index, embeddings = _pipeline_parts()
        templates = TemplateSet.default()

        scores = {0: [], 1: []}
        for image in ("img1", "img2"):
            runs = {
                k: generate_report(image, k, "p3", registry, index, gateway, embeddings,
                                   templates=templates)
                for k in (0, 1)
            }
            # ground truth: the corpus report nearest to the preliminary
            reference = index.query_top_k(runs[0].preliminary_report, 1)[0][0].text
            for k in (0, 1):
                scores[k].append(rouge_l(runs[k].enhanced_report, reference))

        mean0 = sum(scores[0]) / len(scores[0])
        mean1 = sum(scores[1]) / len(scores[1])
        assert mean1 >= mean0
        assert all(s1 >= s0 for s0, s1 in zip(scores[0], scores[1]))


# --- 10. restart replays every trace and session byte-for-byte ----------


def test_service_durability(capsys, tmp_path):
    with criterion(capsys, "service-durability"):
        config = load_config(write_config(tmp_path))

        live = TestClient(create_app(build_state(config)))
        r1 = live.post("/v1/report", json={"image_id": "img1", "k": 3}).json()
        r2 = live.post("/v1/report", json={"image_id": "img4", "k": 1}).json()
        c1 = live.post("/v1/chat", json={"message": "What causes pleural effusion?"}).json()
        c2 = live.post(
            "/v1/chat",
            json={"session_id": c1["session_id"], "message": "How is it treated?"},
        ).json()
        assert c1["session_id"] == c2["session_id"]

        watched = [
            f"/v1/trace/{r1['trace_id']}",
            f"/v1/trace/{r2['trace_id']}",
            f"/v1/trace/{c1['trace_id']}",
            f"/v1/trace/{c2['trace_id']}",
            f"/v1/sessions/{c1['session_id']}",
            "/v1/cases",
        ]
        before = {}
        for url in watched:
            resp = live.get(url)
            assert resp.status_code == 200
            before[url] = resp.content

        # a brand-new process over the same data directory
        revived = TestClient(create_app(build_state(load_config(write_config(tmp_path)))))
        for url in watched:
            resp = revived.get(url)
            assert resp.status_code == 200
            assert resp.content == before[url]

        # id sequences continue where the first instance stopped
        seen = {r1["trace_id"], r2["trace_id"], c1["trace_id"], c2["trace_id"]}
        r3 = revived.post("/v1/report", json={"image_id": "img2", "k": 2}).json()
        assert r3["trace_id"] == f"tr-{len(seen) + 1:06d}"
        c3 = revived.post("/v1/chat", json={"message": "And prognosis?"}).json()
        assert c3["session_id"] == "s-000002"
