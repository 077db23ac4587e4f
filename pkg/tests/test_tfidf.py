import math
import random

import numpy as np
import pytest

from medbridge.errors import ZeroEmbedding
from medbridge.retrieval.tfidf import (
    CorpusStats,
    compute_tie,
    fit_corpus_stats,
    spherical_project,
)
from medbridge.text import TermSet, tokenize

from .oracles import oracle_tfidf_vectors

HAND_CORPUS = ["effusion effusion present", "no effusion", "cardiomegaly noted"]
HAND_TERMS = TermSet(("effusion", "cardiomegaly"))


def _fit(corpus, term_set):
    return fit_corpus_stats([tokenize(t) for t in corpus], term_set)


def test_hand_corpus_stats():
    stats = _fit(HAND_CORPUS, HAND_TERMS)
    assert stats.doc_count == 3
    assert stats.doc_freq == (2, 1)
    assert stats.idf == pytest.approx([math.log(3 / 2), math.log(3)], abs=0)


def test_hand_corpus_ties_match_independent_oracle():
    stats = _fit(HAND_CORPUS, HAND_TERMS)
    expected = oracle_tfidf_vectors(HAND_CORPUS, list(HAND_TERMS.terms))
    for text, exp in zip(HAND_CORPUS, expected):
        tie = compute_tie(text, stats, HAND_TERMS)
        assert tie == pytest.approx(exp, abs=1e-12)


def test_hand_corpus_frozen_values():
    # (2/3)*ln(3/2) and (1/2)*ln(3), rounded as 0.270310 / 0.549306
    stats = _fit(HAND_CORPUS, HAND_TERMS)
    d1 = compute_tie(HAND_CORPUS[0], stats, HAND_TERMS)
    d3 = compute_tie(HAND_CORPUS[2], stats, HAND_TERMS)
    assert d1 == pytest.approx([0.270310, 0.0], abs=1e-6)
    assert d3 == pytest.approx([0.0, 0.549306], abs=1e-6)


def test_no_term_document_yields_zero_vector():
    stats = _fit(HAND_CORPUS, HAND_TERMS)
    assert not np.any(compute_tie("completely unrelated text", stats, HAND_TERMS))


def test_df_zero_term_contributes_zero():
    terms = TermSet(("effusion", "glaucoma"))
    stats = _fit(HAND_CORPUS, terms)
    assert stats.doc_freq[1] == 0
    tie = compute_tie("glaucoma glaucoma", stats, terms)
    assert tie[1] == 0.0


def test_empty_document_zero_vector():
    stats = _fit(HAND_CORPUS, HAND_TERMS)
    assert not np.any(compute_tie("", stats, HAND_TERMS))


def test_corpus_stats_validates_df_range():
    with pytest.raises(ValueError):
        CorpusStats(doc_count=2, doc_freq=(3,))


def test_spherical_project_normalizes():
    point = spherical_project(np.array([3.0, 4.0]))
    assert point == pytest.approx([0.6, 0.8], abs=0)


def test_spherical_project_rejects_zero():
    with pytest.raises(ZeroEmbedding):
        spherical_project(np.zeros(2))


def test_spherical_project_unit_norm_random():
    rng = random.Random(7)
    for _ in range(200):
        vec = np.array([rng.random() for _ in range(17)])
        point = spherical_project(vec)
        assert abs(float(np.linalg.norm(point)) - 1.0) <= 1e-12


def test_random_ties_match_oracle():
    rng = random.Random(13)
    terms = TermSet(("effusion", "cardiomegaly", "lung opacity", "edema"))
    vocab = ["effusion", "cardiomegaly", "lung", "opacity", "edema", "the", "seen", "is"]
    for _ in range(50):
        corpus = [
            " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 20)))
            for _ in range(rng.randint(1, 30))
        ]
        stats = _fit(corpus, terms)
        expected = oracle_tfidf_vectors(corpus, list(terms.terms))
        for text, exp in zip(corpus, expected):
            assert compute_tie(text, stats, terms) == pytest.approx(exp, abs=1e-12)
