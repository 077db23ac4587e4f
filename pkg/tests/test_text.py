import pytest

from medbridge.text import DEFAULT_TERMS, TermSet, phrase_occurrences, term_count, tokenize


def test_tokenize_strips_punctuation():
    assert tokenize("Pleural effusion, small.") == ["pleural", "effusion", "small"]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_lowercases_and_splits_hyphens():
    assert tokenize("X-ray x RAY") == ["x", "ray", "x", "ray"]


def test_term_count_single_word():
    assert term_count("effusion", ["pleural", "effusion", "effusion"]) == 2


def test_term_count_phrase_non_overlapping():
    tokens = ["pleural", "effusion", "pleural", "effusion"]
    assert term_count("pleural effusion", tokens) == 2


def test_term_count_empty_tokens():
    assert term_count("edema", []) == 0


def test_phrase_occurrences_left_to_right():
    # x ray x ray x -> matches at 0 and 2, then the trailing x cannot start one
    assert phrase_occurrences(("x", "ray"), ["x", "ray", "x", "ray", "x"]) == [0, 2]


def test_default_terms_are_17_unique():
    ts = TermSet.default()
    assert len(ts) == 17
    assert len(set(ts.terms)) == 17
    assert list(ts.terms) == [" ".join(tokenize(t)) for t in DEFAULT_TERMS]


def test_term_set_rejects_duplicates():
    with pytest.raises(ValueError):
        TermSet(("edema", "Edema"))


def test_term_set_rejects_empty():
    with pytest.raises(ValueError):
        TermSet(())


def test_term_set_round_trip(tmp_path):
    ts = TermSet(("effusion", "lung opacity"))
    path = tmp_path / "terms.json"
    ts.to_file(path)
    assert TermSet.from_file(path) == ts
