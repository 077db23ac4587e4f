"""Report evaluation: corpus BLEU, ROUGE-L, and rule-based CE labels.

Conventions pinned as constants: BLEU pools clipped n-gram counts over
the corpus, substitutes 1e-9 for any zero numerator or denominator, and
applies the usual brevity penalty; ROUGE-L is the LCS F-measure with
beta = 1.2. The label extractor is a lexical stand-in for a learned
labeler: a term counts as negated when a negation cue sits within the
four tokens before it and no contrast word breaks the scope in between.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

from .errors import EmptyCorpus, LengthMismatch
from .text import TermSet, phrase_occurrences, tokenize

BLEU_EPSILON = 1e-9
ROUGE_BETA = 1.2

NEGATION_CUES = ("no", "not", "without", "no sign of", "free of")
NEGATION_WINDOW = 4
SCOPE_BREAKERS = frozenset({"but", "however", "although", "except", "yet"})


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(candidates: list[str], references: list[str], max_n: int = 4) -> float:
    """Corpus-level BLEU in [0, 100], one reference per candidate."""
    if len(candidates) != len(references):
        raise LengthMismatch(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise EmptyCorpus("nothing to score")
    cand_tokens = [tokenize(c) for c in candidates]
    ref_tokens = [tokenize(r) for r in references]
    matched = [0] * max_n
    total = [0] * max_n
    for cand, ref in zip(cand_tokens, ref_tokens):
        for n in range(1, max_n + 1):
            cand_grams = _ngrams(cand, n)
            ref_grams = _ngrams(ref, n)
            total[n - 1] += max(len(cand) - n + 1, 0)
            matched[n - 1] += sum(
                min(count, ref_grams[gram]) for gram, count in cand_grams.items()
            )
    log_sum = 0.0
    for n in range(max_n):
        p = matched[n] / total[n] if matched[n] > 0 and total[n] > 0 else BLEU_EPSILON
        log_sum += math.log(p)
    c = sum(len(t) for t in cand_tokens)
    r = sum(len(t) for t in ref_tokens)
    if c == 0:
        return 0.0
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return bp * math.exp(log_sum / max_n) * 100.0


def _lcs_length(a: list[str], b: list[str]) -> int:
    # one-row DP over the shorter sequence
    if len(b) > len(a):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    for x in a:
        curr = [0]
        for j, y in enumerate(b, start=1):
            curr.append(prev[j - 1] + 1 if x == y else max(prev[j], curr[j - 1]))
        prev = curr
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> float:
    """LCS F-measure in [0, 100]; empty candidate or reference scores 0."""
    cand = tokenize(candidate)
    ref = tokenize(reference)
    if not cand or not ref:
        return 0.0
    lcs = _lcs_length(cand, ref)
    if lcs == 0:
        return 0.0
    precision = lcs / len(cand)
    recall = lcs / len(ref)
    beta2 = ROUGE_BETA**2
    return (1 + beta2) * precision * recall / (recall + beta2 * precision) * 100.0


def mean_rouge_l(candidates: list[str], references: list[str]) -> float:
    if len(candidates) != len(references):
        raise LengthMismatch(f"{len(candidates)} candidates vs {len(references)} references")
    if not candidates:
        raise EmptyCorpus("nothing to score")
    return sum(rouge_l(c, r) for c, r in zip(candidates, references)) / len(candidates)


def _cue_spans(tokens: list[str]) -> list[tuple[int, int]]:
    """(start, end) spans of every negation-cue occurrence, end exclusive."""
    spans = []
    for cue in NEGATION_CUES:
        phrase = tuple(cue.split(" "))
        if len(phrase) == 1:
            spans.extend((i, i + 1) for i, tok in enumerate(tokens) if tok == phrase[0])
        else:
            spans.extend((s, s + len(phrase)) for s in phrase_occurrences(phrase, tokens))
    return spans


def _is_negated(position: int, tokens: list[str], cue_spans: list[tuple[int, int]]) -> bool:
    for start, end in cue_spans:
        if end <= position and start >= position - NEGATION_WINDOW:
            between = tokens[end:position]
            if not any(tok in SCOPE_BREAKERS for tok in between):
                return True
    return False


def extract_labels(report: str, term_set: TermSet) -> tuple[bool, ...]:
    """One bit per term: set iff any occurrence sits outside a negation scope."""
    tokens = tokenize(report)
    cues = _cue_spans(tokens)
    bits = []
    for phrase in term_set.token_forms:
        positions = (
            [i for i, tok in enumerate(tokens) if tok == phrase[0]]
            if len(phrase) == 1
            else phrase_occurrences(phrase, tokens)
        )
        bits.append(any(not _is_negated(pos, tokens, cues) for pos in positions))
    return tuple(bits)


@dataclass(frozen=True)
class CeScores:
    precision: float
    recall: float
    f1: float


def ce_scores(
    predicted: list[tuple[bool, ...]], truth: list[tuple[bool, ...]]
) -> CeScores:
    """Micro-averaged precision/recall/F1 over every (sample, label) cell."""
    if len(predicted) != len(truth):
        raise LengthMismatch(f"{len(predicted)} predictions vs {len(truth)} truths")
    tp = fp = fn = 0
    for pred, gold in zip(predicted, truth):
        if len(pred) != len(gold):
            raise LengthMismatch(f"label width {len(pred)} vs {len(gold)}")
        for p, g in zip(pred, gold):
            if p and g:
                tp += 1
            elif p and not g:
                fp += 1
            elif g and not p:
                fn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return CeScores(precision=precision, recall=recall, f1=f1)
