"""Deterministic text measures: tokenization, sentence splitting, bigram overlap."""
from __future__ import annotations

import re
from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

# \w minus underscore == alphanumeric runs after lowercasing
_TOKEN_RE = re.compile(r"[^\W_]+")

_TERMINATORS = ".!?"

# Last-token matches that suppress a split after a period.
DEFAULT_ABBREVIATIONS = frozenset({
    "dr.", "mr.", "mrs.", "ms.", "prof.", "st.",
    "fig.", "figs.", "eq.", "no.", "vol.", "pp.", "p.",
    "e.g.", "i.e.", "cf.", "al.", "etc.", "vs.", "approx.",
    "jan.", "feb.", "mar.", "apr.", "jun.", "jul.", "aug.",
    "sep.", "sept.", "oct.", "nov.", "dec.",
})

ROUGE_VARIANTS = ("f1", "recall", "precision")


def tokenize(text: str) -> list[str]:
    """Lowercase ``text`` and split it into maximal alphanumeric runs."""
    return _TOKEN_RE.findall(text.lower())


def _suppresses_split(fragment: str, abbreviations: frozenset[str]) -> bool:
    words = fragment.split()
    if not words:
        return False
    last = words[-1].lower().lstrip("([{\"'“‘")
    if last in abbreviations:
        return True
    # single-letter initials such as "J." in author lists
    return len(last) == 2 and last[0].isalpha() and last.endswith(".")


def split_sentences(text: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS) -> list[str]:
    """Split ``text`` into sentences at ``.!?`` followed by whitespace or end.

    A period is not a boundary when the preceding token is a known
    abbreviation or a single-letter initial.  Sentences come back stripped,
    in order, with interior whitespace untouched.
    """
    sentences: list[str] = []
    start = 0
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in _TERMINATORS:
            continue
        if i + 1 < n and not text[i + 1].isspace():
            continue
        candidate = text[start:i + 1]
        if ch == "." and _suppresses_split(candidate, abbreviations):
            continue
        stripped = candidate.strip()
        if stripped:
            sentences.append(stripped)
        start = i + 1
    tail = text[start:].strip()
    if tail:
        sentences.append(tail)
    return sentences


@dataclass(frozen=True)
class Rouge2Score:
    precision: float
    recall: float
    f1: float

    def value(self, variant: str) -> float:
        if variant not in ROUGE_VARIANTS:
            raise ValueError(f"unknown ROUGE variant {variant!r}; expected one of {ROUGE_VARIANTS}")
        return getattr(self, variant if variant != "f1" else "f1")


def _bigrams(tokens: Sequence[str]) -> Counter:
    return Counter(zip(tokens, tokens[1:]))


def rouge2(candidate: str, reference: str) -> Rouge2Score:
    """Bigram-overlap precision/recall/F1 between two texts.

    Bigrams are counted as multisets over lowercase alphanumeric tokens;
    a side with no bigrams scores 0.0 rather than dividing by zero.
    """
    cand = _bigrams(tokenize(candidate))
    ref = _bigrams(tokenize(reference))
    overlap = sum((cand & ref).values())
    cand_total = sum(cand.values())
    ref_total = sum(ref.values())
    precision = overlap / cand_total if cand_total else 0.0
    recall = overlap / ref_total if ref_total else 0.0
    # same value as the harmonic mean of P and R, but exact on ratios of
    # small integers, so a mathematically-0.4 score compares equal to 0.4
    f1 = 2.0 * overlap / (cand_total + ref_total) if cand_total + ref_total else 0.0
    return Rouge2Score(precision, recall, f1)


@dataclass(frozen=True)
class GatedPair:
    """One candidate/reference pair with its overlap score attached."""
    candidate: str
    reference: str
    score: Rouge2Score


def quality_gate(
    pairs: Iterable[tuple[str, str]],
    threshold: float = 0.4,
    variant: str = "f1",
) -> tuple[list[GatedPair], list[GatedPair]]:
    """Partition (candidate, reference) pairs by ROUGE-2 against ``threshold``.

    Returns (kept, rejected).  A pair is kept only when its score is
    strictly above the threshold, so boundary scores land in rejected.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    if variant not in ROUGE_VARIANTS:
        raise ValueError(f"unknown ROUGE variant {variant!r}; expected one of {ROUGE_VARIANTS}")
    kept: list[GatedPair] = []
    rejected: list[GatedPair] = []
    for candidate, reference in pairs:
        score = rouge2(candidate, reference)
        bucket = kept if score.value(variant) > threshold else rejected
        bucket.append(GatedPair(candidate, reference, score))
    return kept, rejected
