"""BM25 index over abstract titles+texts and top-k evidence pairing.

IDF uses the ln(1 + (N - df + 0.5)/(df + 0.5)) form, which stays positive
even for terms present in every document.
"""
from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from .corpus import DatasetError, EvidenceAbstract, EvidencePairing, NewsArticle
from .text_metrics import tokenize

__all__ = [
    "Bm25Index", "tokenize", "build_index", "top_k", "pair_evidence",
    "save_index", "load_index", "DEFAULT_K1", "DEFAULT_B",
]

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


@dataclass(frozen=True)
class Bm25Index:
    k1: float
    b: float
    doc_count: int
    avg_doc_len: float
    doc_lengths: dict[str, int]
    # term -> ((doc_id, term_frequency), ...) with doc_ids ascending
    postings: dict[str, tuple[tuple[str, int], ...]]


def _check_params(k1: float, b: float) -> None:
    if k1 <= 0.0:
        raise ValueError(f"k1 must be positive, got {k1}")
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"b must lie in [0, 1], got {b}")


def build_index(
    abstracts: Sequence[EvidenceAbstract],
    k1: float = DEFAULT_K1,
    b: float = DEFAULT_B,
) -> Bm25Index:
    """Index each abstract's title and text as one document keyed by its id."""
    _check_params(k1, b)
    if not abstracts:
        raise DatasetError("cannot build an index over zero abstracts")
    doc_lengths: dict[str, int] = {}
    term_docs: dict[str, dict[str, int]] = {}
    for abstract in abstracts:
        if abstract.id in doc_lengths:
            raise DatasetError(f"duplicate abstract id {abstract.id!r}")
        tokens = tokenize(abstract.title + " " + abstract.abstract)
        doc_lengths[abstract.id] = len(tokens)
        for term, tf in Counter(tokens).items():
            term_docs.setdefault(term, {})[abstract.id] = tf
    postings = {
        term: tuple(sorted(docs.items()))
        for term, docs in sorted(term_docs.items())
    }
    return Bm25Index(
        k1=k1,
        b=b,
        doc_count=len(doc_lengths),
        avg_doc_len=sum(doc_lengths.values()) / len(doc_lengths),
        doc_lengths=doc_lengths,
        postings=postings,
    )


def idf(index: Bm25Index, term: str) -> float:
    df = len(index.postings.get(term, ()))
    return math.log(1.0 + (index.doc_count - df + 0.5) / (df + 0.5))


def top_k(index: Bm25Index, query: str, k: int = 3) -> list[tuple[str, float]]:
    """Rank documents for ``query``, best first; ties break on ascending doc id.

    Every occurrence of a query token contributes, so repeated terms weigh
    more.  Only documents sharing at least one term appear, hence the result
    may be shorter than ``k``.
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    scores: dict[str, float] = {}
    for term in tokenize(query):
        plist = index.postings.get(term)
        if not plist:
            continue
        term_idf = idf(index, term)
        for doc_id, tf in plist:
            dl = index.doc_lengths[doc_id]
            denom = tf + index.k1 * (1.0 - index.b + index.b * dl / index.avg_doc_len)
            scores[doc_id] = scores.get(doc_id, 0.0) + term_idf * tf * (index.k1 + 1.0) / denom
    ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def pair_evidence(
    articles: Sequence[NewsArticle],
    index: Bm25Index,
    k: int = 3,
) -> tuple[list[EvidencePairing], list[str]]:
    """Attach the top-k abstracts to each article, querying on title plus body.

    Articles sharing no term with any abstract cannot be paired; their ids
    come back in the second list instead of an empty pairing.
    """
    pairings: list[EvidencePairing] = []
    unmatched: list[str] = []
    for article in articles:
        ranked = top_k(index, article.title + " " + article.body, k)
        if ranked:
            pairings.append(EvidencePairing(article.id, tuple(ranked)))
        else:
            unmatched.append(article.id)
    return pairings, unmatched


def save_index(index: Bm25Index, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "k1": index.k1,
        "b": index.b,
        "doc_count": index.doc_count,
        "avg_doc_len": index.avg_doc_len,
        "doc_lengths": index.doc_lengths,
        "postings": {t: [list(p) for p in ps] for t, ps in index.postings.items()},
    }
    path.write_text(json.dumps(payload, ensure_ascii=False), encoding="utf-8")


def load_index(path: str | Path) -> Bm25Index:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: file does not exist")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        index = Bm25Index(
            k1=float(raw["k1"]),
            b=float(raw["b"]),
            doc_count=int(raw["doc_count"]),
            avg_doc_len=float(raw["avg_doc_len"]),
            doc_lengths={str(d): int(n) for d, n in raw["doc_lengths"].items()},
            postings={
                str(t): tuple((str(d), int(tf)) for d, tf in ps)
                for t, ps in raw["postings"].items()
            },
        )
    except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
        raise DatasetError(f"{path}: malformed index file ({exc})") from None
    _check_params(index.k1, index.b)
    if index.doc_count != len(index.doc_lengths):
        raise DatasetError(f"{path}: doc_count disagrees with doc_lengths")
    expected_avg = sum(index.doc_lengths.values()) / len(index.doc_lengths)
    if abs(expected_avg - index.avg_doc_len) > 1e-9:
        raise DatasetError(f"{path}: avg_doc_len is not the mean of doc_lengths")
    return index
