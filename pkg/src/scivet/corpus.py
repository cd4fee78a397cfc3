"""Article/abstract corpus types, JSONL storage, keyword filter, dataset stats."""
from __future__ import annotations

import datetime as _dt
import json
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .text_metrics import split_sentences


class DatasetError(Exception):
    """A corpus file or record violates the data contract."""


class Label(str, Enum):
    RELIABLE = "Reliable"
    UNRELIABLE = "Unreliable"


class Origin(str, Enum):
    HUMAN = "Human"
    LLM = "LLM"


# Articles mentioning none of these are dropped by the default ingest filter.
DEFAULT_KEYWORDS = (
    "scientist",
    "investigating",
    "study finds",
    "experts say",
    "experts recommend",
)

MAX_EVIDENCE_PER_ARTICLE = 3


@dataclass(frozen=True)
class NewsArticle:
    id: str
    title: str
    body: str
    label: Label | None = None
    origin: Origin | None = None
    source: str = ""
    published: str | None = None
    generator: str | None = None


@dataclass(frozen=True)
class EvidenceAbstract:
    id: str
    title: str
    abstract: str
    doi: str | None = None
    external_ids: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class EvidencePairing:
    """Evidence abstracts ranked for one article, strongest first."""
    article_id: str
    evidence: tuple[tuple[str, float], ...]


@dataclass(frozen=True)
class StatsBlock:
    article_count: int
    avg_sentences_per_article: float
    min_sentences: int
    max_sentences: int
    avg_words_per_sentence: float


@dataclass(frozen=True)
class CorpusStats(StatsBlock):
    by_origin: tuple[tuple[str, StatsBlock], ...] = ()


def _require(condition: bool, where: str, message: str) -> None:
    if not condition:
        raise DatasetError(f"{where}: {message}")


def _validate_article(article: NewsArticle, where: str) -> None:
    _require(bool(article.id), where, "article id is empty")
    _require(bool(article.body.strip()), where, f"article {article.id!r} has an empty body")
    if article.published is not None:
        try:
            _dt.date.fromisoformat(article.published[:10])
        except ValueError:
            raise DatasetError(
                f"{where}: article {article.id!r} has non-ISO published date {article.published!r}"
            ) from None
    if article.origin is Origin.LLM:
        _require(article.label is not None, where,
                 f"LLM-origin article {article.id!r} is missing an explicit label")


def article_from_dict(raw: Mapping, where: str = "record") -> NewsArticle:
    try:
        label = Label(raw["label"]) if raw.get("label") is not None else None
        origin = Origin(raw["origin"]) if raw.get("origin") is not None else None
    except ValueError as exc:
        raise DatasetError(f"{where}: {exc}") from None
    try:
        article = NewsArticle(
            id=str(raw["id"]),
            title=str(raw.get("title", "")),
            body=str(raw["body"]),
            label=label,
            origin=origin,
            source=str(raw.get("source", "")),
            published=raw.get("published"),
            generator=raw.get("generator"),
        )
    except KeyError as exc:
        raise DatasetError(f"{where}: missing required field {exc.args[0]!r}") from None
    _validate_article(article, where)
    return article


def article_to_dict(article: NewsArticle) -> dict:
    out: dict = {"id": article.id, "title": article.title, "body": article.body}
    if article.label is not None:
        out["label"] = article.label.value
    if article.origin is not None:
        out["origin"] = article.origin.value
    if article.source:
        out["source"] = article.source
    if article.published is not None:
        out["published"] = article.published
    if article.generator is not None:
        out["generator"] = article.generator
    return out


def abstract_from_dict(raw: Mapping, where: str = "record") -> EvidenceAbstract:
    try:
        abstract = EvidenceAbstract(
            id=str(raw["id"]),
            title=str(raw.get("title", "")),
            abstract=str(raw["abstract"]),
            doi=raw.get("doi"),
            external_ids=tuple(sorted((str(k), str(v)) for k, v in (raw.get("external_ids") or {}).items())),
        )
    except KeyError as exc:
        raise DatasetError(f"{where}: missing required field {exc.args[0]!r}") from None
    _require(bool(abstract.id), where, "abstract id is empty")
    _require(bool(abstract.abstract.strip()), where, f"abstract {abstract.id!r} has empty text")
    return abstract


def abstract_to_dict(abstract: EvidenceAbstract) -> dict:
    out: dict = {"id": abstract.id, "title": abstract.title, "abstract": abstract.abstract}
    if abstract.doi is not None:
        out["doi"] = abstract.doi
    if abstract.external_ids:
        out["external_ids"] = dict(abstract.external_ids)
    return out


def pairing_from_dict(raw: Mapping, where: str = "record") -> EvidencePairing:
    try:
        evidence = tuple((str(i), float(s)) for i, s in raw["evidence"])
        pairing = EvidencePairing(article_id=str(raw["article_id"]), evidence=evidence)
    except (KeyError, TypeError, ValueError) as exc:
        raise DatasetError(f"{where}: malformed pairing ({exc})") from None
    _require(bool(pairing.evidence), where, f"pairing for {pairing.article_id!r} has no evidence")
    _require(len(pairing.evidence) <= MAX_EVIDENCE_PER_ARTICLE, where,
             f"pairing for {pairing.article_id!r} lists more than "
             f"{MAX_EVIDENCE_PER_ARTICLE} abstracts")
    scores = [s for _, s in pairing.evidence]
    _require(all(a >= b for a, b in zip(scores, scores[1:])), where,
             f"pairing for {pairing.article_id!r} is not sorted by descending score")
    ids = [i for i, _ in pairing.evidence]
    _require(len(set(ids)) == len(ids), where,
             f"pairing for {pairing.article_id!r} repeats an abstract id")
    _require(all(s > 0.0 for s in scores), where,
             f"pairing for {pairing.article_id!r} carries a non-positive score")
    return pairing


def pairing_to_dict(pairing: EvidencePairing) -> dict:
    return {
        "article_id": pairing.article_id,
        "evidence": [[i, s] for i, s in pairing.evidence],
    }


def _load_jsonl(path: str | Path, parse, unique_key) -> list:
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"{path}: file does not exist")
    records = []
    seen: set[str] = set()
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            where = f"{path}:{lineno}"
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{where}: invalid JSON ({exc.msg})") from None
            record = parse(raw, where)
            key = unique_key(record)
            if key in seen:
                raise DatasetError(f"{where}: duplicate id {key!r}")
            seen.add(key)
            records.append(record)
    return records


def _save_jsonl(records: Iterable, path: str | Path, serialize) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(serialize(record), ensure_ascii=False) + "\n")


def load_articles(path: str | Path) -> list[NewsArticle]:
    """Read one article per JSONL line; errors carry the offending line number."""
    return _load_jsonl(path, article_from_dict, lambda a: a.id)


def save_articles(articles: Iterable[NewsArticle], path: str | Path) -> None:
    _save_jsonl(articles, path, article_to_dict)


def load_abstracts(path: str | Path) -> list[EvidenceAbstract]:
    return _load_jsonl(path, abstract_from_dict, lambda a: a.id)


def save_abstracts(abstracts: Iterable[EvidenceAbstract], path: str | Path) -> None:
    _save_jsonl(abstracts, path, abstract_to_dict)


def load_pairings(path: str | Path) -> list[EvidencePairing]:
    return _load_jsonl(path, pairing_from_dict, lambda p: p.article_id)


def save_pairings(pairings: Iterable[EvidencePairing], path: str | Path) -> None:
    _save_jsonl(pairings, path, pairing_to_dict)


def keyword_filter(
    articles: Sequence[NewsArticle],
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
) -> list[NewsArticle]:
    """Keep articles whose title or body mentions any keyword, case-insensitively."""
    if not keywords:
        raise ValueError("keyword list must not be empty")
    lowered = [k.lower() for k in keywords]
    kept = []
    for article in articles:
        haystack = (article.title + " " + article.body).lower()
        if any(k in haystack for k in lowered):
            kept.append(article)
    return kept


def _stats_block(articles: Sequence[NewsArticle]) -> StatsBlock:
    sentence_counts = []
    total_words = 0
    for article in articles:
        sentences = split_sentences(article.body)
        sentence_counts.append(len(sentences))
        total_words += sum(len(s.split()) for s in sentences)
    total_sentences = sum(sentence_counts)
    return StatsBlock(
        article_count=len(articles),
        avg_sentences_per_article=total_sentences / len(articles),
        min_sentences=min(sentence_counts),
        max_sentences=max(sentence_counts),
        avg_words_per_sentence=total_words / total_sentences if total_sentences else 0.0,
    )


def dataset_stats(articles: Sequence[NewsArticle]) -> CorpusStats:
    """Sentence/word profile of a corpus, overall and per origin."""
    if not articles:
        raise DatasetError("cannot compute statistics for an empty corpus")
    overall = _stats_block(articles)
    by_origin = []
    for origin in Origin:
        subset = [a for a in articles if a.origin is origin]
        if subset:
            by_origin.append((origin.value, _stats_block(subset)))
    return CorpusStats(
        article_count=overall.article_count,
        avg_sentences_per_article=overall.avg_sentences_per_article,
        min_sentences=overall.min_sentences,
        max_sentences=overall.max_sentences,
        avg_words_per_sentence=overall.avg_words_per_sentence,
        by_origin=tuple(by_origin),
    )


def stats_to_dict(stats: CorpusStats) -> dict:
    def block(b: StatsBlock) -> dict:
        return {
            "article_count": b.article_count,
            "avg_sentences_per_article": b.avg_sentences_per_article,
            "min_sentences": b.min_sentences,
            "max_sentences": b.max_sentences,
            "avg_words_per_sentence": b.avg_words_per_sentence,
        }

    out = block(stats)
    out["by_origin"] = {name: block(b) for name, b in stats.by_origin}
    return out
