"""Paired true/false article generation from abstracts, with quality gating.

One completion per abstract yields a 'True' and a 'Convincing False'
newspaper-style article.  The true article must clear a bigram-overlap gate
against its source abstract before the pair enters the corpus; rejected and
unparseable outputs are kept aside rather than silently dropped.
"""
from __future__ import annotations

import logging
import re
from collections.abc import Collection, Sequence
from dataclasses import dataclass
from pathlib import Path

from .corpus import EvidenceAbstract, Label, NewsArticle, Origin
from .gateway import ChatRequest, GatewayError, RequestDefaults, run_batch
from .prompts import fill, load_template
from .text_metrics import ROUGE_VARIANTS, Rouge2Score, rouge2

log = logging.getLogger(__name__)

DEFAULT_GATE_THRESHOLD = 0.4

TRUE_SUFFIX = "-true"
FALSE_SUFFIX = "-false"


class PairParseError(Exception):
    """The response lacks a recognizable True / Convincing False split."""

    def __init__(self, message: str, raw_text: str = "") -> None:
        super().__init__(message)
        self.raw_text = raw_text


# Header lines are matched after stripping markdown decoration, so
# "**True:**", "### Version 1 (True)" and "2. Convincing False Article"
# all count, while ordinary prose lines do not.
_DECOR_RE = re.compile(r"[#*_>`'\"“”‘’:.\-–—=()\[\]{}]")
_HEAD_SUFFIX = r"(?:\s+(?:article|version|news\s+article|story))?"
_TRUE_HEAD_RE = re.compile(
    r"^(?:version\s+\d+\s*|article\s+\d+\s*|\d+\s+)?(?:the\s+)?true" + _HEAD_SUFFIX + r"$")
_FALSE_HEAD_RE = re.compile(
    r"^(?:version\s+\d+\s*|article\s+\d+\s*|\d+\s+)?(?:the\s+)?(?:convincing\s+)?false"
    + _HEAD_SUFFIX + r"$")


def _normalize_header(line: str) -> str:
    return " ".join(_DECOR_RE.sub(" ", line.lower()).split())


def _classify_header(line: str) -> tuple[str | None, str]:
    """Return ("true"|"false"|None, inline content after the header)."""
    normalized = _normalize_header(line)
    if _TRUE_HEAD_RE.fullmatch(normalized):
        return "true", ""
    if _FALSE_HEAD_RE.fullmatch(normalized):
        return "false", ""
    head, sep, rest = line.partition(":")
    if sep:
        inline = rest.strip().lstrip("*_`").strip()
        normalized_head = _normalize_header(head)
        if _TRUE_HEAD_RE.fullmatch(normalized_head):
            return "true", inline
        if _FALSE_HEAD_RE.fullmatch(normalized_head):
            return "false", inline
    return None, ""


def parse_generated_pair(response_text: str) -> tuple[str, str]:
    """Split a generation response into (true_article, false_article).

    Only clearly labeled section headers trigger a split; anything
    ambiguous raises PairParseError instead of mis-splitting.
    """
    lines = response_text.splitlines()
    markers: dict[str, tuple[int, str]] = {}
    for idx, line in enumerate(lines):
        kind, inline = _classify_header(line)
        if kind and kind not in markers:
            markers[kind] = (idx, inline)
    if "true" not in markers:
        raise PairParseError("no 'True' section header found", response_text)
    if "false" not in markers:
        raise PairParseError("no 'Convincing False' section header found", response_text)

    def section(kind: str, other: str) -> str:
        idx, inline = markers[kind]
        other_idx = markers[other][0]
        end = other_idx if other_idx > idx else len(lines)
        body = "\n".join(lines[idx + 1:end]).strip()
        if inline:
            body = (inline + "\n" + body).strip()
        return body

    true_text = section("true", "false")
    false_text = section("false", "true")
    if not true_text:
        raise PairParseError("'True' section is empty", response_text)
    if not false_text:
        raise PairParseError("'Convincing False' section is empty", response_text)
    return true_text, false_text


def build_generation_request(
    abstract: EvidenceAbstract,
    defaults: RequestDefaults,
    templates_dir: str | Path | None = None,
) -> ChatRequest:
    """Journalist/course-framing request with the abstract at its placeholder."""
    system, user = load_template("generate_pair", templates_dir)
    return defaults.build(system, fill(user, abstract=abstract.abstract))


@dataclass(frozen=True)
class GeneratedPair:
    source_abstract_id: str
    true_article: str
    false_article: str
    generator: str
    gate_score: Rouge2Score


@dataclass(frozen=True)
class GenerationFailure:
    abstract_id: str
    error: str
    raw_text: str = ""


@dataclass
class GenerationResult:
    articles: list[NewsArticle]
    rejected: list[GeneratedPair]
    failures: list[GenerationFailure]


def pair_to_articles(pair: GeneratedPair) -> tuple[NewsArticle, NewsArticle]:
    common = {"origin": Origin.LLM, "source": pair.generator, "generator": pair.generator}
    true_article = NewsArticle(
        id=pair.source_abstract_id + TRUE_SUFFIX,
        title="", body=pair.true_article, label=Label.RELIABLE, **common)
    false_article = NewsArticle(
        id=pair.source_abstract_id + FALSE_SUFFIX,
        title="", body=pair.false_article, label=Label.UNRELIABLE, **common)
    return true_article, false_article


def generate_pairs(
    abstracts: Sequence[EvidenceAbstract],
    backend,
    defaults: RequestDefaults,
    gate_threshold: float = DEFAULT_GATE_THRESHOLD,
    rouge_variant: str = "f1",
    parallelism: int = 4,
    skip_ids: Collection[str] = (),
    templates_dir: str | Path | None = None,
    **batch_kwargs,
) -> GenerationResult:
    """Generate one labeled article pair per abstract and gate the true halves.

    Abstracts whose ids appear in ``skip_ids`` are not re-queried, so an
    interrupted run can resume without duplicate work.  Pairs passing the
    gate become one Reliable and one Unreliable article; the rest land in
    ``rejected`` (gate failures) or ``failures`` (backend or parse trouble).
    """
    if not 0.0 <= gate_threshold <= 1.0:
        raise ValueError(f"gate threshold must lie in [0, 1], got {gate_threshold}")
    if rouge_variant not in ROUGE_VARIANTS:
        raise ValueError(f"unknown ROUGE variant {rouge_variant!r}")
    todo = [a for a in abstracts if a.id not in set(skip_ids)]
    requests = [build_generation_request(a, defaults, templates_dir) for a in todo]
    responses = run_batch(backend, requests, parallelism=parallelism, **batch_kwargs)

    result = GenerationResult(articles=[], rejected=[], failures=[])
    for abstract, response in zip(todo, responses):
        if isinstance(response, GatewayError):
            result.failures.append(GenerationFailure(abstract.id, str(response)))
            continue
        try:
            true_text, false_text = parse_generated_pair(response.text)
        except PairParseError as exc:
            result.failures.append(GenerationFailure(abstract.id, str(exc), exc.raw_text))
            continue
        score = rouge2(true_text, abstract.abstract)
        pair = GeneratedPair(abstract.id, true_text, false_text,
                             defaults.model_name, score)
        if score.value(rouge_variant) > gate_threshold:
            result.articles.extend(pair_to_articles(pair))
        else:
            result.rejected.append(pair)
    log.info("generated %d articles, rejected %d pairs, %d failures",
             len(result.articles), len(result.rejected), len(result.failures))
    return result
