"""Misinformation detection pipelines over article/evidence pairs.

Three architectures share one inference step:

* serif -- summarize the article (extractive then abstractive), select
  evidence sentences from each paired abstract, then infer.
* sif   -- summarize the article, infer against the full abstracts.
* d2i   -- hand the raw article and full abstracts straight to inference.

The inference reply must carry a JSON object with ``prediction`` and
``reason`` (plus ``scores`` for the DoV strategy); parsing tolerates
surrounding prose but never guesses at the prediction word.
"""
from __future__ import annotations

import json
import logging
import re
from collections.abc import Mapping, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .corpus import EvidenceAbstract, Label, NewsArticle
from .gateway import ChatRequest, GatewayError, RequestDefaults, complete
from .prompts import fill, load_exemplars, load_template
from .text_metrics import rouge2, split_sentences, tokenize

log = logging.getLogger(__name__)

DEFAULT_M = 5

EXTRACTIVE_MODES = ("llm", "centrality")

# Axis order is fixed; scoring and radar plots rely on it.
DOV_DIMENSIONS = (
    "alignment",
    "causation_confusion",
    "accuracy",
    "generalization",
    "contextual_fidelity",
)

_SUPPORT_WORDS = frozenset({"support"})
_REFUTE_WORDS = frozenset({"refute"})


class DetectionError(Exception):
    """A pipeline stage could not produce its contracted output."""


class VerdictParseError(DetectionError):
    """No usable prediction could be read from an inference reply."""

    def __init__(self, message: str, raw_text: str = "") -> None:
        super().__init__(message)
        self.raw_text = raw_text


class Architecture(str, Enum):
    SERIF = "serif"
    SIF = "sif"
    D2I = "d2i"


class Strategy(str, Enum):
    ZERO_SHOT = "zero"
    FEW_SHOT = "few"
    DOV_COT = "dov-cot"


def _clamp(value: float) -> float:
    return max(-1.0, min(1.0, value))


@dataclass(frozen=True)
class DovScores:
    alignment: float
    causation_confusion: float
    accuracy: float
    generalization: float
    contextual_fidelity: float

    def __post_init__(self) -> None:
        for name in DOV_DIMENSIONS:
            v = getattr(self, name)
            if not -1.0 <= v <= 1.0:
                raise ValueError(f"{name} score {v} outside [-1, 1]")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return tuple(getattr(self, name) for name in DOV_DIMENSIONS)


@dataclass(frozen=True)
class SummaryBundle:
    article_id: str
    extractive: tuple[str, ...]
    abstractive: str
    source_sentence_count: int


@dataclass(frozen=True)
class EvidenceSelection:
    abstract_id: str
    # (index into the abstract's sentence list, sentence text), ascending
    sentences: tuple[tuple[int, str], ...]


@dataclass(frozen=True)
class Verdict:
    article_id: str
    prediction: Label
    raw_prediction_word: str
    reason: str
    architecture: Architecture
    strategy: Strategy
    scores: DovScores | None = None
    incomplete_scores: bool = False


@dataclass(frozen=True)
class DetectorSettings:
    defaults: RequestDefaults = RequestDefaults()
    m: int = DEFAULT_M
    extractive_mode: str = "llm"
    templates_dir: str | Path | None = None
    exemplars: tuple[dict, dict] | None = None
    retries: int = 3
    backoff_base: float = 1.0

    def __post_init__(self) -> None:
        if self.m < 1:
            raise ValueError(f"m must be at least 1, got {self.m}")
        if self.extractive_mode not in EXTRACTIVE_MODES:
            raise ValueError(f"unknown extractive mode {self.extractive_mode!r}; "
                             f"expected one of {EXTRACTIVE_MODES}")


class _TapBackend:
    """Pass-through wrapper that remembers every exchange for the audit trail."""

    def __init__(self, inner) -> None:
        self.inner = inner
        self.calls: list[dict] = []
        self.backend_id = getattr(inner, "backend_id", inner.__class__.__name__)

    def send(self, request: ChatRequest) -> str:
        text = self.inner.send(request)
        self.calls.append({
            "system": request.system_message,
            "user": request.user_message,
            "response": text,
        })
        return text


def _complete(backend, request: ChatRequest, settings: DetectorSettings):
    return complete(backend, request, retries=settings.retries,
                    backoff_base=settings.backoff_base)


def centrality_pick(sentences: Sequence[str], m: int) -> list[int]:
    """Indices of the m sentences with the highest mean token frequency.

    Frequencies are counted over the whole document and normalized by both
    sentence length and total token mass, so verbose sentences get no free
    boost.  Ties go to the earlier sentence.
    """
    token_lists = [tokenize(s) for s in sentences]
    freq: dict[str, int] = {}
    for tokens in token_lists:
        for token in tokens:
            freq[token] = freq.get(token, 0) + 1
    total = sum(freq.values())
    scored = []
    for idx, tokens in enumerate(token_lists):
        if tokens and total:
            score = sum(freq[t] for t in tokens) / (len(tokens) * total)
        else:
            score = 0.0
        scored.append((-score, idx))
    scored.sort()
    return sorted(idx for _, idx in scored[:m])


def _match_extracted(text: str, sentences: Sequence[str]) -> list[int]:
    """Map LLM-returned lines back to source sentence indices, in reply order."""
    body = " ".join(sentences)
    picked: list[int] = []

    def add(idx: int) -> None:
        if idx not in picked:
            picked.append(idx)

    for line in text.splitlines():
        line = re.sub(r"^\s*(?:[-*•]|\d+[.)])\s*", "", line).strip()
        if not line:
            continue
        if line in sentences:
            add(sentences.index(line))
            continue
        if line in body:
            for idx, sentence in enumerate(sentences):
                if line in sentence:
                    add(idx)
                    break
            continue
        best_idx, best_f1 = -1, 0.0
        for idx, sentence in enumerate(sentences):
            f1 = rouge2(line, sentence).f1
            if f1 > best_f1:
                best_idx, best_f1 = idx, f1
        if best_idx >= 0:
            add(best_idx)
        else:
            log.warning("dropping extracted line with no source overlap: %.60s", line)
    return picked


def extractive_summary(
    article: NewsArticle,
    m: int = DEFAULT_M,
    backend=None,
    settings: DetectorSettings | None = None,
) -> list[str]:
    """The m most salient article sentences, verbatim and in source order.

    With a backend, an LLM picks the sentences and each returned line is
    matched back to a source sentence (exactly, by substring, or by nearest
    bigram overlap).  Without one, or if nothing matches, a deterministic
    term-frequency centrality ranking decides.
    """
    settings = settings or DetectorSettings()
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    sentences = split_sentences(article.body)
    if not sentences:
        raise DetectionError(f"article {article.id!r} has no sentences")
    if m >= len(sentences):
        return list(sentences)
    if backend is None:
        return [sentences[i] for i in centrality_pick(sentences, m)]
    system, user = load_template("summary_extractive", settings.templates_dir)
    request = settings.defaults.build(system, fill(user, m=str(m), article=article.body))
    response = _complete(backend, request, settings)
    picked = _match_extracted(response.text, sentences)
    if not picked:
        log.warning("extractive reply for %s matched nothing; using centrality", article.id)
        picked = centrality_pick(sentences, m)
    return [sentences[i] for i in sorted(picked[:m])]


_BREVITY_SUFFIX = (
    "Your summary must be strictly shorter than the sentences above. "
    "Rewrite it using at most half as many words."
)


def abstractive_summary(
    extractive: Sequence[str],
    backend,
    settings: DetectorSettings | None = None,
) -> str:
    """Condense extractive sentences into one paragraph shorter than its input.

    A too-long reply triggers a single retry with an explicit brevity
    instruction; if the retry is still too long it is accepted with a warning.
    """
    settings = settings or DetectorSettings()
    if not extractive:
        raise ValueError("extractive summary must not be empty")
    joined = " ".join(extractive)
    input_len = len(tokenize(joined))
    system, user = load_template("summary_abstractive", settings.templates_dir)
    filled = fill(user, sentences=joined)
    response = _complete(backend, settings.defaults.build(system, filled), settings)
    text = response.text.strip()
    if text and len(tokenize(text)) < input_len:
        return text
    retry = _complete(
        backend,
        settings.defaults.build(system, filled + "\n\n" + _BREVITY_SUFFIX),
        settings,
    )
    retry_text = retry.text.strip()
    if retry_text and len(tokenize(retry_text)) < input_len:
        return retry_text
    final = retry_text or text
    if not final:
        raise DetectionError("abstractive summarizer returned empty text twice")
    log.warning("abstractive summary is not shorter than its input; accepting anyway")
    return final


def _first_json_array(text: str) -> list | None:
    pos = 0
    while True:
        start = text.find("[", pos)
        if start < 0:
            return None
        end = _balanced_end(text, start, "[", "]")
        if end is None:
            pos = start + 1
            continue
        try:
            value = json.loads(text[start:end + 1])
        except json.JSONDecodeError:
            pos = start + 1
            continue
        if isinstance(value, list):
            return value
        pos = start + 1


def _balanced_end(text: str, start: int, open_ch: str, close_ch: str) -> int | None:
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == open_ch:
            depth += 1
        elif ch == close_ch:
            depth -= 1
            if depth == 0:
                return i
    return None


def select_evidence_sentences(
    summary: str,
    abstract: EvidenceAbstract,
    backend,
    settings: DetectorSettings | None = None,
) -> EvidenceSelection:
    """Ask the LLM which abstract sentences bear on the summary, by index.

    Out-of-range indices are discarded with a warning; an unparseable or
    empty reply yields an empty selection rather than an error.
    """
    settings = settings or DetectorSettings()
    sentences = split_sentences(abstract.abstract)
    numbered = "\n".join(f"{i}. {s}" for i, s in enumerate(sentences))
    system, user = load_template("evidence_select", settings.templates_dir)
    request = settings.defaults.build(
        system, fill(user, summary=summary, sentences=numbered))
    response = _complete(backend, request, settings)
    raw = _first_json_array(response.text)
    if raw is None:
        # fall back to bare integers scattered through the reply
        raw = [int(tok) for tok in re.findall(r"\b\d+\b", response.text)]
    indices = []
    for item in raw:
        try:
            idx = int(item)
        except (TypeError, ValueError):
            continue
        if 0 <= idx < len(sentences):
            if idx not in indices:
                indices.append(idx)
        else:
            log.warning("selector returned out-of-range index %s for %s", item, abstract.id)
    indices.sort()
    return EvidenceSelection(abstract.id, tuple((i, sentences[i]) for i in indices))


def format_exemplar(exemplar: Mapping) -> str:
    return (f"{exemplar['text']}\nLabel: {exemplar['label']}\n"
            f"Reason: {exemplar['reason']}")


def build_inference_prompt(
    strategy: Strategy,
    news_text: str,
    evidence_texts: Sequence[str],
    settings: DetectorSettings | None = None,
) -> ChatRequest:
    """Assemble the fact-checking request for one article and its evidence."""
    settings = settings or DetectorSettings()
    if not news_text.strip():
        raise ValueError("news text must not be empty")
    if not evidence_texts or not any(t.strip() for t in evidence_texts):
        raise ValueError("at least one non-empty evidence text is required")
    evidence_block = "\n\n".join(
        f"Evidence {i + 1}:\n{text}" for i, text in enumerate(evidence_texts))
    if strategy is Strategy.ZERO_SHOT:
        system, user = load_template("inference_zero_shot", settings.templates_dir)
        filled = fill(user, news=news_text, evidence=evidence_block)
    elif strategy is Strategy.FEW_SHOT:
        system, user = load_template("inference_few_shot", settings.templates_dir)
        exemplars = settings.exemplars or tuple(load_exemplars(settings.templates_dir))
        reliable, unreliable = exemplars
        filled = fill(
            user,
            exemplar_reliable=format_exemplar(reliable),
            exemplar_unreliable=format_exemplar(unreliable),
            news=news_text,
            evidence=evidence_block,
        )
    elif strategy is Strategy.DOV_COT:
        system, user = load_template("inference_dov_cot", settings.templates_dir)
        filled = fill(user, news=news_text, evidence=evidence_block)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    return settings.defaults.build(system, filled)


def _first_json_object(text: str) -> dict:
    pos = 0
    while True:
        start = text.find("{", pos)
        if start < 0:
            raise VerdictParseError("no JSON object found in reply", text)
        end = _balanced_end(text, start, "{", "}")
        if end is None:
            pos = start + 1
            continue
        try:
            value = json.loads(text[start:end + 1], strict=False)
        except json.JSONDecodeError:
            pos = start + 1
            continue
        if isinstance(value, dict):
            return value
        pos = start + 1


_SCORE_KEY_ALIASES = {
    "alignment": "alignment",
    "alignment check": "alignment",
    "causation confusion": "causation_confusion",
    "causation": "causation_confusion",
    "accuracy": "accuracy",
    "accuracy check": "accuracy",
    "generalization": "generalization",
    "generalisation": "generalization",
    "contextual fidelity": "contextual_fidelity",
    "context": "contextual_fidelity",
}


def _coerce_score(value) -> float | None:
    try:
        return _clamp(float(value))
    except (TypeError, ValueError):
        return None


def _parse_scores(raw) -> tuple[DovScores | None, bool]:
    """Returns (scores, incomplete).  Missing axes are zero-filled and flagged."""
    values: dict[str, float] = {}
    if isinstance(raw, Mapping):
        for key, value in raw.items():
            norm = re.sub(r"[_\-]", " ", str(key)).strip().lower()
            canon = _SCORE_KEY_ALIASES.get(norm)
            if canon is None:
                continue
            coerced = _coerce_score(value)
            if coerced is not None:
                values[canon] = coerced
    elif isinstance(raw, Sequence) and not isinstance(raw, str):
        for name, value in zip(DOV_DIMENSIONS, raw):
            coerced = _coerce_score(value)
            if coerced is not None:
                values[name] = coerced
    if not values:
        return None, True
    incomplete = len(values) < len(DOV_DIMENSIONS)
    filled = {name: values.get(name, 0.0) for name in DOV_DIMENSIONS}
    return DovScores(**filled), incomplete


@dataclass(frozen=True)
class VerdictFields:
    prediction: Label
    raw_prediction_word: str
    reason: str
    scores: DovScores | None
    incomplete_scores: bool


def label_for_prediction(word: str) -> Label:
    # evidence supporting the article means the article is reliable
    return Label.RELIABLE if word in _SUPPORT_WORDS else Label.UNRELIABLE


def parse_verdict(raw_text: str, expect_scores: bool = False) -> VerdictFields:
    """Extract prediction/reason(/scores) from an inference reply.

    The first balanced JSON object wins; prose around it is ignored.  The
    prediction must normalize to exactly 'support' or 'refute'.  Score values
    are clamped to [-1, 1]; axes the model skipped are zero-filled and the
    verdict is flagged incomplete.
    """
    obj = _first_json_object(raw_text)
    raw_word = obj.get("prediction")
    if raw_word is None:
        raise VerdictParseError("reply JSON has no 'prediction' key", raw_text)
    word = str(raw_word).strip().strip(".!\"'`").lower()
    if word not in _SUPPORT_WORDS | _REFUTE_WORDS:
        raise VerdictParseError(
            f"prediction {raw_word!r} is neither 'support' nor 'refute'", raw_text)
    reason = str(obj.get("reason") or "").strip() or "(no reason given)"
    scores: DovScores | None = None
    incomplete = False
    if "scores" in obj:
        scores, incomplete = _parse_scores(obj["scores"])
    elif expect_scores:
        incomplete = True
    return VerdictFields(
        prediction=label_for_prediction(word),
        raw_prediction_word=word,
        reason=reason,
        scores=scores,
        incomplete_scores=incomplete,
    )


_NO_SELECTION_TEXT = "(no relevant sentences were selected from this abstract)"


@dataclass
class DetectionOutcome:
    verdict: Verdict
    audit: dict


def detect(
    article: NewsArticle,
    evidence: Sequence[EvidenceAbstract],
    architecture: Architecture,
    strategy: Strategy,
    backend,
    settings: DetectorSettings | None = None,
) -> DetectionOutcome:
    """Run one article through the chosen pipeline and parse the verdict.

    The audit dict records every prompt and reply in call order plus the
    intermediate summary and evidence selections, enough to replay the
    decision offline.
    """
    settings = settings or DetectorSettings()
    if not evidence:
        raise ValueError(f"article {article.id!r} has no paired evidence")
    tap = _TapBackend(backend)
    audit: dict = {
        "article_id": article.id,
        "architecture": architecture.value,
        "strategy": strategy.value,
    }

    if architecture in (Architecture.SERIF, Architecture.SIF):
        extract_backend = tap if settings.extractive_mode == "llm" else None
        extractive = extractive_summary(article, settings.m, extract_backend, settings)
        abstractive = abstractive_summary(extractive, tap, settings)
        bundle = SummaryBundle(
            article_id=article.id,
            extractive=tuple(extractive),
            abstractive=abstractive,
            source_sentence_count=len(split_sentences(article.body)),
        )
        news_text = abstractive
        audit["summary"] = {
            "extractive": list(bundle.extractive),
            "abstractive": bundle.abstractive,
        }
    else:
        news_text = (article.title + "\n" + article.body).strip()

    if architecture is Architecture.SERIF:
        selections = [
            select_evidence_sentences(news_text, abstract, tap, settings)
            for abstract in evidence
        ]
        evidence_texts = [
            " ".join(s for _, s in sel.sentences) if sel.sentences else _NO_SELECTION_TEXT
            for sel in selections
        ]
        audit["selections"] = [
            {"abstract_id": sel.abstract_id,
             "sentences": [[i, s] for i, s in sel.sentences]}
            for sel in selections
        ]
    else:
        evidence_texts = [abstract.abstract for abstract in evidence]

    request = build_inference_prompt(strategy, news_text, evidence_texts, settings)
    response = _complete(tap, request, settings)
    fields = parse_verdict(response.text, expect_scores=strategy is Strategy.DOV_COT)
    verdict = Verdict(
        article_id=article.id,
        prediction=fields.prediction,
        raw_prediction_word=fields.raw_prediction_word,
        reason=fields.reason,
        architecture=architecture,
        strategy=strategy,
        scores=fields.scores,
        incomplete_scores=fields.incomplete_scores,
    )
    audit["calls"] = tap.calls
    return DetectionOutcome(verdict, audit)


@dataclass(frozen=True)
class DetectionFailure:
    article_id: str
    error: str


def detect_batch(
    articles: Sequence[NewsArticle],
    pairings: Mapping[str, Sequence[str]],
    abstracts: Mapping[str, EvidenceAbstract],
    architecture: Architecture,
    strategy: Strategy,
    backend,
    settings: DetectorSettings | None = None,
    parallelism: int = 1,
) -> tuple[list[DetectionOutcome], list[DetectionFailure]]:
    """Detect over many articles; failures are recorded, never fatal.

    ``pairings`` maps article id to its evidence abstract ids, strongest
    first.  Outcomes keep the input article order.
    """
    if parallelism < 1:
        raise ValueError(f"parallelism must be at least 1, got {parallelism}")
    settings = settings or DetectorSettings()

    def one(article: NewsArticle):
        abstract_ids = pairings.get(article.id)
        if not abstract_ids:
            return DetectionFailure(article.id, "no evidence pairing")
        try:
            chosen = [abstracts[i] for i in abstract_ids]
        except KeyError as exc:
            return DetectionFailure(article.id, f"pairing names unknown abstract {exc.args[0]!r}")
        try:
            return detect(article, chosen, architecture, strategy, backend, settings)
        except (GatewayError, DetectionError, ValueError) as exc:
            return DetectionFailure(article.id, str(exc))

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        results = list(pool.map(one, articles))
    outcomes = [r for r in results if isinstance(r, DetectionOutcome)]
    failures = [r for r in results if isinstance(r, DetectionFailure)]
    return outcomes, failures


def verdict_to_dict(verdict: Verdict) -> dict:
    out: dict = {
        "article_id": verdict.article_id,
        "prediction": verdict.prediction.value,
        "raw_prediction_word": verdict.raw_prediction_word,
        "reason": verdict.reason,
        "architecture": verdict.architecture.value,
        "strategy": verdict.strategy.value,
    }
    if verdict.scores is not None:
        out["scores"] = {name: getattr(verdict.scores, name) for name in DOV_DIMENSIONS}
    if verdict.incomplete_scores:
        out["incomplete_scores"] = True
    return out


def verdict_from_dict(raw: Mapping) -> Verdict:
    scores = None
    if "scores" in raw and raw["scores"] is not None:
        scores = DovScores(**{name: float(raw["scores"][name]) for name in DOV_DIMENSIONS})
    return Verdict(
        article_id=str(raw["article_id"]),
        prediction=Label(raw["prediction"]),
        raw_prediction_word=str(raw.get("raw_prediction_word", "")),
        reason=str(raw.get("reason", "")),
        architecture=Architecture(raw["architecture"]),
        strategy=Strategy(raw["strategy"]),
        scores=scores,
        incomplete_scores=bool(raw.get("incomplete_scores", False)),
    )
