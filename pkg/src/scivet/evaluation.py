"""Verdict scoring: confusion counts, the standard metric set, origin breakdown.

Reliable is the positive class throughout.  Zero-denominator metrics are
reported as 0.0 so degenerate subsets stay comparable, and the Overall row
is computed from the summed confusion cells rather than by averaging the
per-origin rows.
"""
from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

from .corpus import DatasetError, Label, NewsArticle, Origin
from .detection import Verdict

POSITIVE_CLASS = Label.RELIABLE

SUBSET_NAMES = ("Human-Written", "LLM-Generated", "Overall")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    tn: int = 0
    fn: int = 0

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            tp=self.tp + other.tp,
            fp=self.fp + other.fp,
            tn=self.tn + other.tn,
            fn=self.fn + other.fn,
        )


@dataclass(frozen=True)
class SubsetMetrics:
    accuracy: float
    precision: float
    recall: float
    f1: float
    confusion: ConfusionMatrix


@dataclass(frozen=True)
class MetricsTable:
    human: SubsetMetrics
    llm: SubsetMetrics
    overall: SubsetMetrics


def confusion(
    verdicts: Sequence[Verdict],
    labels: Mapping[str, Label],
) -> ConfusionMatrix:
    """Count confusion cells against gold labels, Reliable positive."""
    tp = fp = tn = fn = 0
    for verdict in verdicts:
        if verdict.article_id not in labels:
            raise DatasetError(f"verdict for unknown article {verdict.article_id!r}")
        gold = labels[verdict.article_id]
        predicted_positive = verdict.prediction is POSITIVE_CLASS
        actually_positive = gold is POSITIVE_CLASS
        if predicted_positive and actually_positive:
            tp += 1
        elif predicted_positive:
            fp += 1
        elif actually_positive:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn)


def metrics_from_confusion(cm: ConfusionMatrix) -> SubsetMetrics:
    accuracy = (cm.tp + cm.tn) / cm.total if cm.total else 0.0
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return SubsetMetrics(accuracy=accuracy, precision=precision,
                         recall=recall, f1=f1, confusion=cm)


def breakdown(
    verdicts: Sequence[Verdict],
    labels: Mapping[str, Label],
    origins: Mapping[str, Origin],
) -> MetricsTable:
    """Metrics for human-written and LLM-generated subsets plus their union."""
    human_verdicts = []
    llm_verdicts = []
    for verdict in verdicts:
        if verdict.article_id not in origins:
            raise DatasetError(f"no origin recorded for article {verdict.article_id!r}")
        bucket = human_verdicts if origins[verdict.article_id] is Origin.HUMAN else llm_verdicts
        bucket.append(verdict)
    human_cm = confusion(human_verdicts, labels)
    llm_cm = confusion(llm_verdicts, labels)
    return MetricsTable(
        human=metrics_from_confusion(human_cm),
        llm=metrics_from_confusion(llm_cm),
        overall=metrics_from_confusion(human_cm + llm_cm),
    )


def labels_and_origins(
    articles: Sequence[NewsArticle],
) -> tuple[dict[str, Label], dict[str, Origin]]:
    """Gold label and origin maps for every fully annotated article."""
    labels: dict[str, Label] = {}
    origins: dict[str, Origin] = {}
    for article in articles:
        if article.label is None:
            raise DatasetError(f"article {article.id!r} has no gold label")
        if article.origin is None:
            raise DatasetError(f"article {article.id!r} has no origin")
        labels[article.id] = article.label
        origins[article.id] = article.origin
    return labels, origins


def _rows(table: MetricsTable):
    return zip(SUBSET_NAMES, (table.human, table.llm, table.overall))


def table_to_csv(table: MetricsTable) -> str:
    lines = ["subset,accuracy,precision,recall,f1,tp,fp,tn,fn,total"]
    for name, sub in _rows(table):
        cm = sub.confusion
        lines.append(
            f"{name},{sub.accuracy:.6f},{sub.precision:.6f},{sub.recall:.6f},"
            f"{sub.f1:.6f},{cm.tp},{cm.fp},{cm.tn},{cm.fn},{cm.total}")
    return "\n".join(lines) + "\n"


def table_to_dict(table: MetricsTable) -> dict:
    out = {}
    for name, sub in _rows(table):
        cm = sub.confusion
        out[name] = {
            "accuracy": sub.accuracy,
            "precision": sub.precision,
            "recall": sub.recall,
            "f1": sub.f1,
            "confusion": {"tp": cm.tp, "fp": cm.fp, "tn": cm.tn, "fn": cm.fn},
        }
    return out


def table_to_json(table: MetricsTable) -> str:
    return json.dumps(table_to_dict(table), indent=2, sort_keys=True) + "\n"
