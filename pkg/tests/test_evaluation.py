"""Confusion counting, metric arithmetic, origin breakdown, and table output."""
from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import make_article
from metric_fixtures import FIXTURES, build_case
from scivet.corpus import DatasetError, Label, Origin
from scivet.evaluation import (
    SUBSET_NAMES,
    ConfusionMatrix,
    breakdown,
    confusion,
    labels_and_origins,
    metrics_from_confusion,
    table_to_csv,
    table_to_dict,
    table_to_json,
)

TOL = 1e-12


def assert_subset(sub, expected):
    tp, fp, tn, fn = expected["cm"]
    assert (sub.confusion.tp, sub.confusion.fp, sub.confusion.tn, sub.confusion.fn) == \
        (tp, fp, tn, fn)
    acc, precision, recall, f1 = expected["metrics"]
    assert sub.accuracy == pytest.approx(acc, abs=TOL)
    assert sub.precision == pytest.approx(precision, abs=TOL)
    assert sub.recall == pytest.approx(recall, abs=TOL)
    assert sub.f1 == pytest.approx(f1, abs=TOL)


@pytest.mark.parametrize("name, rows, expected", FIXTURES, ids=[f[0] for f in FIXTURES])
def test_breakdown_matches_hand_counts(name, rows, expected):
    verdicts, labels, origins = build_case(rows)
    table = breakdown(verdicts, labels, origins)
    assert_subset(table.human, expected["Human-Written"])
    assert_subset(table.llm, expected["LLM-Generated"])
    assert_subset(table.overall, expected["Overall"])


def test_fixture_count_is_ten():
    assert len(FIXTURES) == 10


def test_confusion_rejects_unknown_article():
    verdicts, labels, _ = build_case([("H", "R", "R")])
    del labels["n00"]
    with pytest.raises(DatasetError, match="unknown article 'n00'"):
        confusion(verdicts, labels)


def test_breakdown_rejects_missing_origin():
    verdicts, labels, origins = build_case([("H", "R", "R")])
    del origins["n00"]
    with pytest.raises(DatasetError, match="no origin"):
        breakdown(verdicts, labels, origins)


def test_metrics_zero_denominators():
    empty = metrics_from_confusion(ConfusionMatrix())
    assert (empty.accuracy, empty.precision, empty.recall, empty.f1) == \
        (0.0, 0.0, 0.0, 0.0)
    # predictions exist but no positive ones: precision denominator is zero
    no_positive_preds = metrics_from_confusion(ConfusionMatrix(tn=3, fn=2))
    assert no_positive_preds.precision == 0.0
    assert no_positive_preds.recall == 0.0
    assert no_positive_preds.f1 == 0.0
    assert no_positive_preds.accuracy == pytest.approx(0.6, abs=TOL)
    # no positive gold rows: recall denominator is zero
    no_positive_gold = metrics_from_confusion(ConfusionMatrix(fp=1, tn=1))
    assert no_positive_gold.recall == 0.0


def test_confusion_matrix_addition_and_total():
    a = ConfusionMatrix(tp=1, fp=2, tn=3, fn=4)
    b = ConfusionMatrix(tp=10, fp=20, tn=30, fn=40)
    merged = a + b
    assert merged == ConfusionMatrix(tp=11, fp=22, tn=33, fn=44)
    assert merged.total == 110
    assert a.total == 10


def test_overall_equals_summed_cells_not_metric_average():
    name, rows, expected = FIXTURES[5]
    assert name == "micro_not_macro"
    verdicts, labels, origins = build_case(rows)
    table = breakdown(verdicts, labels, origins)
    macro_recall = (table.human.recall + table.llm.recall) / 2
    assert table.overall.recall == pytest.approx(0.8, abs=TOL)
    assert macro_recall == pytest.approx(0.75, abs=TOL)
    assert table.overall.recall != macro_recall


ROWS = st.lists(
    st.tuples(st.sampled_from("HL"), st.sampled_from("RU"), st.sampled_from("RU")),
    min_size=1, max_size=30)


@given(rows=ROWS, seed=st.randoms(use_true_random=False))
def test_breakdown_is_permutation_invariant(rows, seed):
    verdicts, labels, origins = build_case(rows)
    table = breakdown(verdicts, labels, origins)
    shuffled = list(verdicts)
    seed.shuffle(shuffled)
    assert breakdown(shuffled, labels, origins) == table


@given(rows=ROWS)
def test_confusion_cells_always_sum_to_row_count(rows):
    verdicts, labels, origins = build_case(rows)
    table = breakdown(verdicts, labels, origins)
    assert table.overall.confusion.total == len(rows)
    assert table.human.confusion.total + table.llm.confusion.total == len(rows)


def test_labels_and_origins_maps():
    articles = [
        make_article("a1", label=Label.RELIABLE, origin=Origin.HUMAN),
        make_article("a2", label=Label.UNRELIABLE, origin=Origin.LLM),
    ]
    labels, origins = labels_and_origins(articles)
    assert labels == {"a1": Label.RELIABLE, "a2": Label.UNRELIABLE}
    assert origins == {"a1": Origin.HUMAN, "a2": Origin.LLM}


def test_labels_and_origins_require_annotations():
    with pytest.raises(DatasetError, match="no gold label"):
        labels_and_origins([make_article("a1", origin=Origin.HUMAN)])
    with pytest.raises(DatasetError, match="no origin"):
        labels_and_origins([make_article("a1", label=Label.RELIABLE)])


DEGENERATE_CSV = (
    "subset,accuracy,precision,recall,f1,tp,fp,tn,fn,total\n"
    "Human-Written,0.500000,0.500000,1.000000,0.666667,2,2,0,0,4\n"
    "LLM-Generated,0.500000,0.500000,1.000000,0.666667,2,2,0,0,4\n"
    "Overall,0.500000,0.500000,1.000000,0.666667,4,4,0,0,8\n"
)


def test_csv_golden_bytes_for_degenerate_fixture():
    _, rows, _ = FIXTURES[1]
    verdicts, labels, origins = build_case(rows)
    assert table_to_csv(breakdown(verdicts, labels, origins)) == DEGENERATE_CSV


def test_json_output_shape():
    _, rows, _ = FIXTURES[0]
    verdicts, labels, origins = build_case(rows)
    table = breakdown(verdicts, labels, origins)
    payload = json.loads(table_to_json(table))
    assert set(payload) == set(SUBSET_NAMES)
    for subset in payload.values():
        assert set(subset) == {"accuracy", "precision", "recall", "f1", "confusion"}
        assert set(subset["confusion"]) == {"tp", "fp", "tn", "fn"}
    assert table_to_json(table).endswith("\n")
    assert table_to_dict(table)["Overall"]["accuracy"] == 1.0
