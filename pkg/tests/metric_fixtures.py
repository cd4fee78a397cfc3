"""Ten hand-counted evaluation fixtures shared by the unit and acceptance tests.

Each row is (origin, gold, predicted) with one-letter codes.  The expected
confusion cells and metrics were tallied by hand; metric values are written
as exact fraction expressions so the arithmetic stays auditable.
"""
from scivet.corpus import Label, Origin
from scivet.detection import Architecture, Strategy, Verdict

_LABELS = {"R": Label.RELIABLE, "U": Label.UNRELIABLE}
_ORIGINS = {"H": Origin.HUMAN, "L": Origin.LLM}


def build_case(rows):
    """(verdicts, labels, origins) for a list of (origin, gold, pred) rows."""
    verdicts, labels, origins = [], {}, {}
    for i, (origin, gold, pred) in enumerate(rows):
        article_id = f"n{i:02d}"
        labels[article_id] = _LABELS[gold]
        origins[article_id] = _ORIGINS[origin]
        verdicts.append(Verdict(
            article_id=article_id,
            prediction=_LABELS[pred],
            raw_prediction_word="support" if pred == "R" else "refute",
            reason="fixture",
            architecture=Architecture.D2I,
            strategy=Strategy.ZERO_SHOT,
        ))
    return verdicts, labels, origins


def _sub(tp, fp, tn, fn, acc, precision, recall, f1):
    return {"cm": (tp, fp, tn, fn), "metrics": (acc, precision, recall, f1)}


FIXTURES = [
    ("perfect",
     [("H", "R", "R"), ("H", "U", "U"), ("L", "R", "R"), ("L", "U", "U")],
     {"Human-Written": _sub(1, 0, 1, 0, 1.0, 1.0, 1.0, 1.0),
      "LLM-Generated": _sub(1, 0, 1, 0, 1.0, 1.0, 1.0, 1.0),
      "Overall":       _sub(2, 0, 2, 0, 1.0, 1.0, 1.0, 1.0)}),

    # the degenerate detector: everything predicted Reliable on a balanced set
    ("always_reliable_balanced",
     [("H", "R", "R"), ("H", "R", "R"), ("H", "U", "R"), ("H", "U", "R"),
      ("L", "R", "R"), ("L", "R", "R"), ("L", "U", "R"), ("L", "U", "R")],
     {"Human-Written": _sub(2, 2, 0, 0, 0.5, 0.5, 1.0, 2 / 3),
      "LLM-Generated": _sub(2, 2, 0, 0, 0.5, 0.5, 1.0, 2 / 3),
      "Overall":       _sub(4, 4, 0, 0, 0.5, 0.5, 1.0, 2 / 3)}),

    ("always_unreliable_balanced",
     [("H", "R", "U"), ("H", "R", "U"), ("H", "U", "U"), ("H", "U", "U"),
      ("L", "R", "U"), ("L", "R", "U"), ("L", "U", "U"), ("L", "U", "U")],
     {"Human-Written": _sub(0, 0, 2, 2, 0.5, 0.0, 0.0, 0.0),
      "LLM-Generated": _sub(0, 0, 2, 2, 0.5, 0.0, 0.0, 0.0),
      "Overall":       _sub(0, 0, 4, 4, 0.5, 0.0, 0.0, 0.0)}),

    ("human_rows_only",
     [("H", "R", "R"), ("H", "R", "U"), ("H", "U", "R")],
     {"Human-Written": _sub(1, 1, 0, 1, 1 / 3, 0.5, 0.5, 0.5),
      "LLM-Generated": _sub(0, 0, 0, 0, 0.0, 0.0, 0.0, 0.0),
      "Overall":       _sub(1, 1, 0, 1, 1 / 3, 0.5, 0.5, 0.5)}),

    ("llm_rows_only",
     [("L", "U", "U"), ("L", "U", "R")],
     {"Human-Written": _sub(0, 0, 0, 0, 0.0, 0.0, 0.0, 0.0),
      "LLM-Generated": _sub(0, 1, 1, 0, 0.5, 0.0, 0.0, 0.0),
      "Overall":       _sub(0, 1, 1, 0, 0.5, 0.0, 0.0, 0.0)}),

    # overall recall is the micro value 0.8, not the subset mean 0.75
    ("micro_not_macro",
     [("H", "R", "R"), ("H", "R", "U"),
      ("L", "R", "R"), ("L", "R", "R"), ("L", "R", "R")],
     {"Human-Written": _sub(1, 0, 0, 1, 0.5, 1.0, 0.5, 2 / 3),
      "LLM-Generated": _sub(3, 0, 0, 0, 1.0, 1.0, 1.0, 1.0),
      "Overall":       _sub(4, 0, 0, 1, 0.8, 1.0, 0.8, 8 / 9)}),

    ("mixed_errors",
     [("H", "R", "R"), ("H", "R", "R"), ("H", "R", "U"), ("H", "U", "R"), ("H", "U", "U"),
      ("L", "R", "R"), ("L", "R", "U"), ("L", "R", "U"), ("L", "U", "R"), ("L", "U", "R")],
     {"Human-Written": _sub(2, 1, 1, 1, 0.6, 2 / 3, 2 / 3, 2 / 3),
      "LLM-Generated": _sub(1, 2, 0, 2, 0.2, 1 / 3, 1 / 3, 1 / 3),
      "Overall":       _sub(3, 3, 1, 3, 0.4, 0.5, 0.5, 0.5)}),

    ("single_false_positive",
     [("L", "U", "R")],
     {"Human-Written": _sub(0, 0, 0, 0, 0.0, 0.0, 0.0, 0.0),
      "LLM-Generated": _sub(0, 1, 0, 0, 0.0, 0.0, 0.0, 0.0),
      "Overall":       _sub(0, 1, 0, 0, 0.0, 0.0, 0.0, 0.0)}),

    ("all_positive_gold",
     [("H", "R", "R"), ("H", "R", "R"), ("L", "R", "U")],
     {"Human-Written": _sub(2, 0, 0, 0, 1.0, 1.0, 1.0, 1.0),
      "LLM-Generated": _sub(0, 0, 0, 1, 0.0, 0.0, 0.0, 0.0),
      "Overall":       _sub(2, 0, 0, 1, 2 / 3, 1.0, 2 / 3, 0.8)}),

    ("imbalanced_sets",
     [("H", "R", "R"), ("H", "U", "U"), ("H", "U", "U"), ("H", "U", "U"),
      ("H", "U", "U"), ("H", "U", "R"),
      ("L", "R", "U"), ("L", "U", "U")],
     {"Human-Written": _sub(1, 1, 4, 0, 5 / 6, 0.5, 1.0, 2 / 3),
      "LLM-Generated": _sub(0, 0, 1, 1, 0.5, 0.0, 0.0, 0.0),
      "Overall":       _sub(1, 1, 5, 1, 0.75, 0.5, 0.5, 0.5)}),
]
