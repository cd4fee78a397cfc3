"""40 inference replies of varying malformedness for the verdict parser.

Each case: (case_id, raw_text, expect_scores, expected) where expected is
a dict with keys word, label, scores (5-tuple or None), incomplete -- or
None for the replies designed to be legitimate parse failures.
38 of 40 must parse; the parser must never crash with anything other than
VerdictParseError.
"""

OK = {"word": "support", "label": "Reliable", "scores": None, "incomplete": False}
NO = {"word": "refute", "label": "Unreliable", "scores": None, "incomplete": False}


def _exp(base, **overrides):
    out = dict(base)
    out.update(overrides)
    return out


FULL_SCORES = (1.0, -0.5, 0.25, 0.0, 1.0)

CASES = [
    ("clean_support",
     '{"prediction": "support", "reason": "the evidence matches the claim"}',
     False, OK),
    ("clean_refute",
     '{"prediction": "refute", "reason": "numbers disagree"}',
     False, NO),
    ("capitalized_word",
     '{"prediction": "Support", "reason": "ok"}',
     False, OK),
    ("uppercase_word",
     '{"prediction": "REFUTE", "reason": "ok"}',
     False, NO),
    ("trailing_period_word",
     '{"prediction": "support.", "reason": "ok"}',
     False, OK),
    ("quoted_word",
     '{"prediction": "\'refute\'", "reason": "ok"}',
     False, NO),
    ("backtick_word",
     '{"prediction": "`support`", "reason": "ok"}',
     False, OK),
    ("padded_word",
     '{"prediction": "  support  ", "reason": "ok"}',
     False, OK),
    ("prose_before",
     'After weighing the evidence carefully, here is my verdict.\n'
     '{"prediction": "support", "reason": "consistent findings"}',
     False, OK),
    ("prose_after",
     '{"prediction": "refute", "reason": "contradiction"}\n'
     'Feel free to ask for more detail.',
     False, NO),
    ("code_fence",
     '```json\n{"prediction": "support", "reason": "fenced"}\n```',
     False, OK),
    ("braces_inside_reason",
     '{"prediction": "support", "reason": "the figure {40%} was reported correctly"}',
     False, OK),
    ("escaped_quotes_in_reason",
     '{"prediction": "refute", "reason": "the abstract says \\"no effect\\" explicitly"}',
     False, NO),
    ("pretty_printed",
     '{\n  "prediction": "support",\n  "reason": "multi-line JSON"\n}',
     False, OK),
    ("raw_newline_in_string",
     '{"prediction": "support", "reason": "first line\nsecond line"}',
     False, OK),
    ("extra_keys_ignored",
     '{"prediction": "refute", "reason": "ok", "confidence": 0.9, "notes": []}',
     False, NO),
    ("reason_missing",
     '{"prediction": "support"}',
     False, _exp(OK)),
    ("reason_empty",
     '{"prediction": "support", "reason": ""}',
     False, OK),
    ("reason_numeric",
     '{"prediction": "refute", "reason": 42}',
     False, NO),
    ("crlf_json",
     '{"prediction": "support",\r\n "reason": "windows line endings"}',
     False, OK),
    ("first_object_wins",
     '{"prediction": "support", "reason": "primary"} '
     '{"prediction": "refute", "reason": "echo"}',
     False, OK),
    ("unbalanced_brace_before_object",
     'Consider {this unfinished thought... final answer: '
     '{"prediction": "refute", "reason": "recovered"}',
     False, NO),
    ("json_after_long_chain_of_thought",
     'Alignment Check: the claim aligns.\nCausation confusion: none found.\n'
     'Accuracy: numbers match.\nGeneralization: none.\nContextual Fidelity: fine.\n'
     'Final output:\n{"prediction": "support", "reason": "all five checks pass"}',
     False, OK),
    ("unicode_reason",
     '{"prediction": "support", "reason": "efficacité of 60 % (“as reported”)"}',
     False, OK),
    # ---- scored replies -------------------------------------------------
    ("scores_complete_dict",
     '{"prediction": "support", "reason": "ok", "scores": {"alignment": 1.0, '
     '"causation_confusion": -0.5, "accuracy": 0.25, "generalization": 0.0, '
     '"contextual_fidelity": 1.0}}',
     True, _exp(OK, scores=FULL_SCORES)),
    ("scores_out_of_range_clamped",
     '{"prediction": "refute", "reason": "ok", "scores": {"alignment": -2, '
     '"causation_confusion": 3.7, "accuracy": -1.5, "generalization": 99, '
     '"contextual_fidelity": 0.5}}',
     True, _exp(NO, scores=(-1.0, 1.0, -1.0, 1.0, 0.5))),
    ("scores_partial_zero_filled",
     '{"prediction": "support", "reason": "ok", "scores": {"alignment": 1, '
     '"accuracy": -1}}',
     True, _exp(OK, scores=(1.0, 0.0, -1.0, 0.0, 0.0), incomplete=True)),
    ("scores_as_list",
     '{"prediction": "refute", "reason": "ok", "scores": [1, 0, 1, 0, 1]}',
     True, _exp(NO, scores=(1.0, 0.0, 1.0, 0.0, 1.0))),
    ("scores_list_short",
     '{"prediction": "support", "reason": "ok", "scores": [0.5, -0.5]}',
     True, _exp(OK, scores=(0.5, -0.5, 0.0, 0.0, 0.0), incomplete=True)),
    ("scores_numeric_strings",
     '{"prediction": "support", "reason": "ok", "scores": {"alignment": "0.5", '
     '"causation_confusion": "0", "accuracy": "-0.25", "generalization": "1", '
     '"contextual_fidelity": "-1"}}',
     True, _exp(OK, scores=(0.5, 0.0, -0.25, 1.0, -1.0))),
    ("scores_spaced_title_keys",
     '{"prediction": "refute", "reason": "ok", "scores": {"Alignment Check": -1, '
     '"Causation Confusion": -1, "Accuracy": -1, "Generalization": -1, '
     '"Contextual Fidelity": 0}}',
     True, _exp(NO, scores=(-1.0, -1.0, -1.0, -1.0, 0.0))),
    ("scores_hyphenated_keys",
     '{"prediction": "support", "reason": "ok", "scores": {"alignment": 1, '
     '"causation-confusion": 0, "accuracy": 1, "generalization": 0, '
     '"contextual-fidelity": 1}}',
     True, _exp(OK, scores=(1.0, 0.0, 1.0, 0.0, 1.0))),
    ("scores_unknown_keys_ignored",
     '{"prediction": "support", "reason": "ok", "scores": {"alignment": 1, '
     '"causation_confusion": 0, "accuracy": 1, "generalization": 0, '
     '"contextual_fidelity": 1, "overall": 0.8}}',
     True, _exp(OK, scores=(1.0, 0.0, 1.0, 0.0, 1.0))),
    ("scores_int_values",
     '{"prediction": "refute", "reason": "ok", "scores": {"alignment": -1, '
     '"causation_confusion": -1, "accuracy": -1, "generalization": -1, '
     '"contextual_fidelity": 0}}',
     True, _exp(NO, scores=(-1.0, -1.0, -1.0, -1.0, 0.0))),
    ("scores_expected_but_absent",
     '{"prediction": "support", "reason": "forgot to score"}',
     True, _exp(OK, incomplete=True)),
    ("scores_null",
     '{"prediction": "refute", "reason": "ok", "scores": null}',
     True, _exp(NO, incomplete=True)),
    ("scores_garbage_string",
     '{"prediction": "support", "reason": "ok", "scores": "high"}',
     True, _exp(OK, incomplete=True)),
    ("scores_non_numeric_values_dropped",
     '{"prediction": "support", "reason": "ok", "scores": {"alignment": "strong", '
     '"causation_confusion": 0, "accuracy": 1, "generalization": 0, '
     '"contextual_fidelity": 1}}',
     True, _exp(OK, scores=(0.0, 0.0, 1.0, 0.0, 1.0), incomplete=True)),
    # ---- designed failures ----------------------------------------------
    ("prose_only_no_json",
     "The evidence clearly supports the news paragraph's central claim.",
     False, None),
    ("unknown_prediction_word",
     '{"prediction": "maybe", "reason": "hard to say"}',
     False, None),
]

PARSEABLE = [c for c in CASES if c[3] is not None]
FAILING = [c for c in CASES if c[3] is None]
