import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modelsum.control import SummaryControl
from modelsum.fairness import (
    CUAE,
    DP,
    EOD,
    REG_MSE_GAP,
    FairnessUndefined,
    FairnessWarning,
    default_fairness_measures,
    fairness_measure,
    group_rates,
    max_gap,
    resolve_protected,
    summarize_fairness,
)
from modelsum.learners import make_learner
from modelsum.resampling import parse_strategy, resample
from modelsum.tabular import BINARY, REGRESSION, make_task

from conftest import credit_frame

POS = 1


def group_table(rows):
    """rows: (group, truth, label, count) tuples -> label, truth, group arrays."""
    labels, truth, groups = [], [], []
    for g, t, lab, count in rows:
        labels += [lab] * count
        truth += [t] * count
        groups += [g] * count
    return np.array(labels), np.array(truth), np.array(groups)


def test_demographic_parity_exact():
    # group a: 8 of 10 predicted positive, group b: 6 of 10
    labels, truth, groups = group_table([
        ("a", 1, 1, 8), ("a", 1, 0, 2),
        ("b", 1, 1, 6), ("b", 1, 0, 4),
    ])
    assert fairness_measure(DP, labels, truth, groups, POS) == 0.2


def test_equalized_odds_exact():
    # TPR 0.9 vs 0.7, FPR 0.2 vs 0.2
    labels, truth, groups = group_table([
        ("a", 1, 1, 9), ("a", 1, 0, 1), ("a", 0, 1, 2), ("a", 0, 0, 8),
        ("b", 1, 1, 7), ("b", 1, 0, 3), ("b", 0, 1, 2), ("b", 0, 0, 8),
    ])
    assert fairness_measure(EOD, labels, truth, groups, POS) == 0.1


def test_identical_groups_are_fair():
    block = [(1, 1, 5), (1, 0, 2), (0, 1, 1), (0, 0, 4)]
    labels, truth, groups = group_table([(g, t, lab, c) for g in ("a", "b") for t, lab, c in block])
    for m in (DP, EOD, CUAE):
        assert fairness_measure(m, labels, truth, groups, POS) == 0.0


def test_cuae_uses_predictive_values():
    # PPV 3/4 vs 1/2, NPV 1 vs 1
    labels, truth, groups = group_table([
        ("a", 1, 1, 3), ("a", 0, 1, 1), ("a", 0, 0, 2),
        ("b", 1, 1, 2), ("b", 0, 1, 2), ("b", 0, 0, 2),
    ])
    assert fairness_measure(CUAE, labels, truth, groups, POS) == 0.125


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.sampled_from("ab"), st.integers(0, 1), st.integers(0, 1)), min_size=4, max_size=60))
def test_measures_symmetric_in_group_labels(rows):
    groups = np.array([r[0] for r in rows])
    truth = np.array([r[1] for r in rows])
    labels = np.array([r[2] for r in rows])
    if len(set(groups)) < 2:
        return
    swapped = np.where(groups == "a", "b", "a")
    for m in (DP, EOD, CUAE):
        try:
            v = fairness_measure(m, labels, truth, groups, POS)
        except FairnessUndefined:
            continue
        assert v == fairness_measure(m, labels, truth, swapped, POS)
        assert 0.0 <= v <= 1.0


def test_multiple_groups_use_largest_gap():
    labels, truth, groups = group_table([
        ("a", 1, 1, 9), ("a", 1, 0, 1),
        ("b", 1, 1, 5), ("b", 1, 0, 5),
        ("c", 1, 1, 7), ("c", 1, 0, 3),
    ])
    assert fairness_measure(DP, labels, truth, groups, POS) == pytest.approx(0.4)


def test_undefined_rate_term_skipped_and_flagged():
    # group b has no true negatives, so its FPR is undefined
    labels, truth, groups = group_table([
        ("a", 1, 1, 9), ("a", 1, 0, 1), ("a", 0, 1, 2), ("a", 0, 0, 8),
        ("b", 1, 1, 7), ("b", 1, 0, 3),
    ])
    flags = []
    assert fairness_measure(EOD, labels, truth, groups, POS, flags=flags) == pytest.approx(0.2)
    assert flags


def test_single_group_undefined():
    with pytest.raises(FairnessUndefined):
        fairness_measure(DP, np.array([1, 0]), np.array([1, 0]), np.array(["a", "a"]), POS)


def test_regression_mse_gap():
    truth = np.array([1.0, 2.0, 3.0, 4.0])
    response = np.array([1.0, 2.0, 2.0, 6.0])
    groups = np.array(["a", "a", "b", "b"])
    assert fairness_measure(REG_MSE_GAP, truth=truth, groups=groups, response=response) == pytest.approx(2.5)


def test_group_rates_and_gap():
    labels, truth, groups = group_table([("a", 1, 1, 2), ("a", 0, 0, 2), ("b", 1, 0, 1), ("b", 0, 1, 1)])
    rates = group_rates(labels, truth, groups, POS)
    assert [float(r) for r in rates["tpr"]] == [1.0, 0.0]
    assert max_gap([0.1, None, 0.5]) == pytest.approx(0.4)
    assert max_gap([0.3]) is None


def test_default_measures():
    assert default_fairness_measures(BINARY) == [DP, CUAE, EOD]
    assert default_fairness_measures(REGRESSION) == [REG_MSE_GAP]


def test_control_protected_attribute_wins():
    frame = credit_frame(60)
    task = make_task(frame, "risk", protected_attribute="purpose")
    assert resolve_protected(task, SummaryControl(protected_attribute="sex")) == "sex"
    assert resolve_protected(task, SummaryControl()) == "purpose"
    assert resolve_protected(make_task(frame, "risk"), SummaryControl()) is None
    with pytest.raises(ValueError):
        resolve_protected(task, SummaryControl(protected_attribute="age"))


def test_summarize_fairness_over_folds(credit_task):
    rr = resample(credit_task, make_learner("logistic"), parse_strategy("cv3"))
    summary = summarize_fairness(rr, "sex", [DP, CUAE, EOD])
    assert summary.groups == ["female", "male"]
    assert all(len(summary.per_fold[m]) == 3 for m in summary.measures)
    assert all(0 <= summary.mean[m] <= 1 for m in summary.measures)


def test_fold_with_one_group_is_na():
    frame = credit_frame(60)
    task = make_task(frame, "risk", positive_class="good")
    # every held-out fold sees a single value of the "group" column when it is
    # constant within folds; emulate with a protected column of one level used
    rr = resample(task, make_learner("featureless"), parse_strategy("cv3"))
    one = frame.replace(frame["sex"].take(np.zeros(60, dtype=int)))
    rr.task = make_task(one, "risk", positive_class="good", protected_attribute="sex")
    with pytest.warns(FairnessWarning):
        summary = summarize_fairness(rr, "sex", [DP])
    assert summary.per_fold[DP] == [None, None, None]
