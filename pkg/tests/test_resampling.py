import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modelsum.learners import make_learner
from modelsum.resampling import (
    ResamplingError,
    ResamplingStrategy,
    StratificationWarning,
    default_workers,
    parse_strategy,
    resample,
    split,
)
from modelsum.simulate import simulate
from modelsum.tabular import Column, make_task

from conftest import credit_frame


@settings(max_examples=100, deadline=None)
@given(st.integers(2, 10), st.integers(0, 200), st.integers(0, 2**31 - 1))
def test_cv_partitions_rows(k, extra, seed):
    n = k + extra
    splits = split(ResamplingStrategy("cv", folds=k), n, seed=seed)
    tests = np.concatenate([te for _, te in splits])
    assert np.array_equal(np.sort(tests), np.arange(n))
    sizes = [len(te) for _, te in splits]
    assert max(sizes) - min(sizes) <= 1
    for train, test in splits:
        assert np.intersect1d(train, test).size == 0
        assert len(train) + len(test) == n


def test_cv_sizes_for_ten_rows():
    splits = split(ResamplingStrategy("cv", folds=3), 10, seed=0)
    assert sorted(len(te) for _, te in splits) == [3, 3, 4]


def test_cv3_on_516_rows(credit_task):
    task = make_task(credit_frame(516), "risk", positive_class="good")
    splits = split(parse_strategy("cv3"), task.n_rows, task.target_column, seed=0)
    assert [len(te) for _, te in splits] == [172, 172, 172]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=30, max_size=150), st.integers(2, 5),
       st.integers(0, 1000))
def test_stratified_fold_class_counts(labels, k, seed):
    col = Column.categorical("y", labels)
    counts = np.bincount(col.values)
    if counts.min() < k:
        return
    for _, test in split(ResamplingStrategy("cv", folds=k), len(labels), col, seed):
        in_fold = np.bincount(col.values[test], minlength=len(counts))
        expected = counts * len(test) / len(labels)
        assert np.all(np.abs(in_fold - counts / k) <= 1)
        assert np.all(np.abs(in_fold - expected) < 2)


def test_rare_class_falls_back_to_unstratified():
    col = Column.categorical("y", ["a"] * 20 + ["b"])
    with pytest.warns(StratificationWarning):
        splits = split(ResamplingStrategy("cv", folds=3), 21, col, seed=0)
    assert len(splits) == 3


def test_split_is_seeded():
    s = ResamplingStrategy("cv", folds=4)
    a = split(s, 50, seed=1)
    b = split(s, 50, seed=1)
    c = split(s, 50, seed=2)
    assert all(np.array_equal(x[1], y[1]) for x, y in zip(a, b))
    assert not all(np.array_equal(x[1], y[1]) for x, y in zip(a, c))


def test_holdout_and_subsampling():
    (train, test), = split(parse_strategy("holdout"), 90, seed=0)
    assert len(train) == 60 and len(test) == 30
    subs = split(parse_strategy("subsampling:0.5x4"), 40, seed=0)
    assert len(subs) == 4
    assert all(len(tr) == 20 for tr, _ in subs)
    assert not np.array_equal(subs[0][1], subs[1][1])


@pytest.mark.parametrize(
    "spec, iters",
    [("cv3", 3), ("cv5", 5), ("holdout", 1), ("subsampling", 30), ("subsampling:0.5x4", 4)],
)
def test_parse_strategy(spec, iters):
    assert parse_strategy(spec).iterations == iters


@pytest.mark.parametrize("spec", ["cv1", "bogus", "holdout:ratio=1.5"])
def test_parse_strategy_errors(spec):
    with pytest.raises(ValueError):
        parse_strategy(spec)


def test_too_few_rows_for_folds():
    with pytest.raises(ValueError, match="cannot split"):
        split(ResamplingStrategy("cv", folds=5), 3)


def test_resample_predicts_every_row_once():
    task = make_task(simulate(60, 6, 0), "y")
    rr = resample(task, make_learner("linear"), parse_strategy("cv3"), workers=1, seed=0)
    ids = np.concatenate([it.prediction.row_ids for it in rr.iterations])
    assert np.array_equal(np.sort(ids), np.arange(60))
    assert rr.models_stored
    for it in rr.iterations:
        np.testing.assert_array_equal(rr.truth(it), task.target_column.values[it.test])


def test_resample_identical_across_workers():
    task = make_task(simulate(80, 6, 0), "y")
    lrn = make_learner("random_forest", num_trees=20)
    one = resample(task, lrn, parse_strategy("cv3"), workers=1, seed=5)
    two = resample(task, lrn, parse_strategy("cv3"), workers=2, seed=5)
    for a, b in zip(one.iterations, two.iterations):
        np.testing.assert_array_equal(a.test, b.test)
        np.testing.assert_array_equal(a.prediction.response, b.prediction.response)


def test_resample_without_models():
    task = make_task(simulate(30, 5, 0), "y")
    rr = resample(task, make_learner("linear"), parse_strategy("cv3"), store_models=False)
    assert not rr.models_stored


def test_unsupported_learner_rejected():
    task = make_task(simulate(30, 5, 0), "y")
    with pytest.raises(ResamplingError):
        resample(task, make_learner("logistic"), parse_strategy("cv3"))


def test_default_workers_from_environment(monkeypatch):
    monkeypatch.setenv("MODELSUM_WORKERS", "3")
    assert default_workers() == 3
    monkeypatch.delenv("MODELSUM_WORKERS")
    assert default_workers() >= 1


def test_fold_failure_names_the_fold(monkeypatch):
    import modelsum.resampling as rs

    calls = []

    def failing_fit(learner, task, rows, seed):
        calls.append(seed)
        if len(calls) == 2:
            raise RuntimeError("boom")
        return make_learner("linear").fit(task, rows, seed)

    monkeypatch.setattr(rs, "fit", failing_fit)
    task = make_task(simulate(30, 5, 0), "y")
    with pytest.raises(ResamplingError) as info:
        resample(task, make_learner("linear"), parse_strategy("cv3"), workers=1)
    assert info.value.fold == 1
