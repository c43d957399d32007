import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modelsum.tabular import (
    BINARY,
    CATEGORICAL,
    MULTICLASS,
    NUMERIC,
    REGRESSION,
    Column,
    DataError,
    Frame,
    load_csv,
    make_task,
    write_csv,
)

from conftest import credit_frame


def write(tmp_path, text, name="d.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_infers_column_kinds(tmp_path):
    frame = load_csv(write(tmp_path, "a,b,c\n1,x,2.5\n2,y,-1e3\n3,x,0\n"))
    assert frame.names == ["a", "b", "c"]
    assert frame["a"].kind == NUMERIC
    assert frame["b"].kind == CATEGORICAL
    assert frame["b"].levels == ("x", "y")
    assert frame["c"].values.tolist() == [2.5, -1000.0, 0.0]


def test_quoted_fields(tmp_path):
    frame = load_csv(write(tmp_path, 'name,v\n"a, b",1\n"say ""hi""",2\n'))
    assert frame["name"].decoded() == ["a, b", 'say "hi"']


@pytest.mark.parametrize("token", ["", "NA"])
def test_missing_value_rejected(tmp_path, token):
    with pytest.raises(DataError, match="missing value at row 2, column b"):
        load_csv(write(tmp_path, f"a,b\n1,2\n3,{token}\n"))


def test_duplicate_header(tmp_path):
    with pytest.raises(DataError, match="duplicate"):
        load_csv(write(tmp_path, "a,a\n1,2\n"))


def test_empty_file(tmp_path):
    with pytest.raises(DataError, match="empty"):
        load_csv(write(tmp_path, ""))


def test_ragged_row(tmp_path):
    with pytest.raises(DataError, match="row 2"):
        load_csv(write(tmp_path, "a,b\n1,2\n3\n"))


def test_numeric_override_reports_bad_cell(tmp_path):
    with pytest.raises(DataError, match="unparseable numeric at row 2, column a"):
        load_csv(write(tmp_path, "a\n1\nx\n"), {"a": NUMERIC})


def test_categorical_override(tmp_path):
    frame = load_csv(write(tmp_path, "zip\n1001\n2002\n1001\n"), {"zip": CATEGORICAL})
    assert frame["zip"].levels == ("1001", "2002")


def test_columns_are_read_only(tmp_path):
    frame = load_csv(write(tmp_path, "a\n1\n2\n"))
    with pytest.raises(ValueError):
        frame["a"].values[0] = 5.0


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=30),
    st.data(),
)
def test_csv_round_trip(tmp_path_factory, xs, data):
    labels = data.draw(st.lists(st.sampled_from(["lo", "mid", "hi"]), min_size=len(xs), max_size=len(xs)))
    frame = Frame((Column.numeric("x", xs), Column.categorical("g", labels)))
    path = tmp_path_factory.mktemp("rt") / "f.csv"
    write_csv(frame, path)
    again = load_csv(path, {"g": CATEGORICAL})
    assert again == frame


def test_task_types():
    frame = credit_frame(50)
    assert make_task(frame, "risk", positive_class="good").task_type == BINARY
    assert make_task(frame, "purpose").task_type == MULTICLASS
    assert make_task(frame, "age").task_type == REGRESSION


def test_credit_task_positive_class():
    task = make_task(credit_frame(50), "risk", positive_class="good")
    assert task.positive_class == "good"
    assert task.positive_index == task.class_levels.index("good")


def test_protected_attribute_excluded_unless_kept():
    frame = credit_frame(50)
    task = make_task(frame, "risk", protected_attribute="sex")
    assert "sex" not in task.feature_names
    kept = make_task(frame, "risk", protected_attribute="sex", keep_protected_as_feature=True)
    assert "sex" in kept.feature_names


@pytest.mark.parametrize(
    "kwargs, msg",
    [
        ({"target": "nope"}, "not in frame"),
        ({"target": "risk", "positive_class": "meh"}, "not a level"),
        ({"target": "age", "positive_class": "good"}, "numeric target"),
        ({"target": "risk", "protected_attribute": "age"}, "categorical"),
        ({"target": "risk", "protected_attribute": "risk"}, "cannot be the target"),
    ],
)
def test_task_errors(kwargs, msg):
    with pytest.raises(DataError, match=msg):
        make_task(credit_frame(30), **kwargs)


def test_constant_target_rejected():
    frame = Frame((Column.numeric("x", [1, 2, 3]), Column.numeric("y", [1, 1, 1])))
    with pytest.raises(DataError, match="zero variance"):
        make_task(frame, "y")


def test_frame_take_keeps_levels():
    frame = credit_frame(20)
    sub = frame.take(np.array([3, 1]))
    assert sub.n_rows == 2
    assert sub["purpose"].levels == frame["purpose"].levels
