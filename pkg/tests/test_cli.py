import csv
import json

import numpy as np
import pytest

from modelsum.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main
from modelsum.simulate import signal
from modelsum.tabular import load_csv, write_csv

from conftest import credit_frame


@pytest.fixture
def credit_csv(tmp_path):
    path = tmp_path / "credit.csv"
    write_csv(credit_frame(150), path)
    return path


def test_simulate_writes_expected_columns(tmp_path):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--n", "50", "--p", "7", "--seed", "3", "--out", str(out)]) == EXIT_OK
    frame = load_csv(out)
    assert list(frame.names) == ["x1", "x2", "x3", "x4", "x5", "x6", "x7", "y"]
    assert frame["x5"].is_categorical
    assert set(frame["x4"].values) <= {0.0, 1.0}


def test_simulate_without_noise_is_the_formula(tmp_path):
    out = tmp_path / "sim.csv"
    assert main(["simulate", "--n", "40", "--p", "5", "--noise", "0", "--out", str(out)]) == EXIT_OK
    f = load_csv(out)
    x = [f[c].values for c in ("x1", "x2", "x3", "x4")]
    np.testing.assert_array_equal(f["y"].values, signal(*x))


def test_simulate_is_seeded(tmp_path):
    a, b, c = (tmp_path / f"{k}.csv" for k in "abc")
    main(["simulate", "--n", "20", "--p", "6", "--seed", "1", "--out", str(a)])
    main(["simulate", "--n", "20", "--p", "6", "--seed", "1", "--out", str(b)])
    main(["simulate", "--n", "20", "--p", "6", "--seed", "2", "--out", str(c)])
    assert a.read_text() == b.read_text() != c.read_text()


def test_simulate_usage_error(tmp_path, capsys):
    assert main(["simulate", "--n", "10", "--p", "3", "--out", str(tmp_path / "x.csv")]) == EXIT_USAGE
    assert "p must be at least 5" in capsys.readouterr().err


def test_summarize_text(credit_csv, capsys):
    code = main(["summarize", "--data", str(credit_csv), "--target", "risk", "--positive", "good",
                 "--protected", "sex", "--learner", "logistic", "--workers", "1"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("General:\nTask: credit (binary classification), target: risk, positive class: good")
    assert "Fairness [sd] (protected attribute: sex):" in out


def test_summarize_json_to_file_with_hide(credit_csv, tmp_path):
    out = tmp_path / "report.json"
    code = main(["summarize", "--data", str(credit_csv), "--target", "risk", "--learner", "tree",
                 "--format", "json", "--hide", "effects", "--hide", "residuals", "--digits", "3",
                 "--workers", "1", "--out", str(out)])
    assert code == EXIT_OK
    data = json.loads(out.read_text())
    assert data["effects"]["hidden"] and data["residuals"]["hidden"]
    assert data["control"]["digits"] == 3
    assert data["general"]["learner"]["id"] == "tree"


def test_summarize_control_file(credit_csv, tmp_path, capsys):
    control = tmp_path / "control.json"
    control.write_text(json.dumps({"hide": ["importance", "effects"], "measures": ["auc"]}))
    code = main(["summarize", "--data", str(credit_csv), "--target", "risk", "--learner", "logistic",
                 "--control", str(control), "--workers", "1"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "Importance" not in out and "Effects" not in out
    assert "auc (macro)" in out and "mcc" not in out


@pytest.mark.parametrize("extra", [
    ["--learner", "nope"],
    ["--resampling", "bootstrap"],
    ["--hide", "general"],
    ["--width", "20"],
    ["--format", "html"],
])
def test_summarize_usage_errors(credit_csv, extra):
    argv = ["summarize", "--data", str(credit_csv), "--target", "risk"] + extra
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == EXIT_USAGE


def test_summarize_data_errors(credit_csv, tmp_path, capsys):
    assert main(["summarize", "--data", str(tmp_path / "missing.csv"), "--target", "risk"]) == EXIT_DATA
    assert capsys.readouterr().err.startswith("modelsum summarize: load:")
    assert main(["summarize", "--data", str(credit_csv), "--target", "nope", "--workers", "1"]) == EXIT_DATA
    assert "task:" in capsys.readouterr().err
    code = main(["summarize", "--data", str(credit_csv), "--target", "purpose", "--learner", "logistic",
                 "--workers", "1"])
    assert code == EXIT_DATA


def test_missing_required_argument_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["summarize", "--data", "x.csv"])
    assert exc.value.code == EXIT_USAGE


def test_bench_writes_one_row_per_cell(tmp_path):
    out = tmp_path / "bench.csv"
    code = main(["bench", "--grid", "n=40,60;p=5,6", "--learners", "linear", "--repeats", "1",
                 "--out", str(out)])
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.open()))
    assert [(r["n"], r["p"]) for r in rows] == [("40", "5"), ("40", "6"), ("60", "5"), ("60", "6")]
    assert all(float(r["seconds"]) > 0 and r["run"] == "1" for r in rows)


def test_bench_bad_grid(tmp_path):
    assert main(["bench", "--grid", "n=10", "--out", str(tmp_path / "b.csv")]) == EXIT_USAGE
