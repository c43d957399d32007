import numpy as np
import pytest

from modelsum.learners.base import FittedModel
from modelsum.tabular import Column, Frame, make_task


class FunctionModel(FittedModel):
    """A fitted model whose output is an arbitrary function of the encoded rows."""

    def __init__(self, learner, task, fn):
        super().__init__(learner, task)
        self.fn = fn

    def raw(self, X):
        out = np.asarray(self.fn(X), dtype=np.float64)
        return out.reshape(len(X), -1)


def numeric_frame(target=None, **cols):
    columns = [Column.numeric(name, v) for name, v in cols.items()]
    if target is not None:
        columns.append(Column.numeric("y", target))
    return Frame(tuple(columns))


def function_model(frame, fn, target="y"):
    from modelsum.learners import make_learner

    task = make_task(frame, target)
    return FunctionModel(make_learner("linear"), task, fn), task


def credit_frame(n=300, seed=1):
    """A small credit-like table: risk in (good, bad), sex, age, amount, purpose."""
    rng = np.random.default_rng(seed)
    age = rng.uniform(19, 75, n).round()
    amount = rng.gamma(2.0, 1500.0, n).round()
    duration = rng.integers(6, 60, n).astype(float)
    sex = rng.choice(["female", "male"], n, p=[0.35, 0.65])
    purpose = rng.choice(["car", "furniture", "education", "business"], n)
    score = 0.03 * (age - 35) - 0.0003 * (amount - 3000) - 0.03 * (duration - 20) + rng.normal(0, 1, n)
    risk = np.where(score > -0.5, "good", "bad")
    return Frame((
        Column.numeric("age", age),
        Column.numeric("amount", amount),
        Column.numeric("duration", duration),
        Column.categorical("sex", list(sex), ["female", "male"]),
        Column.categorical("purpose", list(purpose), ["car", "furniture", "education", "business"]),
        Column.categorical("risk", list(risk), ["good", "bad"]),
    ))


@pytest.fixture
def credit_task():
    return make_task(credit_frame(), "risk", positive_class="good", protected_attribute="sex", id="credit")


ACCEPTANCE_DETAILS: dict[str, str] = {}


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion, in criterion order."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" not in nodeid or rep.when not in ("call", "setup"):
                continue
            name = nodeid.split("::")[-1]
            number = int(name.split("_")[2])
            status = "PASS" if outcome == "passed" else "FAIL"
            lines.append((number, f"{status} criterion {number:2d} {name}: {ACCEPTANCE_DETAILS.get(name, '')}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
