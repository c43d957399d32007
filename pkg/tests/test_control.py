import json

import pytest

from modelsum.control import (
    HIDABLE,
    PARAGRAPHS,
    ControlError,
    SummaryControl,
    control_from_dict,
    load_control,
    summary_control,
)


def test_defaults():
    c = summary_control()
    assert c.complexity_measures == ("sparsity", "interaction_strength")
    assert c.effect_measures == ("pdp", "ale")
    assert c.n_important == 15
    assert c.digits == 4
    assert c.measures is None and c.importance_measures is None and c.fairness_measures is None
    assert c.protected_attribute is None
    assert c.hide == frozenset()


def test_general_cannot_be_hidden():
    assert "general" not in HIDABLE
    assert set(PARAGRAPHS) - HIDABLE == {"general"}
    with pytest.raises(ControlError, match="cannot hide"):
        SummaryControl(hide={"general"})
    with pytest.raises(ControlError):
        SummaryControl(hide={"plots"})


@pytest.mark.parametrize("kwargs", [
    {"n_important": 0}, {"digits": 0}, {"grid_size": 1}, {"pfi_repetitions": 0},
    {"complexity_measures": ("sparsity", "entropy")}, {"effect_measures": ("ice",)},
])
def test_invalid_values(kwargs):
    with pytest.raises(ControlError):
        SummaryControl(**kwargs)


def test_lists_become_tuples():
    c = SummaryControl(measures=["auc", "bbrier:micro"], hide=["effects"])
    assert c.measures == ("auc", "bbrier:micro")
    assert c.hide == frozenset({"effects"})
    hash(c)


def test_dict_round_trip():
    c = SummaryControl(digits=3, hide={"effects", "residuals"}, protected_attribute="sex")
    d = c.to_dict()
    assert d["hide"] == ["effects", "residuals"]
    assert control_from_dict(json.loads(json.dumps(d))) == c


def test_unknown_keys_rejected():
    with pytest.raises(ControlError, match="unknown control key"):
        control_from_dict({"digits": 3, "colour": "red"})


def test_load_control(tmp_path):
    path = tmp_path / "control.json"
    path.write_text(json.dumps({"n_important": 5, "hide": ["effects"]}))
    c = load_control(path)
    assert c.n_important == 5 and c.hide == frozenset({"effects"})
    path.write_text("[1, 2]")
    with pytest.raises(ControlError):
        load_control(path)
