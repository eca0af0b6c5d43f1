"""Bundled example files: schema validity and lossless round trips."""
import json

import pytest

from nofinetune.dag import Dag
from nofinetune.polytope import Inequality
from nofinetune.scenario import CausalModel, MeasurementScenario, Phenomenon

from conftest import EXAMPLES, GOLDEN, validate

KINDS = {
    "bell_graph": ("graph", Dag),
    "collider": ("graph", Dag),
    "chain": ("graph", Dag),
    "bell_model": ("causal_model", CausalModel),
    "signalling_pr_model": ("causal_model", CausalModel),
    "bell_phenomenon": ("phenomenon", Phenomenon),
    "pr_box": ("phenomenon", Phenomenon),
    "uniform_box": ("phenomenon", Phenomenon),
    "tsirelson_box": ("phenomenon", Phenomenon),
    "kcbs_anticorrelated": ("phenomenon", Phenomenon),
    "signalling_pr_phenomenon": ("phenomenon", Phenomenon),
    "chsh_scenario": ("scenario", MeasurementScenario),
    "kcbs_scenario": ("scenario", MeasurementScenario),
    "chsh_inequality": ("inequality", None),
    "kcbs_inequality": ("inequality", None),
}


def test_every_bundled_file_is_listed():
    assert {p.stem for p in EXAMPLES.glob("*.json")} == set(KINDS)


@pytest.mark.parametrize("name", sorted(KINDS))
def test_example_validates_and_round_trips(name):
    schema, cls = KINDS[name]
    obj = json.loads((EXAMPLES / f"{name}.json").read_text())
    validate(obj, schema)
    if cls is None:
        first = Inequality.from_json(obj["inequality"])
        again = Inequality.from_json(first.to_json())
        assert again == first
        assert MeasurementScenario.from_json(obj["scenario"]).to_json() == obj["scenario"]
        return
    first = cls.from_json(obj)
    assert first.to_json() == obj
    again = cls.from_json(first.to_json())
    assert again.to_json() == obj


def test_golden_report_validates():
    validate(json.loads(GOLDEN.read_text()), "theorem1_report")
