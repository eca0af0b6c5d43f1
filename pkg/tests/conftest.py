import json
import sys
from importlib import resources
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

DATA = resources.files("nofinetune") / "data"
EXAMPLES = Path(str(DATA / "examples"))
SCHEMAS = Path(str(DATA / "schemas"))
GOLDEN = Path(__file__).parent / "golden" / "theorem1_report.json"


def example(name):
    return json.loads((EXAMPLES / f"{name}.json").read_text())


def validate(obj, schema_name):
    from jsonschema import Draft202012Validator
    from referencing import Registry, Resource

    resources_ = [(p.name, Resource.from_contents(json.loads(p.read_text())))
                  for p in SCHEMAS.glob("*.schema.json")]
    registry = Registry().with_resources(resources_)
    schema = json.loads((SCHEMAS / f"{schema_name}.schema.json").read_text())
    Draft202012Validator(schema, registry=registry).validate(obj)


@pytest.fixture
def examples_dir():
    return EXAMPLES


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
