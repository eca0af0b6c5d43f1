"""Regenerate the bundled example files under src/nofinetune/data/examples."""
import json
from pathlib import Path

from nofinetune.dag import LATENT, Dag, Node
from nofinetune.faithfulness import one_bit_signalling_pr_model, signalling_pr_phenomenon
from nofinetune.polytope import (chsh_functional, kcbs_anticorrelated, kcbs_functional, pr_box,
                                 tsirelson_box, uniform_box)
from nofinetune.prob import Alphabet, random_compatible
from nofinetune.scenario import CausalModel, chsh_scenario, kcbs_scenario, phenomenon_from_model

OUT = Path(__file__).resolve().parent.parent / "src" / "nofinetune" / "data" / "examples"


def bell_graph() -> Dag:
    return Dag([Node("A"), Node("B"), Node("X"), Node("Y"), Node("L", LATENT)],
               [("L", "A"), ("L", "B"), ("X", "A"), ("Y", "B")])


def bell_model() -> CausalModel:
    g = bell_graph()
    alphabets = [Alphabet("A", ("0", "1")), Alphabet("B", ("0", "1")), Alphabet("X", ("x0", "x1")),
                 Alphabet("Y", ("y0", "y1")), Alphabet("L", ("0", "1"))]
    return CausalModel(g, random_compatible(g, alphabets, seed=2, grid=10))


def write(name, obj):
    (OUT / f"{name}.json").write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    write("bell_graph", bell_graph().to_json())
    write("collider", Dag(["A", "B", "C"], [("A", "B"), ("C", "B")]).to_json())
    write("chain", Dag(["A", "B", "C"], [("A", "B"), ("B", "C")]).to_json())
    model = bell_model()
    write("bell_model", model.to_json())
    write("bell_phenomenon", phenomenon_from_model(model, chsh_scenario()).to_json())
    write("pr_box", pr_box().to_json())
    write("uniform_box", uniform_box().to_json())
    write("tsirelson_box", tsirelson_box().to_json())
    write("chsh_scenario", chsh_scenario().to_json())
    write("kcbs_scenario", kcbs_scenario().to_json())
    write("kcbs_anticorrelated", kcbs_anticorrelated().to_json())
    write("signalling_pr_model", one_bit_signalling_pr_model().to_json())
    write("signalling_pr_phenomenon", signalling_pr_phenomenon().to_json())
    write("chsh_inequality", {"scenario": chsh_scenario().to_json(), "inequality": chsh_functional().to_json()})
    write("kcbs_inequality", {"scenario": kcbs_scenario().to_json(), "inequality": kcbs_functional().to_json()})
    print(f"wrote {len(list(OUT.glob('*.json')))} files to {OUT}")


if __name__ == "__main__":
    main()
