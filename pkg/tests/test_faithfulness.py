
import pytest

from nofinetune.ci import CIStatement
from nofinetune.dag import LATENT, Dag, Node, all_d_separations
from nofinetune.errors import ModelMismatchError
from nofinetune.faithfulness import (
    is_faithful,
    one_bit_signalling_pr_model,
    required_nd_dseps,
    satisfies_nd_dseps,
    signalling_pr_phenomenon,
)
from nofinetune.polytope import chsh_functional, evaluate_inequality, kcbs_anticorrelated, pr_box
from nofinetune.prob import Alphabet, ci_scan, random_compatible
from nofinetune.scenario import CausalModel, chsh_scenario, no_disturbance, phenomenon_from_model

BIT = ("0", "1")
OBS = ["A", "B", "X", "Y"]


def bell_graph():
    return Dag([Node("A"), Node("B"), Node("X"), Node("Y"), Node("L", LATENT)],
               [("X", "A"), ("Y", "B"), ("L", "A"), ("L", "B")])


def bell_model(seed):
    alphabets = [Alphabet("A", BIT), Alphabet("B", BIT), Alphabet("X", ("x0", "x1")),
                 Alphabet("Y", ("y0", "y1")), Alphabet("L", ("0", "1", "2"))]
    g = bell_graph()
    return CausalModel(g, random_compatible(g, alphabets, seed))


def complete_model(phenomenon):
    g = Dag(["X", "Y", "A", "B"], [("X", "Y"), ("X", "A"), ("Y", "A"), ("X", "B"), ("Y", "B"), ("A", "B")])
    return CausalModel(g, phenomenon.dist)


def test_required_nd_dseps():
    req = required_nd_dseps()
    assert req == [CIStatement.of("A", "Y", "X"), CIStatement.of("B", "X", "Y")]
    assert satisfies_nd_dseps(bell_graph())
    assert not satisfies_nd_dseps(bell_graph().with_edge("Y", "A"))


@pytest.mark.parametrize("seed", range(5))
def test_generic_bell_models_are_faithful(seed):
    model = bell_model(seed)
    r = is_faithful(model, phenomenon_from_model(model, chsh_scenario()))
    assert r.faithful and r.fine_tuned_cis == []


def test_signalling_pr_model():
    model = one_bit_signalling_pr_model()
    p = signalling_pr_phenomenon()
    assert p.dist == pr_box().dist
    assert no_disturbance(p).holds
    assert evaluate_inequality(p, chsh_functional()).value == 4
    r = is_faithful(model, p)
    assert not r.faithful
    assert CIStatement.of("B", "X", "Y") in r.fine_tuned_cis
    assert r.to_json()["fine_tuned"][0].keys() == {"s1", "s2", "z"}


def test_complete_graph_is_never_faithful_for_nd_phenomena():
    p = pr_box()
    r = is_faithful(complete_model(p), p)
    assert not r.faithful
    assert set(required_nd_dseps()) <= set(r.fine_tuned_cis)


def test_mismatch_raises():
    with pytest.raises(ModelMismatchError):
        is_faithful(one_bit_signalling_pr_model(), phenomenon_from_model(bell_model(0), chsh_scenario()))


def test_support_induced_cis_are_flagged():
    # KCBS contexts pin Y given X, so CIs conditioned on X hold through the support alone
    p = kcbs_anticorrelated()
    r = is_faithful(complete_model(p), p)
    assert CIStatement.of("A", "Y", "X") in r.support_induced
    assert set(r.support_induced) <= set(r.fine_tuned_cis)
    pr = pr_box()
    assert is_faithful(complete_model(pr), pr).support_induced == []


@pytest.mark.parametrize("seed", range(4))
def test_faithful_implies_inclusion(seed):
    model = bell_model(seed)
    p = phenomenon_from_model(model, chsh_scenario())
    if is_faithful(model, p).faithful:
        assert set(ci_scan(p.dist, OBS, full=True)) <= set(all_d_separations(model.graph, OBS))


def test_faithfulness_monotone_under_fewer_cis():
    models = [bell_model(s) for s in range(6)]
    cis = [set(ci_scan(m.observed_marginal(), OBS, full=True)) for m in models]
    for m1, c1 in zip(models, cis):
        if not is_faithful(m1, phenomenon_from_model(m1, chsh_scenario())).faithful:
            continue
        for m2, c2 in zip(models, cis):
            if c2 <= c1:
                assert is_faithful(m2, phenomenon_from_model(m2, chsh_scenario())).faithful
