from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from nofinetune.ci import CIStatement
from nofinetune.dag import LATENT, Dag, Node
from nofinetune.errors import NonBinaryContextError, SupportError, UnknownMeasurementError
from nofinetune.polytope import kcbs_anticorrelated, phenomenon_from_conditionals, pr_box
from nofinetune.prob import Alphabet, Kernel, is_conditionally_independent, markov_factorize, random_compatible
from nofinetune.scenario import (
    BellPartition,
    CausalModel,
    MeasurementScenario,
    Phenomenon,
    chsh_scenario,
    is_bell_scenario,
    kcbs_scenario,
    no_disturbance,
    phenomenon_from_model,
    validate_scenario,
)

BIT = ("0", "1")


def test_chsh_and_kcbs_validate():
    s = chsh_scenario()
    assert len(s.contexts) == 4 and len(s.outcomes) == 2
    k = kcbs_scenario()
    assert len(k.contexts) == 5
    assert k.compatible("m4", "m0") and not k.compatible("m0", "m2")


def test_validation_errors():
    with pytest.raises(NonBinaryContextError):
        validate_scenario(["m0", "m1", "m2"], BIT, [["m0", "m1", "m2"]])
    with pytest.raises(UnknownMeasurementError):
        validate_scenario(["m0"], BIT, [["m0", "q"]])
    with pytest.raises(NonBinaryContextError):
        validate_scenario(["m0"], BIT, [["m0", "m0"]])
    s = validate_scenario(["m0"], BIT, [["m0", "m0"]], allow_repeats=True)
    assert s.compatible("m0", "m0")


def test_scenario_json_round_trip():
    for s in (chsh_scenario(), kcbs_scenario()):
        assert MeasurementScenario.from_json(s.to_json()) == s


def test_bell_partitions():
    assert is_bell_scenario(chsh_scenario()) == BellPartition((("x0", "x1"), ("y0", "y1")))
    assert is_bell_scenario(kcbs_scenario()) is None
    single = validate_scenario(["m0", "m1"], BIT, [["m0", "m1"]])
    assert is_bell_scenario(single) == BellPartition((("m0",), ("m1",)))
    with pytest.raises(ValueError):
        is_bell_scenario(single, k=1)


def test_kcbs_two_partitions_by_brute_force():
    s = kcbs_scenario()
    ms = s.measurements
    for mask in range(1, 2 ** 5 - 1):
        part = {m for i, m in enumerate(ms) if mask >> i & 1}
        assert any((x in part) == (y in part) for x, y in s.contexts)


def test_no_disturbance_examples():
    assert no_disturbance(pr_box()).holds
    assert no_disturbance(kcbs_anticorrelated()).holds


def test_signalling_box_reports_violation():
    # B copies x: P(B = x | x, y) = 1
    settings_ = {(x, y): Fraction(1, 4) for x in ("x0", "x1") for y in ("y0", "y1")}
    p = phenomenon_from_conditionals(chsh_scenario(), settings_,
                                     lambda a, b, x, y: Fraction(int(b == x[-1])) / 2,
                                     x_values=("x0", "x1"), y_values=("y0", "y1"))
    r = no_disturbance(p)
    assert not r.holds
    assert {v.variable for v in r.violations} == {"B"}
    assert all(v.deviation == Fraction(1, 2) for v in r.violations)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 9), min_size=12, max_size=12))
def test_product_phenomena_satisfy_nd(ws):
    pa = [Fraction(ws[0], ws[0] + ws[1]), Fraction(ws[2], ws[2] + ws[3])]
    pb = [Fraction(ws[4], ws[4] + ws[5]), Fraction(ws[6], ws[6] + ws[7])]
    tot = sum(ws[8:])
    settings_ = {(x, y): Fraction(w, tot) for (x, y), w in
                 zip([(x, y) for x in ("x0", "x1") for y in ("y0", "y1")], ws[8:])}

    def cond(a, b, x, y):
        fa = pa[int(x[-1])] if a == "0" else 1 - pa[int(x[-1])]
        fb = pb[int(y[-1])] if b == "0" else 1 - pb[int(y[-1])]
        return fa * fb
    p = phenomenon_from_conditionals(chsh_scenario(), settings_, cond, x_values=("x0", "x1"), y_values=("y0", "y1"))
    assert no_disturbance(p).holds


def _bell_graph():
    return Dag([Node("A"), Node("B"), Node("X"), Node("Y"), Node("L", LATENT)],
               [("X", "A"), ("Y", "B"), ("L", "A"), ("L", "B")])


def _bell_alphabets(lcard=2):
    return [Alphabet("A", BIT), Alphabet("B", BIT), Alphabet("X", ("x0", "x1")),
            Alphabet("Y", ("y0", "y1")), Alphabet("L", tuple(str(i) for i in range(lcard)))]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6))
def test_nd_equals_no_signalling_cis_on_bell_scenarios(seed, seed2):
    # random phenomena: both from Bell models and from an unconstrained complete graph
    g = _bell_graph()
    p1 = phenomenon_from_model(CausalModel(g, random_compatible(g, _bell_alphabets(), seed, grid=6)), chsh_scenario())
    full = Dag(["X", "Y", "A", "B"], [("X", "Y"), ("X", "A"), ("Y", "A"), ("X", "B"), ("Y", "B"), ("A", "B")])
    joint = random_compatible(full, _bell_alphabets()[:4], seed2, grid=3)
    p2 = Phenomenon(chsh_scenario(), joint)
    for p in (p1, p2):
        cis = is_conditionally_independent(p.dist, CIStatement.of("A", "Y", "X")) and \
            is_conditionally_independent(p.dist, CIStatement.of("B", "X", "Y"))
        assert no_disturbance(p).holds == cis


def test_model_with_uniform_kernels_gives_product_phenomenon():
    g = _bell_graph()
    kernels = [Kernel.uniform(a, [b for b in _bell_alphabets() if b.variable in g.parents(a.variable)])
               for a in _bell_alphabets()]
    model = CausalModel(g, markov_factorize(g, kernels))
    p = phenomenon_from_model(model, chsh_scenario())
    assert all(w == Fraction(1, 16) for w in p.dist.table().values())


def test_support_error_on_non_context():
    s = validate_scenario(["m0", "m1", "m2"], BIT, [["m0", "m1"]])
    settings_ = {("m0", "m2"): Fraction(1)}
    with pytest.raises(SupportError):
        phenomenon_from_conditionals(s, settings_, lambda a, b, x, y: Fraction(1, 4))


def test_phenomenon_round_trip_and_exactness():
    g = _bell_graph()
    model = CausalModel(g, random_compatible(g, _bell_alphabets(), 3))
    p = phenomenon_from_model(model, chsh_scenario())
    assert p.exact
    q = Phenomenon.from_json(p.to_json())
    assert q.dist == p.dist and q.scenario == p.scenario
    assert CausalModel.from_json(model.to_json()).joint == model.joint


def test_phenomenon_support_constraint_holds_for_builders():
    p = kcbs_anticorrelated()
    for (x, y), w in p.setting_weights().items():
        if w > 0:
            assert p.scenario.compatible(x, y)
