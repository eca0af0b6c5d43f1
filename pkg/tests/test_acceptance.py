"""Acceptance criteria, one test each; a PASS/FAIL line per criterion is printed
in the terminal summary (see conftest.py)."""
import contextlib
import itertools
import math
import os

import pytest

from nofinetune.ci import CIStatement
from nofinetune.dag import Dag, all_d_separations, d_separated
from nofinetune.faithfulness import is_faithful, one_bit_signalling_pr_model, signalling_pr_phenomenon
from nofinetune.polytope import (
    GLOBAL,
    PAIRS,
    certificate_holds,
    chsh_functional,
    chsh_vertices,
    classical_bound,
    evaluate_inequality,
    is_factorisable,
    kcbs_anticorrelated,
    kcbs_functional,
    pr_box,
    tsirelson_box,
    uniform_box,
    vertices_for,
)
from nofinetune.prob import Alphabet, is_conditionally_independent, random_compatible
from nofinetune.scenario import no_disturbance
from nofinetune.theorem import Theorem1Config, has_xy_common_cause, has_xy_direct_link, verify_theorem1

from conftest import GOLDEN
from oracles import PathOracle, all_dags, ci_holds, disjoint_triples

RESULTS = {}


@contextlib.contextmanager
def criterion(n, text):
    try:
        yield
    except BaseException:
        RESULTS[n] = f"criterion {n}: FAIL  {text}"
        raise
    RESULTS[n] = f"criterion {n}: PASS  {text}"


def test_c1_dsep_oracle_equivalence():
    with criterion(1, "d-separation matches path oracle on all DAGs with <= 5 nodes"):
        disagreements = 0
        dags = 0
        for n in range(1, 6):
            triples = disjoint_triples([str(i) for i in range(n)])
            for nodes, edges in all_dags(n):
                dags += 1
                g = Dag(nodes, edges)
                oracle = PathOracle(nodes, edges)
                for s1, s2, z in triples:
                    if d_separated(g, s1, s2, z) != oracle.d_separated(s1, s2, z):
                        disagreements += 1
        assert dags == 1 + 3 + 25 + 543 + 29281
        assert disagreements == 0


def test_c2_markov_soundness():
    with criterion(2, "500 seeded 4-node Markov draws: every d-separation is an exact CI"):
        dags = list(all_dags(4))
        failures = 0
        for draw in range(500):
            nodes, edges = dags[(draw * 7919) % len(dags)]
            g = Dag(nodes, edges)
            p = random_compatible(g, [Alphabet(v, ("0", "1")) for v in nodes], seed=[2, draw], grid=10)
            table = p.table()
            for c in all_d_separations(g):
                if not (is_conditionally_independent(p, c) and ci_holds(table, p.variables, c.s1, c.s2, c.z)):
                    failures += 1
        assert failures == 0


def test_c3_chsh():
    with criterion(3, "CHSH bound 2 over 16 vertices; PR box 4 and outside; uniform box inside"):
        v = chsh_vertices()
        assert len(v) == 16
        best = max(sum((-1) ** (f[x] ^ g[y] ^ (x & y)) for x in (0, 1) for y in (0, 1))
                   for f in itertools.product((0, 1), repeat=2) for g in itertools.product((0, 1), repeat=2))
        assert classical_bound(chsh_functional(), v) == best == 2
        assert evaluate_inequality(pr_box(), chsh_functional()).value == 4
        out = is_factorisable(pr_box(), v)
        assert not out.inside and out.exact and out.value > out.witness.bound
        assert certificate_holds(pr_box(), v, out)
        ins = is_factorisable(uniform_box(), v)
        assert ins.inside and certificate_holds(uniform_box(), v, ins)


def test_c4_kcbs():
    with criterion(4, "KCBS: global max 4 of 5; anticorrelated box outside global, inside pairs"):
        p = kcbs_anticorrelated()
        glob = vertices_for(p, GLOBAL)
        assert len(glob) == 32
        brute = max(sum(s[i] != s[(i + 1) % 5] for i in range(5)) for s in itertools.product((0, 1), repeat=5))
        assert classical_bound(kcbs_functional(), glob) == brute == 4
        assert evaluate_inequality(p, kcbs_functional()).value == 5
        out = is_factorisable(p, glob)
        assert not out.inside and certificate_holds(p, glob, out)
        pairs = vertices_for(p, PAIRS)
        ins = is_factorisable(p, pairs)
        assert ins.inside and certificate_holds(p, pairs, ins)


@pytest.fixture(scope="module")
def full_report():
    jobs = int(os.environ.get("NOFINETUNE_JOBS", os.cpu_count() or 1))
    return verify_theorem1(Theorem1Config(jobs=jobs))


def test_c5_theorem1(full_report):
    with criterion(5, "full candidate space: zero `other`, all survivors 50/50 factorisable, golden-stable"):
        r = full_report
        assert r.class_counts["other"] == 0
        assert all(s.numeric_trials == 50 and s.all_factorisable for s in r.survivors)
        assert r.theorem_holds
        assert sum(r.excluded_per_step.values()) + len(r.survivors) == r.total_candidates
        assert r.dumps() == GOLDEN.read_text()


def test_c6_settings_correlations(full_report):
    with criterion(6, "survivors with X-Y direct links and X-Y common causes exist and are factorisable"):
        direct = [s for s in full_report.survivors if has_xy_direct_link(s)]
        common = [s for s in full_report.survivors if has_xy_common_cause(s)]
        assert any(("X", "Y") in s.dag.edges for s in direct)
        assert any(("Y", "X") in s.dag.edges for s in direct)
        assert common
        assert all(s.all_factorisable for s in direct + common)


def test_c7_fine_tuning_witness():
    with criterion(7, "signalling PR model: PR box, ND holds, CHSH 4, not faithful via (B|X|Y)"):
        p = signalling_pr_phenomenon()
        assert p.dist == pr_box().dist
        assert no_disturbance(p).holds
        assert evaluate_inequality(p, chsh_functional()).value == 4
        r = is_faithful(one_bit_signalling_pr_model(), p)
        assert not r.faithful
        assert CIStatement.of("B", "X", "Y") in r.fine_tuned_cis


def test_c8_tsirelson():
    with criterion(8, "Tsirelson box: CHSH 2*sqrt(2) within 1e-9; float LP outside, margin > 0.5"):
        t = tsirelson_box()
        assert abs(evaluate_inequality(t, chsh_functional()).value - 2 * math.sqrt(2)) <= 1e-9
        r = is_factorisable(t, chsh_vertices())
        assert not r.inside and r.margin > 0.5
