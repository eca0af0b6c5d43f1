"""Exhaustive machine check of "no fine-tuning + no-disturbance => factorisable".

The candidate space is every causal structure over the observables
``A, B, X, Y`` built from

* a direct-edge choice (none, forward, backward) for each of the six pairs,
  kept only when the observed edges are acyclic, and
* an optional latent common cause for each subset of size 2, 3 or 4, each
  latent being a root pointing at exactly its subset.

Latent intermediaries, latent common effects and latent-to-latent edges are
not generated: they do not change the set of compatible observable
distributions.

Every candidate is filtered by the two d-separations a faithful model of a
no-disturbance phenomenon needs, ``(A _||_ Y | X)_d`` and ``(B _||_ X | Y)_d``.
Excluded candidates are attributed to the first elimination step whose
structural pattern they match; survivors are matched against the
d-separation pattern that makes them factorisable and are then checked
numerically with random exact models and the exact polytope test.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .dag import LATENT, Dag, Node, closure_masks, d_reachable, d_separated
from .polytope import chsh_vertices, is_factorisable
from .prob import Alphabet, marginalize, random_compatible
from .scenario import OBSERVABLES, Phenomenon, chsh_scenario, no_disturbance

PAIRS = (("A", "B"), ("A", "X"), ("A", "Y"), ("B", "X"), ("B", "Y"), ("X", "Y"))
NONE, FWD, BACK = 0, 1, 2
LATENT_SETS = tuple(
    s for k in (2, 3, 4) for s in itertools.combinations(OBSERVABLES, k)
)
STEPS = ("step1", "step2a", "step2b", "step3", "step4")
PROOF_CLASSES = ("step2c-class", "step3-class", "step5-i", "step5-ii", "step5-iii", "other")

_IDX = {n: i for i, n in enumerate(OBSERVABLES)}


def latent_name(members: Sequence[str]) -> str:
    return "L_" + "".join(members)


@dataclass(frozen=True)
class CandidateSpace:
    """Which ingredients the enumeration may use.

    ``xy_links=False`` forbids any edge or latent joining ``X`` and ``Y``,
    which restricts the check to Bell-type settings structures.
    """

    pair_latents: bool = True
    higher_latents: bool = True
    xy_links: bool = True

    def latent_sets(self) -> tuple[tuple[str, ...], ...]:
        out = []
        for s in LATENT_SETS:
            if len(s) == 2 and not self.pair_latents:
                continue
            if len(s) > 2 and not self.higher_latents:
                continue
            if not self.xy_links and "X" in s and "Y" in s:
                continue
            out.append(s)
        return tuple(out)


@dataclass(frozen=True)
class Candidate:
    """One point of the candidate space: pair links plus activated latent subsets."""

    links: tuple[int, ...]
    latents: tuple[tuple[str, ...], ...]

    @property
    def code(self) -> int:
        """Stable integer id: base-3 link digits, then one bit per latent subset."""
        c = 0
        for d in reversed(self.links):
            c = c * 3 + d
        bits = sum(1 << LATENT_SETS.index(s) for s in self.latents)
        return c + 729 * bits

    def observed_edges(self) -> list[tuple[str, str]]:
        return list(_edges_of(self.links))

    def has_edge(self, u: str, v: str) -> bool:
        return (u, v) in _edges_of(self.links)

    def has_latent(self, *members: str) -> bool:
        return tuple(sorted(members, key=_IDX.get)) in self.latents

    def linked(self, u: str, v: str) -> bool:
        return self.has_edge(u, v) or self.has_edge(v, u) or self.has_latent(u, v)

    def dag(self) -> Dag:
        nodes = [Node(n) for n in OBSERVABLES] + [Node(latent_name(s), LATENT) for s in self.latents]
        edges = self.observed_edges() + [(latent_name(s), m) for s in self.latents for m in s]
        return Dag(nodes, edges)

    def label(self) -> str:
        parts = [f"{u}->{v}" for u, v in self.observed_edges()]
        parts += [f"L[{''.join(s)}]" for s in self.latents]
        return " ".join(parts) if parts else "(empty)"


@lru_cache(maxsize=None)
def _edges_of(links: tuple[int, ...]) -> tuple[tuple[str, str], ...]:
    out = []
    for (u, v), d in zip(PAIRS, links):
        if d == FWD:
            out.append((u, v))
        elif d == BACK:
            out.append((v, u))
    return tuple(out)


def _acyclic_link_patterns(xy_links: bool) -> list[tuple[int, ...]]:
    out = []
    for links in itertools.product((NONE, FWD, BACK), repeat=len(PAIRS)):
        if not xy_links and links[-1] != NONE:
            continue
        parents = [0] * 4
        for (u, v), d in zip(PAIRS, links):
            if d == FWD:
                parents[_IDX[v]] |= 1 << _IDX[u]
            elif d == BACK:
                parents[_IDX[u]] |= 1 << _IDX[v]
        if closure_masks(parents) is not None:
            out.append(links)
    return out


def iter_candidates(space: CandidateSpace = CandidateSpace()) -> Iterator[Candidate]:
    """Candidates in canonical order: link pattern major, latent subsets minor."""
    sets = space.latent_sets()
    for links in _acyclic_link_patterns(space.xy_links):
        for bits in range(1 << len(sets)):
            yield Candidate(links, tuple(s for i, s in enumerate(sets) if bits >> i & 1))


def enumerate_candidates(space: CandidateSpace = CandidateSpace()) -> Iterator[Dag]:
    for c in iter_candidates(space):
        yield c.dag()


@lru_cache(maxsize=None)
def _pattern_masks(links: tuple[int, ...]):
    """Parent, child and ancestor masks of the observed part of a link pattern."""
    parents = [0] * 4
    for (u, v), d in zip(PAIRS, links):
        if d == FWD:
            parents[_IDX[v]] |= 1 << _IDX[u]
        elif d == BACK:
            parents[_IDX[u]] |= 1 << _IDX[v]
    children = [sum(1 << v for v in range(4) if parents[v] >> u & 1) for u in range(4)]
    anc, _ = closure_masks(parents)
    return parents, children, anc


def _failing_nd_dseps(c: Candidate) -> tuple[str, ...]:
    """Names of the required d-separations the candidate violates (bitmask fast path).

    Latents are roots, so a latent is an ancestor of an observed node exactly
    when one of its members is that node or one of its observed ancestors.
    """
    obs_parents, obs_children, obs_anc = _pattern_masks(c.links)
    members = [sum(1 << _IDX[m] for m in s) for s in c.latents]
    parents = list(obs_parents) + [0] * len(members)
    children = list(obs_children) + members
    anc = list(obs_anc) + [0] * len(members)
    for j, mm in enumerate(members):
        bit = 1 << (4 + j)
        for v in range(4):
            if mm >> v & 1:
                parents[v] |= bit
            if mm & (obs_anc[v] | 1 << v):
                anc[v] |= bit
    failing = []
    if d_reachable(parents, children, anc, 1, 4) & 8:
        failing.append("(A _||_ Y | X)")
    if d_reachable(parents, children, anc, 2, 8) & 4:
        failing.append("(B _||_ X | Y)")
    return tuple(failing)


def filter_by_nd(dags: Iterable[Dag]) -> Iterator[Dag]:
    """Keep the DAGs with ``(A _||_ Y | X)_d`` and ``(B _||_ X | Y)_d``."""
    for g in dags:
        if d_separated(g, ["A"], ["Y"], ["X"]) and d_separated(g, ["B"], ["X"], ["Y"]):
            yield g


def elimination_step(c: Candidate) -> str | None:
    """First elimination step whose structural pattern matches the candidate.

    Each pattern is a sufficient condition for violating one of the two
    required d-separations; None means no step describes the candidate.
    """
    e, lat, linked = c.has_edge, c.has_latent, c.linked
    if linked("A", "Y") or linked("B", "X") or any(len(s) > 2 for s in c.latents):
        return "step1"
    if (e("A", "B") and (linked("A", "X") or e("B", "Y"))) or \
            (e("B", "A") and (linked("B", "Y") or e("A", "X"))):
        return "step2a"
    if (e("A", "B") and lat("B", "Y") and (e("X", "Y") or lat("X", "Y"))) or \
            (e("B", "A") and lat("A", "X") and (e("Y", "X") or lat("X", "Y"))):
        return "step2b"
    if (e("A", "X") and (lat("A", "B") or e("Y", "X") or lat("X", "Y")
                         or ((lat("B", "Y") or e("B", "Y")) and e("X", "Y")))) or \
            (e("B", "Y") and (lat("A", "B") or e("X", "Y") or lat("X", "Y")
                              or ((lat("A", "X") or e("A", "X")) and e("Y", "X")))):
        return "step3"
    if (lat("A", "X") and (lat("X", "Y") or e("Y", "X"))) or \
            (lat("B", "Y") and (lat("X", "Y") or e("X", "Y"))):
        return "step4"
    return None


def _common_cause_latents(g: Dag, *targets: str) -> list[str]:
    return [n for n in g.latent() if set(targets) <= g.children(n)]


def classify_survivor(g: Dag) -> str:
    """Match a surviving DAG against the d-separation pattern that proves it factorisable.

    * direct ``A -> B``: ``(AB _||_ X | Y)_d`` and ``(A _||_ Y)_d`` (mirrored for ``B -> A``);
    * direct ``A -> X`` or ``B -> Y``: ``(B _||_ AX | Y)_d`` and ``(A _||_ Y | X)_d``
      (mirrored);
    * otherwise, with ``L`` the latent common causes of ``A`` and ``B``:
      ``(A _||_ BY | X L)_d``, ``(B _||_ AX | Y L)_d`` and ``(L _||_ XY)_d``.
      Sub-class i has a latent over ``{A, X}``, ii one over ``{B, Y}``, iii neither.
    """
    E = g.edges

    def sep(s1, s2, z=()):
        return d_separated(g, s1, s2, z)

    if ("A", "B") in E:
        ok = sep("AB", "X", "Y") and sep("A", "Y")
        return "step2c-class" if ok else "other"
    if ("B", "A") in E:
        ok = sep("AB", "Y", "X") and sep("B", "X")
        return "step2c-class" if ok else "other"
    if ("A", "X") in E or ("B", "Y") in E:
        ok = (("A", "X") in E and sep("B", "AX", "Y") and sep("A", "Y", "X")) or \
             (("B", "Y") in E and sep("A", "BY", "X") and sep("B", "X", "Y"))
        return "step3-class" if ok else "other"
    lam = _common_cause_latents(g, "A", "B")
    ok = sep("A", "BY", ["X", *lam]) and sep("B", "AX", ["Y", *lam]) and \
        (not lam or sep(lam, "XY"))
    if not ok:
        return "other"
    if _common_cause_latents(g, "A", "X"):
        return "step5-i"
    if _common_cause_latents(g, "B", "Y"):
        return "step5-ii"
    return "step5-iii"


@dataclass(frozen=True)
class SurvivorRecord:
    dag: Dag
    proof_class: str
    numeric_trials: int
    all_factorisable: bool
    nd_failures: int = 0
    label: str = ""
    code: int | None = None

    def to_json(self) -> dict:
        out = {
            "label": self.label,
            "edges": [list(e) for e in sorted(self.dag.edges)],
            "latents": list(self.dag.latent()),
            "proof_class": self.proof_class,
            "numeric_trials": self.numeric_trials,
            "all_factorisable": self.all_factorisable,
            "nd_failures": self.nd_failures,
        }
        if self.code is not None:
            out["code"] = self.code
        return out


def numeric_alphabets(g: Dag, latent_card: int) -> list[Alphabet]:
    out = []
    for n in g.names:
        if n in ("A", "B"):
            out.append(Alphabet(n, ("0", "1")))
        elif n == "X":
            out.append(Alphabet(n, ("x0", "x1")))
        elif n == "Y":
            out.append(Alphabet(n, ("y0", "y1")))
        else:
            out.append(Alphabet(n, tuple(str(i) for i in range(latent_card))))
    return out


def verify_survivor_numeric(g: Dag, trials: int = 50, seed=0, latent_card: int = 4,
                            grid: int = 100) -> SurvivorRecord:
    """Draw ``trials`` random exact models on ``g`` and test each phenomenon for factorisability.

    Observables are binary, settings are read as a CHSH-type scenario and the
    test uses pairs vertices. Draws whose phenomenon violates no-disturbance
    are counted in ``nd_failures``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    base = list(seed) if isinstance(seed, (list, tuple)) else [int(seed)]
    alphabets = numeric_alphabets(g, latent_card)
    scenario = chsh_scenario()
    vertices = chsh_vertices()
    inside = True
    nd_failures = 0
    for t in range(trials):
        joint = random_compatible(g, alphabets, base + [t], grid)
        ph = Phenomenon(scenario, marginalize(joint, OBSERVABLES))
        if not no_disturbance(ph).holds:
            nd_failures += 1
        if not is_factorisable(ph, vertices).inside:
            inside = False
    return SurvivorRecord(g, classify_survivor(g), trials, inside, nd_failures)


@dataclass(frozen=True)
class Theorem1Config:
    seed: int = 0
    trials: int = 50
    latent_card: int = 4
    grid: int = 100
    space: CandidateSpace = field(default_factory=CandidateSpace)
    numeric: bool = True
    jobs: int = 1

    def to_json(self) -> dict:
        # jobs is deliberately absent: reports must not depend on it
        return {
            "seed": self.seed,
            "trials": self.trials if self.numeric else 0,
            "latent_card": self.latent_card,
            "grid": self.grid,
            "space": asdict(self.space),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Theorem1Config":
        obj = dict(obj)
        space = CandidateSpace(**obj.pop("space", {}))
        return cls(space=space, **obj)


@dataclass(frozen=True)
class VerificationReport:
    config: Theorem1Config
    total_candidates: int
    excluded_per_step: dict
    failing_dseps: dict
    survivors: list[SurvivorRecord]
    theorem_holds: bool

    @property
    def class_counts(self) -> dict:
        counts = {c: 0 for c in PROOF_CLASSES}
        for s in self.survivors:
            counts[s.proof_class] += 1
        return counts

    def to_json(self) -> dict:
        return {
            "config": self.config.to_json(),
            "total_candidates": self.total_candidates,
            "excluded_per_step": dict(self.excluded_per_step),
            "excluded_total": sum(self.excluded_per_step.values()),
            "failing_dseps": dict(self.failing_dseps),
            "survivor_count": len(self.survivors),
            "class_counts": self.class_counts,
            "theorem_holds": self.theorem_holds,
            "survivors": [s.to_json() for s in self.survivors],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1, sort_keys=True) + "\n"

    def table(self) -> str:
        lines = [f"candidates examined      {self.total_candidates:>9}"]
        for step, n in self.excluded_per_step.items():
            lines.append(f"  excluded at {step:<12}{n:>9}")
        lines.append(f"survivors                {len(self.survivors):>9}")
        for cls, n in self.class_counts.items():
            lines.append(f"  {cls:<22}{n:>9}")
        if self.config.numeric:
            bad = sum(1 for s in self.survivors if not s.all_factorisable)
            lines.append(f"numeric trials/survivor  {self.config.trials:>9}")
            lines.append(f"  survivors with a nonlocal draw {bad:>3}")
        lines.append(f"theorem holds            {str(self.theorem_holds):>9}")
        return "\n".join(lines)


def _numeric_task(args):
    code, label, dag_json, trials, seed, latent_card, grid = args
    rec = verify_survivor_numeric(Dag.from_json(dag_json), trials, [seed, code], latent_card, grid)
    return rec.all_factorisable, rec.nd_failures


def verify_theorem1(config: Theorem1Config = Theorem1Config()) -> VerificationReport:
    """Enumerate, filter, classify and numerically verify every candidate."""
    total = 0
    excluded = {s: 0 for s in STEPS}
    excluded["unattributed"] = 0
    failing = {}
    survivors = []
    for c in iter_candidates(config.space):
        total += 1
        fails = _failing_nd_dseps(c)
        if fails:
            key = " & ".join(fails)
            failing[key] = failing.get(key, 0) + 1
            excluded[elimination_step(c) or "unattributed"] += 1
            continue
        g = c.dag()
        survivors.append(SurvivorRecord(g, classify_survivor(g), 0, True, 0, c.label(), c.code))

    if config.numeric:
        tasks = [(s.code, s.label, s.dag.to_json(), config.trials, config.seed, config.latent_card, config.grid)
                 for s in survivors]
        if config.jobs > 1:
            with ProcessPoolExecutor(max_workers=config.jobs) as pool:
                results = list(pool.map(_numeric_task, tasks, chunksize=4))
        else:
            results = [_numeric_task(t) for t in tasks]
        survivors = [SurvivorRecord(s.dag, s.proof_class, config.trials, ok, nd, s.label, s.code)
                     for s, (ok, nd) in zip(survivors, results)]

    holds = all(s.proof_class != "other" and s.all_factorisable for s in survivors)
    return VerificationReport(config, total, excluded, dict(sorted(failing.items())), survivors, holds)


def has_xy_direct_link(s: SurvivorRecord) -> bool:
    return ("X", "Y") in s.dag.edges or ("Y", "X") in s.dag.edges


def has_xy_common_cause(s: SurvivorRecord) -> bool:
    return bool(_common_cause_latents(s.dag, "X", "Y"))
