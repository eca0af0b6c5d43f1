"""Measurement scenarios, phenomena and causal models.

A phenomenon is a joint distribution over the four observable slots
``A, B, X, Y``: ``X`` and ``Y`` take measurement labels, ``A`` and ``B`` take
outcome labels. Slots are ordered; a context ``{m, n}`` may be realised as
``(X=m, Y=n)``, ``(X=n, Y=m)`` or both, with whatever weights the phenomenon
gives them.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .dag import Dag
from .errors import (
    NonBinaryContextError,
    SupportError,
    UndefinedConditional,
    UnknownMeasurementError,
    UnknownVariableError,
)
from .prob import JointDistribution, is_compatible, marginalize
from .serialize import distribution_from_json, distribution_to_json

OBSERVABLES = ("A", "B", "X", "Y")


@dataclass(frozen=True)
class MeasurementScenario:
    """Measurements, a common outcome set and pairwise contexts.

    Contexts are stored as sorted pairs. With ``allow_repeats`` a context may
    pair a measurement with itself (written ``[m, m]``).
    """

    measurements: tuple[str, ...]
    outcomes: tuple[str, ...]
    contexts: frozenset[tuple[str, str]]
    allow_repeats: bool = False

    def compatible(self, x: str, y: str) -> bool:
        return tuple(sorted((x, y))) in self.contexts

    def sorted_contexts(self) -> list[tuple[str, str]]:
        order = {m: i for i, m in enumerate(self.measurements)}
        return sorted(self.contexts, key=lambda c: (order[c[0]], order[c[1]]))

    def to_json(self) -> dict:
        out = {
            "measurements": list(self.measurements),
            "outcomes": list(self.outcomes),
            "contexts": [list(c) for c in self.sorted_contexts()],
        }
        if self.allow_repeats:
            out["allow_repeats"] = True
        return out

    @classmethod
    def from_json(cls, obj) -> "MeasurementScenario":
        return validate_scenario(obj["measurements"], obj["outcomes"], obj["contexts"],
                                 allow_repeats=obj.get("allow_repeats", False))


def validate_scenario(m: Iterable[str], o: Iterable[str], c: Iterable[Iterable[str]], *,
                      allow_repeats: bool = False) -> MeasurementScenario:
    measurements = tuple(str(x) for x in m)
    outcomes = tuple(str(x) for x in o)
    if len(set(measurements)) != len(measurements):
        raise ValueError("repeated measurement label")
    if not outcomes or len(set(outcomes)) != len(outcomes):
        raise ValueError("outcome labels must be nonempty and distinct")
    known = set(measurements)
    contexts = set()
    for ctx in c:
        ctx = [str(x) for x in ctx]
        for x in ctx:
            if x not in known:
                raise UnknownMeasurementError(f"context {ctx} uses unknown measurement {x!r}")
        size = len(set(ctx))
        repeat = allow_repeats and len(ctx) == 2 and size == 1
        if size != 2 and not repeat:
            raise NonBinaryContextError(f"context {ctx} does not contain exactly two measurements")
        contexts.add(tuple(sorted(ctx)))
    return MeasurementScenario(measurements, outcomes, frozenset(contexts), allow_repeats)


@dataclass(frozen=True)
class BellPartition:
    parts: tuple[tuple[str, ...], ...]


def is_bell_scenario(s: MeasurementScenario, k: int = 2) -> BellPartition | None:
    """A k-part partition with no context inside one part, or None.

    Exhaustive backtracking colouring of the compatibility graph; the first
    colouring found in measurement order (smallest colours first) is returned.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    ms = s.measurements
    nbrs = {m: set() for m in ms}
    for x, y in s.contexts:
        if x == y:
            return None
        nbrs[x].add(y)
        nbrs[y].add(x)
    colour = {}

    def assign(i):
        if i == len(ms):
            return True
        m = ms[i]
        used = max(colour.values(), default=-1)
        for c in range(min(k, used + 2)):
            if all(colour.get(n) != c for n in nbrs[m]):
                colour[m] = c
                if assign(i + 1):
                    return True
                del colour[m]
        return False

    if not assign(0):
        return None
    return BellPartition(tuple(tuple(m for m in ms if colour[m] == c) for c in range(k)))


@dataclass(frozen=True, eq=False)
class Phenomenon:
    """Observable distribution over ``A, B, X, Y`` for a scenario.

    ``X``/``Y`` alphabets must be measurements of the scenario and ``A``/``B``
    alphabets its outcomes. Weight on a non-context setting pair raises
    :class:`SupportError`.
    """

    scenario: MeasurementScenario
    dist: JointDistribution

    def __post_init__(self):
        if set(self.dist.variables) != set(OBSERVABLES):
            raise UnknownVariableError(f"phenomenon must be over {OBSERVABLES}, got {self.dist.variables}")
        d = self.dist.transpose(OBSERVABLES)
        object.__setattr__(self, "dist", d)
        for slot in ("X", "Y"):
            for v in d.alphabet(slot).values:
                if v not in self.scenario.measurements:
                    raise UnknownMeasurementError(f"{slot} takes {v!r}, not a measurement of the scenario")
        for slot in ("A", "B"):
            if set(d.alphabet(slot).values) != set(self.scenario.outcomes):
                raise UnknownVariableError(f"{slot} alphabet differs from the scenario's outcome set")
        for (x, y), w in self.setting_weights().items():
            if w > 0 and not self.scenario.compatible(x, y):
                raise SupportError(f"positive weight on setting pair ({x}, {y}), which is not a context")

    @property
    def exact(self) -> bool:
        return self.dist.exact

    def setting_weights(self) -> dict[tuple[str, str], Fraction | float]:
        xy = marginalize(self.dist, ("X", "Y"))
        ax, ay = xy.alphabet("X").values, xy.alphabet("Y").values
        return {(x, y): xy._scalar(xy.weights[i, j])
                for i, x in enumerate(ax) for j, y in enumerate(ay)}

    def defined_settings(self) -> list[tuple[str, str]]:
        """Setting pairs with positive weight, in alphabet order."""
        return [k for k, w in self.setting_weights().items() if w > 0]

    def conditional(self, x: str, y: str) -> np.ndarray:
        """``P(a, b | x, y)`` as an |A| x |B| array (Fractions or floats)."""
        d = self.dist
        i, j = d.alphabet("X").index(x), d.alphabet("Y").index(y)
        block = d.weights[:, :, i, j]
        t = block.sum()
        if not t > 0:
            raise UndefinedConditional(f"P(AB | X={x}, Y={y}) is undefined: setting weight is zero")
        if d.exact:
            out = np.empty(block.shape, dtype=object)
            out.flat[:] = [Fraction(int(w), int(t)) for w in block.flat]
            return out
        return block / t

    def to_json(self) -> dict:
        return {"scenario": self.scenario.to_json(), "distribution": distribution_to_json(self.dist)}

    @classmethod
    def from_json(cls, obj) -> "Phenomenon":
        return cls(MeasurementScenario.from_json(obj["scenario"]), distribution_from_json(obj["distribution"]))


@dataclass(frozen=True)
class Violation:
    variable: str
    setting: tuple[str, str]
    deviation: Fraction | float

    def to_json(self) -> dict:
        return {"variable": self.variable, "setting": list(self.setting), "deviation": str(self.deviation)}


@dataclass(frozen=True)
class NoDisturbanceReport:
    holds: bool
    violations: list[Violation] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"holds": self.holds, "violations": [v.to_json() for v in self.violations]}


def no_disturbance(p: Phenomenon) -> NoDisturbanceReport:
    """Check ``P(A|XY) = P(A|X)`` and ``P(B|XY) = P(B|Y)`` on every defined conditional.

    Each violation records the slot, the setting pair and the largest absolute
    deviation over outcomes.
    """
    d = p.dist
    w = d.weights
    tol = 0 if d.exact else d.eps
    violations = []
    for slot, own_axis in (("A", 0), ("B", 1)):
        # weights of (outcome, x, y) for this slot
        ow = w.sum(axis=1 - own_axis)
        xy = ow.sum(axis=0)
        for i, x in enumerate(d.alphabet("X").values):
            for j, y in enumerate(d.alphabet("Y").values):
                if not xy[i, j] > 0:
                    continue
                if slot == "A":
                    marg, norm = ow[:, i, :].sum(axis=1), xy[i, :].sum()
                else:
                    marg, norm = ow[:, :, j].sum(axis=1), xy[:, j].sum()
                worst = 0
                for a in range(ow.shape[0]):
                    if d.exact:
                        dev = abs(Fraction(int(ow[a, i, j]), int(xy[i, j])) - Fraction(int(marg[a]), int(norm)))
                    else:
                        dev = abs(ow[a, i, j] / xy[i, j] - marg[a] / norm)
                    worst = max(worst, dev)
                if worst > tol:
                    violations.append(Violation(slot, (x, y), worst))
    return NoDisturbanceReport(not violations, violations)


@dataclass(frozen=True, eq=False)
class CausalModel:
    """Latent set, graph over ``{A,B,X,Y} | latents`` and a compatible joint."""

    graph: Dag
    joint: JointDistribution
    check: bool = True

    def __post_init__(self):
        missing = set(OBSERVABLES) - set(self.graph.names)
        if missing:
            raise UnknownVariableError(f"causal model graph lacks {sorted(missing)}")
        if self.check and not is_compatible(self.joint, self.graph):
            raise ValueError("joint distribution is not compatible with the graph")

    @property
    def latents(self) -> tuple[str, ...]:
        return tuple(n for n in self.graph.names if n not in OBSERVABLES)

    def observed_marginal(self) -> JointDistribution:
        return marginalize(self.joint, OBSERVABLES).transpose(OBSERVABLES)

    def to_json(self) -> dict:
        return {"graph": self.graph.to_json(), "distribution": distribution_to_json(self.joint)}

    @classmethod
    def from_json(cls, obj) -> "CausalModel":
        return cls(Dag.from_json(obj["graph"]), distribution_from_json(obj["distribution"]))


def phenomenon_from_model(gamma: CausalModel, s: MeasurementScenario) -> Phenomenon:
    return Phenomenon(s, gamma.observed_marginal())


def chsh_scenario() -> MeasurementScenario:
    return validate_scenario(["x0", "x1", "y0", "y1"], ["0", "1"],
                             [[x, y] for x, y in itertools.product(["x0", "x1"], ["y0", "y1"])])


def cycle_scenario(n: int = 5, outcomes: Sequence[str] = ("0", "1")) -> MeasurementScenario:
    ms = [f"m{i}" for i in range(n)]
    return validate_scenario(ms, outcomes, [[ms[i], ms[(i + 1) % n]] for i in range(n)])


def kcbs_scenario() -> MeasurementScenario:
    return cycle_scenario(5)
