"""Local / noncontextual polytope membership and inequality evaluation.

Two vertex kinds are available. ``pairs`` vertices are independent response
functions ``f`` for the ``A`` slot and ``g`` for the ``B`` slot, so a vertex
answers ``(f(x), g(y))`` on setting ``(x, y)``. ``global`` vertices are a
single assignment ``s`` of outcomes to measurements, answering
``(s(x), s(y))``. They coincide on Bell scenarios whose slots draw from
disjoint measurement sets and differ when one measurement can occupy both
slots, as in the KCBS cycle.

Membership in exact mode is decided by the rational simplex in
:mod:`nofinetune.simplex`; both certificates are re-checked with independent
arithmetic before a result is returned.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import ExplosionError, UnknownMeasurementError
from .prob import Alphabet, JointDistribution
from .scenario import MeasurementScenario, Phenomenon, chsh_scenario, kcbs_scenario
from .serialize import rational_from_str, rational_to_str
from .simplex import solve_feasibility

PAIRS = "pairs"
GLOBAL = "global"
VERTEX_LIMIT = 10 ** 6


@dataclass(frozen=True)
class VertexSet:
    """Deterministic strategies in canonical (lexicographic) order.

    A pairs vertex is the tuple ``f(a_domain) + g(b_domain)``; a global vertex
    is ``s(a_domain)`` with ``b_domain == a_domain``.
    """

    kind: str
    outcomes: tuple[str, ...]
    a_domain: tuple[str, ...]
    b_domain: tuple[str, ...]
    vertices: tuple[tuple[str, ...], ...]
    _a_pos: dict = field(init=False, repr=False, compare=False)
    _b_pos: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_a_pos", {m: i for i, m in enumerate(self.a_domain)})
        offset = len(self.a_domain) if self.kind == PAIRS else 0
        object.__setattr__(self, "_b_pos", {m: offset + i for i, m in enumerate(self.b_domain)})

    def __len__(self):
        return len(self.vertices)

    def response(self, vertex: tuple[str, ...], x: str, y: str) -> tuple[str, str]:
        try:
            return vertex[self._a_pos[x]], vertex[self._b_pos[y]]
        except KeyError as e:
            raise UnknownMeasurementError(f"setting {e.args[0]!r} is outside the vertex domain") from None

    def describe(self, vertex: tuple[str, ...]) -> dict:
        if self.kind == PAIRS:
            return {"A": dict(zip(self.a_domain, vertex[:len(self.a_domain)])),
                    "B": dict(zip(self.b_domain, vertex[len(self.a_domain):]))}
        return {"s": dict(zip(self.a_domain, vertex))}


def build_vertices(s: MeasurementScenario, kind: str = PAIRS, *, a_domain: Sequence[str] | None = None,
                   b_domain: Sequence[str] | None = None, limit: int = VERTEX_LIMIT) -> VertexSet:
    """Enumerate every deterministic strategy of the given kind.

    Pairs vertices default to the full measurement set on both slots; pass
    ``a_domain``/``b_domain`` to restrict each response function to the
    measurements its slot actually uses.
    """
    if kind not in (PAIRS, GLOBAL):
        raise ValueError(f"unknown vertex kind {kind!r}")
    a = tuple(a_domain) if a_domain is not None else s.measurements
    b = tuple(b_domain) if b_domain is not None else s.measurements
    for m in a + b:
        if m not in s.measurements:
            raise UnknownMeasurementError(f"{m!r} is not a measurement of the scenario")
    if kind == GLOBAL:
        if a_domain is not None or b_domain is not None:
            a = tuple(m for m in s.measurements if m in set(a) | set(b))
        b = a
    width = len(a) + len(b) if kind == PAIRS else len(a)
    count = len(s.outcomes) ** width
    if count > limit:
        raise ExplosionError(f"{count} vertices exceeds the enumeration limit {limit}")
    vertices = tuple(itertools.product(s.outcomes, repeat=width))
    return VertexSet(kind, s.outcomes, a, b, vertices)


def slot_domains(p: Phenomenon) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Measurements used with positive weight in the X and in the Y slot."""
    used = p.defined_settings()
    ms = p.scenario.measurements
    return (tuple(m for m in ms if any(x == m for x, _ in used)),
            tuple(m for m in ms if any(y == m for _, y in used)))


def vertices_for(p: Phenomenon, kind: str = PAIRS, limit: int = VERTEX_LIMIT) -> VertexSet:
    """Vertex set restricted to the measurements the phenomenon actually uses."""
    a, b = slot_domains(p)
    return build_vertices(p.scenario, kind, a_domain=a, b_domain=b, limit=limit)


@dataclass(frozen=True)
class Inequality:
    """``sum c(a,b,x,y) P(ab|xy) <= bound``; keys are ``(a, b, x, y)`` label tuples."""

    coefficients: Mapping[tuple[str, str, str, str], Fraction | float]
    bound: Fraction | float

    def to_json(self) -> dict:
        def enc(v):
            return rational_to_str(v) if isinstance(v, (int, Fraction)) else float(v)
        return {
            "coefficients": [{"a": a, "b": b, "x": x, "y": y, "c": enc(c)}
                             for (a, b, x, y), c in sorted(self.coefficients.items())],
            "bound": enc(self.bound),
        }

    @classmethod
    def from_json(cls, obj) -> "Inequality":
        def dec(v):
            return float(v) if isinstance(v, float) else rational_from_str(v)
        coeffs = {}
        for e in obj["coefficients"]:
            key = (str(e["a"]), str(e["b"]), str(e["x"]), str(e["y"]))
            coeffs[key] = coeffs.get(key, 0) + dec(e["c"])
        return cls(coeffs, dec(obj["bound"]))


@dataclass(frozen=True)
class Evaluation:
    value: Fraction | float
    bound: Fraction | float
    violated: bool


def _entry(p: Phenomenon, cache: dict, a, b, x, y):
    if (x, y) not in cache:
        cache[(x, y)] = p.conditional(x, y)
    d = p.dist
    return cache[(x, y)][d.alphabet("A").index(a), d.alphabet("B").index(b)]


def evaluate_inequality(p: Phenomenon, i: Inequality) -> Evaluation:
    """``sum c P(ab|xy)``; raises :class:`UndefinedConditional` on a zero-weight setting."""
    cache = {}
    value = Fraction(0) if p.exact else 0.0
    for (a, b, x, y), c in i.coefficients.items():
        if c == 0:
            continue
        value += c * _entry(p, cache, a, b, x, y)
    if not p.exact:
        value = float(value)
    return Evaluation(value, i.bound, bool(value > i.bound))


def classical_bound(i: Inequality, v: VertexSet):
    """Maximum of the functional over the vertices (brute force)."""
    best = None
    for vertex in v.vertices:
        total = 0
        for (a, b, x, y), c in i.coefficients.items():
            if v.response(vertex, x, y) == (a, b):
                total += c
        if best is None or total > best:
            best = total
    return best


@dataclass(frozen=True)
class MembershipResult:
    inside: bool
    weights: dict | None = None
    witness: Inequality | None = None
    value: Fraction | float | None = None
    margin: Fraction | float | None = None
    exact: bool = True

    def to_json(self, v: VertexSet | None = None) -> dict:
        def enc(q):
            return rational_to_str(q) if self.exact else float(q)
        out = {"inside": self.inside, "mode": "exact" if self.exact else "float"}
        if self.weights is not None:
            out["weights"] = [
                {"vertex": v.describe(vx) if v is not None else list(vx), "weight": enc(w)}
                for vx, w in self.weights.items()
            ]
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
            out["value"] = enc(self.value)
            out["margin"] = enc(self.margin)
        return out


def _constraint_rows(p: Phenomenon, v: VertexSet):
    """Rows ``(a, b, x, y)`` for every defined setting, and the 0/1 vertex matrix."""
    outs_a = p.dist.alphabet("A").values
    outs_b = p.dist.alphabet("B").values
    keys = []
    rhs = []
    for x, y in p.defined_settings():
        cond = p.conditional(x, y)
        for ia, a in enumerate(outs_a):
            for ib, b in enumerate(outs_b):
                keys.append((a, b, x, y))
                rhs.append(cond[ia, ib])
    matrix = [[1 if v.response(vx, x, y) == (a, b) else 0 for vx in v.vertices]
              for (a, b, x, y) in keys]
    return keys, matrix, rhs


def is_factorisable(p: Phenomenon, v: VertexSet) -> MembershipResult:
    """Is ``P(ab|xy)`` a convex mixture of the vertices on every defined setting?

    Exact phenomena are decided by rational simplex; an inside verdict carries
    mixture weights (lexicographic vertex order, zeros omitted), an outside
    verdict carries a separating inequality whose coefficients are scaled to
    max |c| = 1. Float phenomena go through a floating-point LP.
    """
    keys, matrix, rhs = _constraint_rows(p, v)
    if not p.exact:
        return _float_membership(p, v, keys, matrix, rhs)
    A = matrix + [[1] * len(v.vertices)]
    b = rhs + [Fraction(1)]
    res = solve_feasibility(A, b)
    if res.feasible:
        weights = {vx: w for vx, w in zip(v.vertices, res.x) if w}
        result = MembershipResult(True, weights=weights)
        if not certificate_holds(p, v, result):
            raise ArithmeticError("mixture certificate failed verification")
        return result
    y = res.farkas[:-1]
    scale = max(abs(c) for c in y)
    coeffs = {k: c / scale for k, c in zip(keys, y) if c}
    return _outside(p, v, coeffs)


def _outside(p, v, coeffs):
    ineq = Inequality(coeffs, 0)
    bound = classical_bound(ineq, v)
    ineq = Inequality(coeffs, bound)
    value = evaluate_inequality(p, ineq).value
    result = MembershipResult(False, witness=ineq, value=value, margin=value - bound, exact=p.exact)
    if not certificate_holds(p, v, result):
        raise ArithmeticError("separating witness failed verification")
    return result


def certificate_holds(p: Phenomenon, v: VertexSet, r: MembershipResult, tol: float = 0.0) -> bool:
    """Re-check a membership certificate from scratch.

    Inside: weights are nonnegative, sum to one and reproduce every defined
    ``P(ab|xy)``. Outside: the witness value on ``p`` strictly exceeds the
    witness maximum over all vertices.
    """
    if r.inside:
        if r.weights is None:
            return False
        if any(w < -tol for w in r.weights.values()):
            return False
        if abs(sum(r.weights.values()) - 1) > tol:
            return False
        outs_a = p.dist.alphabet("A").values
        outs_b = p.dist.alphabet("B").values
        for x, y in p.defined_settings():
            cond = p.conditional(x, y)
            mix = {}
            for vx, w in r.weights.items():
                ab = v.response(vx, x, y)
                mix[ab] = mix.get(ab, 0) + w
            for ia, a in enumerate(outs_a):
                for ib, b in enumerate(outs_b):
                    if abs(mix.get((a, b), 0) - cond[ia, ib]) > tol:
                        return False
        return True
    if r.witness is None:
        return False
    top = max(sum((c for (a, b, x, y), c in r.witness.coefficients.items()
                   if v.response(vx, x, y) == (a, b)), 0) for vx in v.vertices)
    value = evaluate_inequality(p, r.witness).value
    return value > top + tol


def _float_membership(p, v, keys, matrix, rhs):
    from scipy.optimize import linprog, nnls

    eps = p.dist.eps
    M = np.array(matrix, dtype=float)
    pv = np.array(rhs, dtype=float)
    nrows, nverts = M.shape
    # maximise w.p - t  s.t.  w.vertex <= t,  -1 <= w <= 1
    c = np.concatenate([-pv, [1.0]])
    A_ub = np.hstack([M.T, -np.ones((nverts, 1))])
    bounds = [(-1.0, 1.0)] * nrows + [(None, None)]
    sep = linprog(c, A_ub=A_ub, b_ub=np.zeros(nverts), bounds=bounds, method="highs")
    if not sep.success:
        raise ArithmeticError(f"separation LP failed: {sep.message}")
    margin = -sep.fun
    if margin > eps:
        w = sep.x[:nrows]
        coeffs = {k: float(c) for k, c in zip(keys, w) if abs(c) > 1e-12}
        return _outside(p, v, coeffs)
    A = np.vstack([M, np.ones((1, nverts))])
    sol, _ = nnls(A, np.concatenate([pv, [1.0]]))
    weights = {vx: float(w) for vx, w in zip(v.vertices, sol) if w > 1e-12}
    return MembershipResult(True, weights=weights, exact=False)


# canonical phenomena and functionals ---------------------------------------

BITS = ("0", "1")


def phenomenon_from_conditionals(s: MeasurementScenario, settings: Mapping[tuple[str, str], object],
                                 cond, *, x_values: Sequence[str] | None = None,
                                 y_values: Sequence[str] | None = None, exact: bool = True,
                                 eps: float = 1e-9) -> Phenomenon:
    """Assemble ``P(abxy) = P(xy) cond(a, b, x, y)`` over the scenario."""
    xs = tuple(x_values) if x_values is not None else s.measurements
    ys = tuple(y_values) if y_values is not None else s.measurements
    alphabets = [Alphabet("A", s.outcomes), Alphabet("B", s.outcomes), Alphabet("X", xs), Alphabet("Y", ys)]
    table = {}
    for (x, y), pxy in settings.items():
        for a in s.outcomes:
            for b in s.outcomes:
                table[(a, b, x, y)] = pxy * cond(a, b, x, y)
    return Phenomenon(s, JointDistribution.from_table(alphabets, table, exact=exact, eps=eps))


def _chsh_settings():
    return {(x, y): Fraction(1, 4) for x in ("x0", "x1") for y in ("y0", "y1")}


def _bit(label: str) -> int:
    return int(label[-1])


def pr_box() -> Phenomenon:
    """``a XOR b = x AND y`` with uniform marginals and uniform settings."""
    def cond(a, b, x, y):
        return Fraction(1, 2) if (int(a) ^ int(b)) == (_bit(x) & _bit(y)) else Fraction(0)
    return phenomenon_from_conditionals(chsh_scenario(), _chsh_settings(), cond,
                                        x_values=("x0", "x1"), y_values=("y0", "y1"))


def uniform_box() -> Phenomenon:
    return phenomenon_from_conditionals(chsh_scenario(), _chsh_settings(), lambda a, b, x, y: Fraction(1, 4),
                                        x_values=("x0", "x1"), y_values=("y0", "y1"))


def tsirelson_box(eps: float = 1e-9) -> Phenomenon:
    """Float-mode box with correlators ``(-1)^(xy) / sqrt(2)``."""
    def cond(a, b, x, y):
        corr = (-1) ** (_bit(x) & _bit(y)) / math.sqrt(2)
        return (1 + (-1) ** (int(a) ^ int(b)) * corr) / 4
    settings = {k: 0.25 for k in _chsh_settings()}
    return phenomenon_from_conditionals(chsh_scenario(), settings, cond, x_values=("x0", "x1"),
                                        y_values=("y0", "y1"), exact=False, eps=eps)


def chsh_functional() -> Inequality:
    """``E00 + E01 + E10 - E11 <= 2`` written on the entries ``P(ab|xy)``."""
    coeffs = {}
    for x in ("x0", "x1"):
        for y in ("y0", "y1"):
            for a in BITS:
                for b in BITS:
                    sign = (-1) ** ((int(a) ^ int(b)) + (_bit(x) & _bit(y)))
                    coeffs[(a, b, x, y)] = Fraction(sign)
    return Inequality(coeffs, Fraction(2))


def chsh_vertices() -> VertexSet:
    return build_vertices(chsh_scenario(), PAIRS, a_domain=("x0", "x1"), b_domain=("y0", "y1"))


def _kcbs_settings(n=5):
    return {(f"m{i}", f"m{(i + 1) % n}"): Fraction(1, n) for i in range(n)}


def kcbs_anticorrelated() -> Phenomenon:
    """Every KCBS context perfectly anticorrelated with uniform outcomes; X = m_i, Y = m_(i+1)."""
    def cond(a, b, x, y):
        return Fraction(1, 2) if a != b else Fraction(0)
    return phenomenon_from_conditionals(kcbs_scenario(), _kcbs_settings(), cond)


def kcbs_functional() -> Inequality:
    """Number of anticorrelated contexts; at most 4 for a global assignment on the 5-cycle."""
    coeffs = {}
    for x, y in _kcbs_settings():
        for a in BITS:
            for b in BITS:
                coeffs[(a, b, x, y)] = Fraction(1 if a != b else 0)
    return Inequality(coeffs, Fraction(4))
