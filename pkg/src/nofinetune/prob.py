"""Exact finite distributions, CI testing and Markov factorisation.

A :class:`JointDistribution` is a dense array over the product of its
alphabets. In exact mode the array holds nonnegative Python integers that are
read as ``weight / total``; marginalising is integer summation and
conditioning is slicing, so no operation ever rounds. Float mode stores float
weights and compares within ``eps``; it exists for externally supplied
approximate tables such as quantum-realisable boxes.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ci import CIStatement, canonical_triples
from .dag import Dag
from .errors import (
    KernelMismatchError,
    NormalizationError,
    UnknownVariableError,
    ZeroProbabilityEvent,
)

DEFAULT_EPS = 1e-9


@dataclass(frozen=True)
class Alphabet:
    variable: str
    values: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(str(v) for v in self.values))
        if not self.values:
            raise ValueError(f"alphabet of {self.variable!r} is empty")
        if len(set(self.values)) != len(self.values):
            raise ValueError(f"alphabet of {self.variable!r} has repeated labels")

    def __len__(self):
        return len(self.values)

    def index(self, value) -> int:
        try:
            return self.values.index(str(value))
        except ValueError:
            raise UnknownVariableError(f"{value!r} is not a value of {self.variable!r}") from None


def _to_integer_weights(probs: np.ndarray) -> np.ndarray:
    flat = [Fraction(v) for v in probs.ravel()]
    denom = functools.reduce(math.lcm, (f.denominator for f in flat), 1)
    ints = np.empty(len(flat), dtype=object)
    ints[:] = [f.numerator * (denom // f.denominator) for f in flat]
    return ints.reshape(probs.shape)


def _is_exact_array(arr: np.ndarray) -> bool:
    return arr.dtype == object


class JointDistribution:
    """Probability table over named finite variables.

    Construct from probabilities with :meth:`from_probs` or :meth:`from_table`.
    The raw constructor takes unnormalised nonnegative weights.
    """

    __slots__ = ("alphabets", "weights", "total", "exact", "eps", "_pos")

    def __init__(self, alphabets: Sequence[Alphabet], weights, *, exact: bool | None = None,
                 eps: float = DEFAULT_EPS):
        alphabets = tuple(alphabets)
        names = [a.variable for a in alphabets]
        if len(set(names)) != len(names):
            raise ValueError(f"repeated variable in {names}")
        w = np.asarray(weights, dtype=object if exact else None)
        if exact is None:
            exact = w.dtype == object or np.issubdtype(w.dtype, np.integer)
        if exact:
            if w.dtype != object or any(not isinstance(v, int) for v in w.flat):
                w = _to_integer_weights(np.asarray(w, dtype=object))
        else:
            w = np.asarray(w, dtype=float)
        shape = tuple(len(a) for a in alphabets)
        if w.shape != shape:
            raise ValueError(f"weights shape {w.shape} does not match alphabets {shape}")
        if any(v < 0 for v in w.flat):
            raise NormalizationError("negative weight")
        total = w.sum() if w.size else (1 if exact else 1.0)
        if not total > 0:
            raise NormalizationError("distribution has zero total weight")
        self.alphabets = alphabets
        self.weights = w
        self.total = int(total) if exact else float(total)
        self.exact = bool(exact)
        self.eps = eps
        self._pos = {a.variable: i for i, a in enumerate(alphabets)}

    @classmethod
    def from_probs(cls, alphabets: Sequence[Alphabet], probs, *, exact: bool | None = None,
                   eps: float = DEFAULT_EPS) -> "JointDistribution":
        """Build from an array of probabilities that must sum to one."""
        arr = np.asarray(probs, dtype=object)
        if exact is None:
            exact = all(isinstance(v, (int, Fraction)) for v in arr.flat)
        if exact:
            arr = np.vectorize(Fraction, otypes=[object])(arr) if arr.size else arr
            if sum(arr.flat, Fraction(0)) != 1:
                raise NormalizationError(f"probabilities sum to {sum(arr.flat, Fraction(0))}, not 1")
            return cls(alphabets, _to_integer_weights(arr), exact=True, eps=eps)
        arr = np.asarray(probs, dtype=float)
        if abs(arr.sum() - 1.0) > eps:
            raise NormalizationError(f"probabilities sum to {arr.sum()!r}, not 1 within {eps}")
        return cls(alphabets, arr, exact=False, eps=eps)

    @classmethod
    def from_table(cls, alphabets: Sequence[Alphabet], table: Mapping[tuple, object], *,
                   exact: bool | None = None, eps: float = DEFAULT_EPS) -> "JointDistribution":
        """Build from ``{assignment tuple: probability}``; missing entries are zero."""
        alphabets = tuple(alphabets)
        shape = tuple(len(a) for a in alphabets)
        arr = np.zeros(shape, dtype=object)
        arr[...] = 0
        for key, p in table.items():
            idx = tuple(a.index(v) for a, v in zip(alphabets, key))
            arr[idx] = p
        return cls.from_probs(alphabets, arr, exact=exact, eps=eps)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(a.variable for a in self.alphabets)

    def alphabet(self, name: str) -> Alphabet:
        return self.alphabets[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self._pos[name]
        except KeyError:
            raise UnknownVariableError(f"unknown variable {name!r}") from None

    def _scalar(self, w):
        return Fraction(int(w), self.total) if self.exact else float(w) / self.total

    def prob(self, assignment: Mapping[str, object]) -> Fraction | float:
        """Probability of a (possibly partial) assignment."""
        return self._scalar(np.sum(_slice(self, assignment)))

    def probs(self) -> np.ndarray:
        if self.exact:
            out = np.empty(self.weights.shape, dtype=object)
            out.flat[:] = [Fraction(int(w), self.total) for w in self.weights.flat]
            return out
        return self.weights / self.total

    def table(self) -> dict[tuple[str, ...], Fraction | float]:
        """``{assignment: probability}`` over every full assignment, in row-major order."""
        out = {}
        for idx in itertools.product(*(range(len(a)) for a in self.alphabets)):
            key = tuple(a.values[i] for a, i in zip(self.alphabets, idx))
            out[key] = self._scalar(self.weights[idx])
        return out

    def support(self) -> list[tuple[str, ...]]:
        return [k for k, v in self.table().items() if v > 0]

    def transpose(self, order: Sequence[str]) -> "JointDistribution":
        axes = [self.axis(n) for n in order]
        if sorted(axes) != list(range(len(self.alphabets))):
            raise UnknownVariableError(f"{list(order)} is not a permutation of {list(self.variables)}")
        return JointDistribution([self.alphabets[i] for i in axes], self.weights.transpose(axes),
                                 exact=self.exact, eps=self.eps)

    def to_float(self) -> "JointDistribution":
        if not self.exact:
            return self
        w = np.array([float(Fraction(int(v), self.total)) for v in self.weights.flat]).reshape(self.weights.shape)
        return JointDistribution(self.alphabets, w, exact=False, eps=self.eps)

    def close_to(self, other: "JointDistribution", eps: float | None = None) -> bool:
        """Equality of probabilities; exact when both sides are exact, else within eps."""
        if set(self.variables) != set(other.variables):
            return False
        other = other.transpose(self.variables)
        if tuple(other.alphabets) != tuple(self.alphabets):
            return False
        if self.exact and other.exact:
            return bool(np.all(self.weights * other.total == other.weights * self.total))
        tol = eps if eps is not None else max(self.eps, other.eps)
        a = self.to_float().probs()
        b = other.to_float().probs()
        return bool(np.all(np.abs(a - b) <= tol))

    def __eq__(self, other):
        if not isinstance(other, JointDistribution):
            return NotImplemented
        return (self.exact == other.exact and tuple(self.alphabets) == tuple(other.alphabets)
                and self.close_to(other, 0.0))

    __hash__ = None

    def __repr__(self):
        mode = "exact" if self.exact else f"float(eps={self.eps})"
        return f"JointDistribution({list(self.variables)}, {mode})"


def _slice(p: JointDistribution, assignment: Mapping[str, object]) -> np.ndarray:
    idx = [slice(None)] * len(p.alphabets)
    for name, value in assignment.items():
        ax = p.axis(name)
        idx[ax] = p.alphabets[ax].index(value)
    return p.weights[tuple(idx)]


def marginalize(p: JointDistribution, keep: Iterable[str]) -> JointDistribution:
    """Sum out every variable not in ``keep``; kept variables retain their order."""
    keep = set(keep)
    for n in keep:
        p.axis(n)
    drop = tuple(i for i, n in enumerate(p.variables) if n not in keep)
    if not drop:
        return p
    w = p.weights.sum(axis=drop)
    if p.exact and not isinstance(w, np.ndarray):
        w = np.array(w, dtype=object)
    alphabets = [a for a in p.alphabets if a.variable in keep]
    return JointDistribution(alphabets, w, exact=p.exact, eps=p.eps)


def condition(p: JointDistribution, on: Mapping[str, object]) -> JointDistribution:
    """Distribution of the remaining variables given a partial assignment."""
    w = _slice(p, on)
    if not w.sum() > 0:
        raise ZeroProbabilityEvent(f"conditioning event {dict(on)} has probability zero")
    alphabets = [a for a in p.alphabets if a.variable not in on]
    if p.exact and not isinstance(w, np.ndarray):
        w = np.array(w, dtype=object)
    return JointDistribution(alphabets, np.array(w, dtype=w.dtype), exact=p.exact, eps=p.eps)


def is_conditionally_independent(p: JointDistribution, c: CIStatement) -> bool:
    """Test ``c`` on ``p``; zero-probability conditioning values are vacuous."""
    q = marginalize(p, c.variables).transpose(c.variables)
    n1 = math.prod(len(q.alphabet(v)) for v in c.s1)
    n2 = math.prod(len(q.alphabet(v)) for v in c.s2)
    w = q.weights.reshape(n1, n2, -1)
    t = w.sum(axis=(0, 1))
    rows = w.sum(axis=1)
    cols = w.sum(axis=0)
    lhs = w * t[None, None, :]
    rhs = rows[:, None, :] * cols[None, :, :]
    if p.exact:
        return bool(np.all(lhs == rhs))
    # |P(ab|z) - P(a|z)P(b|z)| <= eps, scaled by t^2 to avoid dividing by zero
    return bool(np.all(np.abs(lhs - rhs) <= p.eps * (t * t)[None, None, :]))


def ci_scan(p: JointDistribution, over: Iterable[str] | None = None, *,
            full: bool = False) -> list[CIStatement]:
    """All canonical CI statements over ``over`` that hold in ``p``.

    By default both sides are single variables; ``full=True`` scans every
    pair of disjoint nonempty subsets.
    """
    names = p.variables if over is None else tuple(over)
    for n in names:
        p.axis(n)
    return [c for c in canonical_triples(names, singletons=not full)
            if is_conditionally_independent(p, c)]


@dataclass(frozen=True, eq=False)
class Kernel:
    """Conditional table ``P(child | parents)``.

    ``probs`` has one axis per parent (in ``parents`` order) followed by the
    child axis; every row over the last axis sums to one.
    """

    child: Alphabet
    parents: tuple[Alphabet, ...]
    probs: np.ndarray
    eps: float = field(default=DEFAULT_EPS)

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        arr = np.asarray(self.probs, dtype=object)
        shape = tuple(len(a) for a in self.parents) + (len(self.child),)
        if arr.shape != shape:
            raise ValueError(f"kernel for {self.child.variable!r} has shape {arr.shape}, expected {shape}")
        if all(isinstance(v, (int, Fraction)) for v in arr.flat):
            arr = np.vectorize(Fraction, otypes=[object])(arr)
            sums = arr.sum(axis=-1)
            if any(s != 1 for s in np.atleast_1d(sums).flat):
                raise NormalizationError(f"kernel rows of {self.child.variable!r} do not sum to 1")
        else:
            arr = arr.astype(float)
            if np.any(np.abs(arr.sum(axis=-1) - 1.0) > self.eps):
                raise NormalizationError(f"kernel rows of {self.child.variable!r} do not sum to 1")
        if any(v < 0 for v in arr.flat):
            raise NormalizationError(f"negative entry in kernel of {self.child.variable!r}")
        object.__setattr__(self, "probs", arr)

    @property
    def exact(self) -> bool:
        return self.probs.dtype == object

    @property
    def parent_names(self) -> tuple[str, ...]:
        return tuple(a.variable for a in self.parents)

    @classmethod
    def deterministic(cls, child: Alphabet, parents: Sequence[Alphabet], fn) -> "Kernel":
        """Kernel putting all mass on ``fn(*parent_values)``."""
        parents = tuple(parents)
        shape = tuple(len(a) for a in parents) + (len(child),)
        arr = np.zeros(shape, dtype=object)
        arr[...] = Fraction(0)
        for idx in itertools.product(*(range(len(a)) for a in parents)):
            vals = [a.values[i] for a, i in zip(parents, idx)]
            arr[idx + (child.index(fn(*vals)),)] = Fraction(1)
        return cls(child, parents, arr)

    @classmethod
    def uniform(cls, child: Alphabet, parents: Sequence[Alphabet] = ()) -> "Kernel":
        parents = tuple(parents)
        shape = tuple(len(a) for a in parents) + (len(child),)
        arr = np.empty(shape, dtype=object)
        arr[...] = Fraction(1, len(child))
        return cls(child, parents, arr)


def markov_factorize(g: Dag, kernels: Iterable[Kernel]) -> JointDistribution:
    """The product of one kernel per node, over the nodes of ``g`` in graph order."""
    by_child = {}
    for k in kernels:
        name = k.child.variable
        if name in by_child:
            raise KernelMismatchError(f"two kernels for {name!r}")
        by_child[name] = k
    names = g.names
    if set(by_child) != set(names):
        raise KernelMismatchError(f"kernels cover {sorted(by_child)}, graph has {sorted(names)}")
    alphabets = [by_child[n].child for n in names]
    for n in names:
        k = by_child[n]
        if set(k.parent_names) != g.parents(n) or len(k.parent_names) != len(g.parents(n)):
            raise KernelMismatchError(
                f"kernel for {n!r} conditions on {sorted(k.parent_names)}, graph parents are {sorted(g.parents(n))}")
        for a in k.parents:
            if a != by_child[a.variable].child:
                raise KernelMismatchError(f"alphabet of parent {a.variable!r} disagrees with its own kernel")
    exact = all(k.exact for k in by_child.values())
    pos = {n: i for i, n in enumerate(names)}
    ndim = len(names)
    factors = []
    for n in names:
        k = by_child[n]
        arr = _to_integer_weights(k.probs) if exact else np.asarray(k.probs, dtype=float)
        axes = [pos[p] for p in k.parent_names] + [pos[n]]
        order = np.argsort(axes)
        arr = arr.transpose(order)
        shape = [1] * ndim
        for ax in axes:
            shape[ax] = len(alphabets[ax])
        factors.append(arr.reshape(shape))
    w = functools.reduce(np.multiply, factors)
    w = np.broadcast_to(w, tuple(len(a) for a in alphabets)).copy()
    if exact:
        gcd = functools.reduce(math.gcd, w.flat, 0)
        if gcd > 1:
            w = w // gcd
    return JointDistribution(alphabets, w, exact=exact)


def is_compatible(p: JointDistribution, g: Dag) -> bool:
    """Causal Markov condition: each node independent of its non-descendants given its parents."""
    if set(p.variables) != set(g.names):
        raise UnknownVariableError(f"distribution over {sorted(p.variables)} vs graph over {sorted(g.names)}")
    for n in g.names:
        pa = g.parents(n)
        rest = g.non_descendants(n) - pa
        if rest and not is_conditionally_independent(p, CIStatement.of([n], rest, pa)):
            return False
    return True


def random_kernels(g: Dag, alphabets: Mapping[str, Alphabet] | Sequence[Alphabet],
                   rng: np.random.Generator, grid: int = 100) -> list[Kernel]:
    """One kernel per node with rows ``k_i / sum(k)``, ``k_i`` uniform in ``1..grid``."""
    if grid < 1:
        raise ValueError("grid must be >= 1")
    if not isinstance(alphabets, Mapping):
        alphabets = {a.variable: a for a in alphabets}
    kernels = []
    for n in g.names:
        child = alphabets[n]
        parents = tuple(alphabets[p] for p in sorted(g.parents(n), key=g.names.index))
        shape = tuple(len(a) for a in parents) + (len(child),)
        draws = rng.integers(1, grid + 1, size=shape)
        sums = draws.sum(axis=-1, keepdims=True)
        probs = np.empty(shape, dtype=object)
        probs.flat[:] = [Fraction(int(d), int(s)) for d, s in
                         zip(draws.flat, np.broadcast_to(sums, shape).flat)]
        kernels.append(Kernel(child, parents, probs))
    return kernels


def random_compatible(g: Dag, alphabets, seed, grid: int = 100) -> JointDistribution:
    """Markov factorisation of seeded random rational kernels; same seed, same table.

    ``seed`` is an integer or a sequence of integers (fed to numpy's SeedSequence).
    """
    rng = np.random.default_rng(seed)
    return markov_factorize(g, random_kernels(g, alphabets, rng, grid))
