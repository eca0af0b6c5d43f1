"""Directed acyclic graphs, genealogy and d-separation.

Node sets are handled internally as integer bitmasks over the node order, so
a d-separation query is a handful of bit operations per visited node. The
same bitmask routine backs both :func:`d_separated` on :class:`Dag` objects
and the candidate filtering in :mod:`nofinetune.theorem`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .ci import CIStatement, canonical_triples
from .errors import CycleError, DisjointnessError, DuplicateNodeError, UnknownNodeError

OBSERVED = "observed"
LATENT = "latent"


@dataclass(frozen=True, order=True)
class Node:
    name: str
    kind: str = OBSERVED

    def __post_init__(self):
        if self.kind not in (OBSERVED, LATENT):
            raise ValueError(f"unknown node kind {self.kind!r}")


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def closure_masks(parents: Sequence[int]) -> tuple[list[int], list[int]] | None:
    """Ancestor and descendant masks for a parent-mask graph, or None if cyclic."""
    n = len(parents)
    children = [0] * n
    for v, pm in enumerate(parents):
        for p in _bits(pm):
            children[p] |= 1 << v
    indeg = [bin(pm).count("1") for pm in parents]
    order = [v for v in range(n) if indeg[v] == 0]
    i = 0
    while i < len(order):
        v = order[i]
        i += 1
        for c in _bits(children[v]):
            indeg[c] -= 1
            if indeg[c] == 0:
                order.append(c)
    if len(order) < n:
        return None
    anc = [0] * n
    for v in order:
        m = 0
        for p in _bits(parents[v]):
            m |= anc[p] | (1 << p)
        anc[v] = m
    desc = [0] * n
    for v in reversed(order):
        m = 0
        for c in _bits(children[v]):
            m |= desc[c] | (1 << c)
        desc[v] = m
    return anc, desc


def d_reachable(parents: Sequence[int], children: Sequence[int], anc: Sequence[int],
                source: int, z: int) -> int:
    """Mask of nodes d-connected to ``source`` given ``z`` (excluding ``z``).

    Reachability over (node, direction) states: a trail may pass a non-collider
    that is outside ``z``, and a collider that is in ``z`` or has a descendant
    in ``z``.
    """
    active = z
    m = z
    while m:
        low = m & -m
        m ^= low
        active |= anc[low.bit_length() - 1]
    seen_up = seen_down = 0
    up, down = source, 0
    while up or down:
        seen_up |= up
        seen_down |= down
        nup = ndown = 0
        m = up & ~z
        while m:
            low = m & -m
            m ^= low
            i = low.bit_length() - 1
            nup |= parents[i]
            ndown |= children[i]
        m = down & ~z
        while m:
            low = m & -m
            m ^= low
            ndown |= children[low.bit_length() - 1]
        m = down & active
        while m:
            low = m & -m
            m ^= low
            nup |= parents[low.bit_length() - 1]
        up = nup & ~seen_up
        down = ndown & ~seen_down
    return (seen_up | seen_down) & ~z


class Dag:
    """Immutable DAG over named nodes.

    ``nodes`` may mix :class:`Node` objects and plain names (taken as
    observed). Node order is preserved as given and fixes the variable order
    of distributions built on the graph.
    """

    def __init__(self, nodes: Iterable[Node | str], edges: Iterable[tuple[str, str]] = ()):
        ns = []
        index = {}
        for n in nodes:
            node = n if isinstance(n, Node) else Node(str(n))
            if node.name in index:
                raise DuplicateNodeError(f"node {node.name!r} declared twice")
            index[node.name] = len(ns)
            ns.append(node)
        parents = [0] * len(ns)
        edge_set = set()
        for u, v in edges:
            if u not in index or v not in index:
                missing = u if u not in index else v
                raise UnknownNodeError(f"edge ({u}, {v}) uses undeclared node {missing!r}")
            if u == v:
                raise CycleError([u, u])
            if (u, v) in edge_set:
                raise ValueError(f"duplicate edge ({u}, {v})")
            edge_set.add((u, v))
            parents[index[v]] |= 1 << index[u]
        closure = closure_masks(parents)
        if closure is None:
            raise CycleError(_find_cycle(ns, edge_set))
        self._nodes = tuple(ns)
        self._index = index
        self._edges = frozenset(edge_set)
        self._parents = parents
        self._children = [0] * len(ns)
        for v, pm in enumerate(parents):
            for p in _bits(pm):
                self._children[p] |= 1 << v
        self._anc, self._desc = closure

    @property
    def nodes(self) -> tuple[Node, ...]:
        return self._nodes

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n.name for n in self._nodes)

    @property
    def edges(self) -> frozenset[tuple[str, str]]:
        return self._edges

    def node(self, name: str) -> Node:
        return self._nodes[self._index_of(name)]

    def observed(self) -> tuple[str, ...]:
        return tuple(n.name for n in self._nodes if n.kind == OBSERVED)

    def latent(self) -> tuple[str, ...]:
        return tuple(n.name for n in self._nodes if n.kind == LATENT)

    def parents(self, name: str) -> frozenset[str]:
        return self._names(self._parents[self._index_of(name)])

    def children(self, name: str) -> frozenset[str]:
        return self._names(self._children[self._index_of(name)])

    def ancestors(self, name: str) -> frozenset[str]:
        return self._names(self._anc[self._index_of(name)])

    def descendants(self, name: str) -> frozenset[str]:
        return self._names(self._desc[self._index_of(name)])

    def non_descendants(self, name: str) -> frozenset[str]:
        i = self._index_of(name)
        full = (1 << len(self._nodes)) - 1
        return self._names(full & ~self._desc[i] & ~(1 << i))

    def topological_order(self) -> tuple[str, ...]:
        return tuple(sorted(self.names, key=lambda n: (len(self.ancestors(n)), self._index[n])))

    def with_edge(self, u: str, v: str) -> "Dag":
        return Dag(self._nodes, set(self._edges) | {(u, v)})

    def mask(self, names: Iterable[str]) -> int:
        m = 0
        for n in names:
            m |= 1 << self._index_of(n)
        return m

    def _index_of(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownNodeError(f"unknown node {name!r}") from None

    def _names(self, mask: int) -> frozenset[str]:
        return frozenset(self._nodes[i].name for i in _bits(mask))

    def __eq__(self, other):
        return isinstance(other, Dag) and set(self._nodes) == set(other._nodes) and self._edges == other._edges

    def __hash__(self):
        return hash((frozenset(self._nodes), self._edges))

    def __repr__(self):
        edges = ", ".join(f"{u}->{v}" for u, v in sorted(self._edges))
        return f"Dag([{', '.join(self.names)}], [{edges}])"

    def to_json(self) -> dict:
        return {
            "nodes": [{"name": n.name, "kind": n.kind} for n in self._nodes],
            "edges": [list(e) for e in sorted(self._edges)],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Dag":
        nodes = []
        for n in obj["nodes"]:
            if isinstance(n, str):
                nodes.append(Node(n))
            else:
                nodes.append(Node(n["name"], n.get("kind", OBSERVED)))
        return cls(nodes, [tuple(e) for e in obj.get("edges", [])])


def _find_cycle(nodes, edges) -> list[str]:
    succ = {n.name: [] for n in nodes}
    for u, v in sorted(edges):
        succ[u].append(v)
    state = {}
    stack = []

    def visit(u):
        state[u] = 1
        stack.append(u)
        for v in succ[u]:
            if state.get(v) == 1:
                return stack[stack.index(v):] + [v]
            if v not in state:
                found = visit(v)
                if found:
                    return found
        stack.pop()
        state[u] = 2
        return None

    for n in succ:
        if n not in state:
            found = visit(n)
            if found:
                return found
    return []


def build_dag(nodes: Iterable[Node | str], edges: Iterable[tuple[str, str]]) -> Dag:
    return Dag(nodes, edges)


@dataclass(frozen=True)
class Genealogy:
    parents: Mapping[str, frozenset[str]]
    ancestors: Mapping[str, frozenset[str]]
    descendants: Mapping[str, frozenset[str]]
    non_descendants: Mapping[str, frozenset[str]]


def genealogy(g: Dag) -> Genealogy:
    return Genealogy(
        parents={n: g.parents(n) for n in g.names},
        ancestors={n: g.ancestors(n) for n in g.names},
        descendants={n: g.descendants(n) for n in g.names},
        non_descendants={n: g.non_descendants(n) for n in g.names},
    )


def d_separated(g: Dag, s1: Iterable[str], s2: Iterable[str], z: Iterable[str] = ()) -> bool:
    """True iff ``z`` blocks every path between ``s1`` and ``s2`` in ``g``."""
    idx = g._index
    masks = []
    try:
        for group in (s1, s2, z):
            m = 0
            for n in group:
                m |= 1 << idx[n]
            masks.append(m)
    except KeyError as e:
        raise UnknownNodeError(f"unknown node {e.args[0]!r}") from None
    m1, m2, mz = masks
    if not m1 or not m2:
        raise DisjointnessError("s1 and s2 must be nonempty")
    if m1 & m2 or m1 & mz or m2 & mz:
        raise DisjointnessError("s1, s2 and z must be pairwise disjoint")
    return not d_reachable(g._parents, g._children, g._anc, m1, mz) & m2


def d_connected_to(g: Dag, s1: Iterable[str], z: Iterable[str] = ()) -> frozenset[str]:
    """Nodes outside ``s1`` and ``z`` that are d-connected to ``s1`` given ``z``."""
    m1, mz = g.mask(s1), g.mask(z)
    if m1 & mz:
        raise DisjointnessError("s1 and z must be disjoint")
    return g._names(d_reachable(g._parents, g._children, g._anc, m1, mz) & ~m1)


def all_d_separations(g: Dag, observed: Iterable[str] | None = None) -> list[CIStatement]:
    """Every canonical ``(S1 _||_ S2 | Z)_d`` over subsets of ``observed``."""
    names = g.observed() if observed is None else tuple(observed)
    for n in names:
        g._index_of(n)
    return [ci for ci in canonical_triples(names) if d_separated(g, ci.s1, ci.s2, ci.z)]
