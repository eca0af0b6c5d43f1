"""Conditional-independence statements and their canonical enumeration."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DisjointnessError


@dataclass(frozen=True, order=True)
class CIStatement:
    """``(s1 _||_ s2 | z)`` over variable names, stored canonically.

    Each set is a sorted tuple and ``s1 <= s2`` lexicographically, so the two
    orientations of a statement compare equal. Use :meth:`of` to build one
    from arbitrary iterables.
    """

    s1: tuple[str, ...]
    s2: tuple[str, ...]
    z: tuple[str, ...] = ()

    @classmethod
    def of(cls, s1: Iterable[str], s2: Iterable[str], z: Iterable[str] = ()) -> "CIStatement":
        a, b, c = set(s1), set(s2), set(z)
        if not a or not b:
            raise DisjointnessError("both sides of a CI statement must be nonempty")
        if a & b or a & c or b & c:
            raise DisjointnessError(f"sets overlap: {sorted(a)}, {sorted(b)}, {sorted(c)}")
        ta, tb = tuple(sorted(a)), tuple(sorted(b))
        if tb < ta:
            ta, tb = tb, ta
        return cls(ta, tb, tuple(sorted(c)))

    @property
    def variables(self) -> tuple[str, ...]:
        return self.s1 + self.s2 + self.z

    def to_json(self) -> dict:
        return {"s1": list(self.s1), "s2": list(self.s2), "z": list(self.z)}

    @classmethod
    def from_json(cls, obj: dict) -> "CIStatement":
        return cls.of(obj["s1"], obj["s2"], obj.get("z", ()))

    def __str__(self) -> str:
        cond = f" | {','.join(self.z)}" if self.z else ""
        return f"({','.join(self.s1)} _||_ {','.join(self.s2)}{cond})"


def canonical_triples(names: Iterable[str], singletons: bool = False) -> list[CIStatement]:
    """All canonical statements over disjoint subsets of ``names``.

    With ``singletons`` both sides are restricted to single variables; the
    conditioning set is always an arbitrary subset of the rest.
    """
    names = sorted(set(names))
    out = set()
    if singletons:
        for a, b in itertools.combinations(names, 2):
            rest = [n for n in names if n not in (a, b)]
            for z in _subsets(rest):
                out.add(CIStatement((a,), (b,), z))
    else:
        # 0: unused, 1: s1, 2: s2, 3: z
        for roles in itertools.product(range(4), repeat=len(names)):
            s1 = tuple(n for n, r in zip(names, roles) if r == 1)
            s2 = tuple(n for n, r in zip(names, roles) if r == 2)
            if not s1 or not s2 or s2 < s1:
                continue
            z = tuple(n for n, r in zip(names, roles) if r == 3)
            out.add(CIStatement(s1, s2, z))
    return sorted(out)


def _subsets(items) -> Iterator[tuple[str, ...]]:
    for k in range(len(items) + 1):
        yield from itertools.combinations(items, k)
