"""JSON encoding of rationals and distributions.

Exact weights travel as ``"num/den"`` strings so tables survive a round trip
bit for bit; float-mode tables carry plain JSON numbers.
"""
from __future__ import annotations

from fractions import Fraction

from .prob import DEFAULT_EPS, Alphabet, JointDistribution


def rational_to_str(q) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(s) -> Fraction:
    if isinstance(s, bool):
        raise ValueError(f"not a rational: {s!r}")
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, str):
        return Fraction(s.strip())
    raise ValueError(f"exact values must be 'num/den' strings, got {s!r}")


def distribution_to_json(p: JointDistribution) -> dict:
    table = []
    for key, w in p.table().items():
        table.append({
            "assignment": dict(zip(p.variables, key)),
            "weight": rational_to_str(w) if p.exact else float(w),
        })
    out = {
        "variables": [{"name": a.variable, "values": list(a.values)} for a in p.alphabets],
        "mode": "exact" if p.exact else "float",
        "table": table,
    }
    if not p.exact:
        out["eps"] = p.eps
    return out


def distribution_from_json(obj) -> JointDistribution:
    alphabets = [Alphabet(v["name"], v["values"]) for v in obj["variables"]]
    mode = obj.get("mode", "exact")
    if mode not in ("exact", "float"):
        raise ValueError(f"unknown mode {mode!r}")
    exact = mode == "exact"
    names = [a.variable for a in alphabets]
    table = {}
    for entry in obj["table"]:
        assignment = entry["assignment"]
        if set(assignment) != set(names):
            raise ValueError(f"assignment {assignment} does not cover variables {names}")
        key = tuple(str(assignment[n]) for n in names)
        if key in table:
            raise ValueError(f"repeated assignment {key}")
        w = entry["weight"]
        table[key] = rational_from_str(w) if exact else float(w)
    return JointDistribution.from_table(alphabets, table, exact=exact, eps=float(obj.get("eps", DEFAULT_EPS)))
