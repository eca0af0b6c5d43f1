"""Fine-tuning diagnosis: conditional independences with no matching d-separation."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ci import CIStatement
from .dag import LATENT, Dag, Node, d_separated
from .errors import ModelMismatchError
from .prob import Alphabet, Kernel, JointDistribution, ci_scan, marginalize, markov_factorize
from .scenario import OBSERVABLES, CausalModel, Phenomenon, chsh_scenario


@dataclass(frozen=True)
class FaithfulnessReport:
    """``fine_tuned_cis`` hold in the phenomenon but are not d-separations.

    ``support_induced`` is the subset of those that hold only because one
    side is a point mass on every positive-probability conditioning value.
    """

    faithful: bool
    fine_tuned_cis: list[CIStatement] = field(default_factory=list)
    support_induced: list[CIStatement] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "faithful": self.faithful,
            "fine_tuned": [c.to_json() for c in self.fine_tuned_cis],
            "support_induced": [c.to_json() for c in self.support_induced],
        }


def _degenerate(p: JointDistribution, c: CIStatement) -> bool:
    q = marginalize(p, c.variables).transpose(c.variables)
    n1 = int(np.prod([len(q.alphabet(v)) for v in c.s1]))
    n2 = int(np.prod([len(q.alphabet(v)) for v in c.s2]))
    w = q.weights.reshape(n1, n2, -1)
    for k in range(w.shape[2]):
        blk = w[:, :, k]
        if not blk.sum() > 0:
            continue
        rows = sum(1 for r in blk.sum(axis=1) if r > 0)
        cols = sum(1 for r in blk.sum(axis=0) if r > 0)
        if rows > 1 and cols > 1:
            return False
    return True


def is_faithful(gamma: CausalModel, p: Phenomenon) -> FaithfulnessReport:
    """Every CI of ``p`` over ``A, B, X, Y`` (full subset scan) must be a d-separation of the graph."""
    if not gamma.observed_marginal().close_to(p.dist):
        raise ModelMismatchError("the model's observable marginal does not reproduce the phenomenon")
    fine = [c for c in ci_scan(p.dist, OBSERVABLES, full=True)
            if not d_separated(gamma.graph, c.s1, c.s2, c.z)]
    induced = [c for c in fine if _degenerate(p.dist, c)]
    return FaithfulnessReport(not fine, fine, induced)


def required_nd_dseps() -> list[CIStatement]:
    """The two d-separations a faithful model of a no-disturbance phenomenon must have."""
    return [CIStatement.of(["A"], ["Y"], ["X"]), CIStatement.of(["B"], ["X"], ["Y"])]


def satisfies_nd_dseps(g: Dag) -> bool:
    return all(d_separated(g, c.s1, c.s2, c.z) for c in required_nd_dseps())


def one_bit_signalling_pr_model() -> CausalModel:
    """PR box from a shared uniform bit plus one bit of signalling ``X -> B``.

    ``A = L`` and ``B = L xor (x and y)``. The observable statistics are the
    PR box with uniform independent settings; ``B`` is marginally uniform for
    every ``(x, y)``, so no signalling is visible even though ``X -> B``.
    """
    bits = ("0", "1")
    ax, ay = Alphabet("X", ("x0", "x1")), Alphabet("Y", ("y0", "y1"))
    al, aa, ab = Alphabet("L", bits), Alphabet("A", bits), Alphabet("B", bits)
    g = Dag([Node("A"), Node("B"), Node("X"), Node("Y"), Node("L", LATENT)],
            [("L", "A"), ("L", "B"), ("X", "A"), ("X", "B"), ("Y", "B")])
    kernels = [
        Kernel.uniform(ax),
        Kernel.uniform(ay),
        Kernel.uniform(al),
        Kernel.deterministic(aa, (ax, al), lambda x, lam: lam),
        Kernel.deterministic(ab, (ax, ay, al), lambda x, y, lam: str(int(lam) ^ (int(x[-1]) & int(y[-1])))),
    ]
    return CausalModel(g, markov_factorize(g, kernels))


def signalling_pr_phenomenon() -> Phenomenon:
    return Phenomenon(chsh_scenario(), one_bit_signalling_pr_model().observed_marginal())
