"""Causal-graph, probability and polytope tools for checking that no fine-tuning
plus no-disturbance forces factorisable (local / noncontextual) statistics."""
from .ci import CIStatement, canonical_triples
from .dag import LATENT, OBSERVED, Dag, Node, all_d_separations, d_separated
from .errors import NoFineTuneError
from .faithfulness import FaithfulnessReport, is_faithful, one_bit_signalling_pr_model
from .polytope import (
    Inequality,
    MembershipResult,
    build_vertices,
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
)
from .prob import Alphabet, JointDistribution, Kernel, ci_scan, marginalize, markov_factorize, random_compatible
from .scenario import CausalModel, MeasurementScenario, Phenomenon, chsh_scenario, kcbs_scenario, no_disturbance
from .theorem import CandidateSpace, Theorem1Config, VerificationReport, verify_theorem1

__version__ = "0.1.0"
