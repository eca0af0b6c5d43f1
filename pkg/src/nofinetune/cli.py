"""Batch command line front end.

Exit codes: 0 success (whatever the verdict), 2 unreadable or malformed
input, 3 overlapping or empty d-separation sets, 4 a precondition of the
analysis failed (model/phenomenon mismatch, support outside the contexts,
vertex explosion, ...).
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .dag import Dag, d_separated
from .errors import DisjointnessError, NoFineTuneError
from .faithfulness import is_faithful
from .polytope import GLOBAL, PAIRS, Inequality, build_vertices, classical_bound, is_factorisable, vertices_for
from .prob import JointDistribution, ci_scan
from .scenario import CausalModel, MeasurementScenario, Phenomenon, no_disturbance
from .serialize import distribution_from_json, rational_to_str
from .theorem import Theorem1Config, verify_theorem1

EXIT_OK, EXIT_PARSE, EXIT_DISJOINT, EXIT_PRECONDITION = 0, 2, 3, 4
SEED_ENV = "NOFINETUNE_SEED"


class InputError(Exception):
    """Input that could not be read or decoded."""


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    trials: int = 50
    latent_card: int = 4
    mode: str = "exact"
    eps: float = 1e-9
    vertex_kind: str = PAIRS
    output: str = "json"

    def __post_init__(self):
        if self.seed < 0 or self.trials < 1 or self.latent_card < 1:
            raise ValueError("seed must be >= 0, trials and latent_card >= 1")
        if self.mode not in ("exact", "float"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "float" and not self.eps > 0:
            raise ValueError("float mode needs a positive eps")
        if self.vertex_kind not in (PAIRS, GLOBAL):
            raise ValueError(f"unknown vertex kind {self.vertex_kind!r}")
        if self.output not in ("json", "table"):
            raise ValueError(f"unknown output format {self.output!r}")


def _load(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise InputError(f"{path}: {e}") from e


def _decode(fn, obj, what):
    try:
        return fn(obj)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"malformed {what}: {e!r}") from e


def _apply_mode(d: JointDistribution, cfg: RunConfig) -> JointDistribution:
    if cfg.mode == "float":
        f = d.to_float()
        return JointDistribution(f.alphabets, f.weights, exact=False, eps=cfg.eps)
    return d


def _phenomenon(path: str, cfg: RunConfig) -> Phenomenon:
    p = _decode(Phenomenon.from_json, _load(path), "phenomenon")
    return Phenomenon(p.scenario, _apply_mode(p.dist, cfg))


def _emit(obj, cfg: RunConfig, table: str | None = None):
    if cfg.output == "table" and table is not None:
        print(table)
    else:
        print(json.dumps(obj, indent=1, sort_keys=True))


def _kv_table(d: dict) -> str:
    width = max(len(k) for k in d)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in d.items())


def cmd_dsep(args, cfg):
    g = _decode(Dag.from_json, _load(args.graph), "graph")
    print("true" if d_separated(g, args.s1, args.s2, args.z or ()) else "false")


def cmd_ci_scan(args, cfg):
    obj = _load(args.file)
    d = _decode(distribution_from_json, obj.get("distribution", obj), "distribution")
    d = _apply_mode(d, cfg)
    cis = ci_scan(d, args.over, full=args.full)
    _emit({"cis": [c.to_json() for c in cis]}, cfg, "\n".join(str(c) for c in cis) or "(none)")


def cmd_nd_check(args, cfg):
    r = no_disturbance(_phenomenon(args.phenomenon, cfg))
    rows = [f"no-disturbance holds: {r.holds}"]
    rows += [f"  {v.variable} at {v.setting}: deviation {v.deviation}" for v in r.violations]
    _emit(r.to_json(), cfg, "\n".join(rows))


def cmd_polytope_test(args, cfg):
    p = _phenomenon(args.phenomenon, cfg)
    v = vertices_for(p, cfg.vertex_kind)
    r = is_factorisable(p, v)
    out = r.to_json(v)
    out["vertices"] = {"kind": v.kind, "count": len(v)}
    table = {"inside": r.inside, "vertex kind": v.kind, "vertices": len(v)}
    if not r.inside:
        table.update(value=r.value, bound=r.witness.bound, margin=r.margin)
    _emit(out, cfg, _kv_table(table))


def cmd_classical_bound(args, cfg):
    obj = _load(args.inequality)
    ineq = _decode(Inequality.from_json, obj.get("inequality", obj), "inequality")
    sobj = _load(args.scenario) if args.scenario else obj.get("scenario")
    if sobj is None:
        raise InputError("no scenario given (use --scenario or embed one in the inequality file)")
    s = _decode(MeasurementScenario.from_json, sobj, "scenario")
    order = s.measurements
    xs = [m for m in order if any(k[2] == m for k in ineq.coefficients)]
    ys = [m for m in order if any(k[3] == m for k in ineq.coefficients)]
    v = build_vertices(s, cfg.vertex_kind, a_domain=xs, b_domain=ys)
    bound = classical_bound(ineq, v)
    exact = cfg.mode == "exact"
    enc = rational_to_str if exact else float
    out = {"bound": enc(bound), "declared_bound": enc(ineq.bound),
           "vertex_kind": v.kind, "vertex_count": len(v)}
    _emit(out, cfg, _kv_table({"classical bound": bound, "declared bound": ineq.bound,
                               "vertex kind": v.kind, "vertices": len(v)}))


def cmd_faithful_check(args, cfg):
    model = _decode(CausalModel.from_json, _load(args.model), "causal model")
    p = _phenomenon(args.phenomenon, cfg)
    r = is_faithful(model, p)
    rows = [f"faithful: {r.faithful}"] + [f"  fine-tuned {c}" for c in r.fine_tuned_cis]
    _emit(r.to_json(), cfg, "\n".join(rows))


def cmd_verify_theorem1(args, cfg):
    base = Theorem1Config()
    if args.config:
        base = _decode(Theorem1Config.from_json, _load(args.config), "theorem config")
    seed = base.seed
    if os.environ.get(SEED_ENV):
        seed = _decode(int, os.environ[SEED_ENV], SEED_ENV)
    if args.seed is not None:
        seed = args.seed
    space = base.space
    if args.bell_only:
        space = replace(space, xy_links=False)
    config = replace(
        base,
        seed=seed,
        trials=args.trials if args.trials is not None else base.trials,
        latent_card=args.latent_card if args.latent_card is not None else base.latent_card,
        space=space,
        numeric=base.numeric and not args.no_numeric,
        jobs=args.jobs,
    )
    report = verify_theorem1(config)
    if args.out:
        Path(args.out).write_text(report.dumps())
    if cfg.output == "table":
        print(report.table())
    else:
        sys.stdout.write(report.dumps())


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="output", choices=("json", "table"), default="json")
    common.add_argument("--mode", choices=("exact", "float"), default="exact")
    common.add_argument("--eps", type=float, default=1e-9)
    common.add_argument("--vertices", dest="vertex_kind", choices=(PAIRS, GLOBAL), default=PAIRS)

    ap = argparse.ArgumentParser(prog="nofinetune", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dsep", parents=[common], help="d-separation query on a graph file")
    p.add_argument("graph")
    p.add_argument("--s1", nargs="+", required=True)
    p.add_argument("--s2", nargs="+", required=True)
    p.add_argument("--z", nargs="*", default=[])
    p.set_defaults(fn=cmd_dsep)

    p = sub.add_parser("ci-scan", parents=[common], help="conditional independences of a distribution")
    p.add_argument("file")
    p.add_argument("--over", nargs="+")
    p.add_argument("--full", action="store_true", help="all disjoint subset triples, not just singletons")
    p.set_defaults(fn=cmd_ci_scan)

    p = sub.add_parser("nd-check", parents=[common], help="no-disturbance check of a phenomenon")
    p.add_argument("phenomenon")
    p.set_defaults(fn=cmd_nd_check)

    p = sub.add_parser("polytope-test", parents=[common], help="factorisability of a phenomenon")
    p.add_argument("phenomenon")
    p.set_defaults(fn=cmd_polytope_test)

    p = sub.add_parser("classical-bound", parents=[common], help="vertex maximum of an inequality")
    p.add_argument("inequality")
    p.add_argument("--scenario")
    p.set_defaults(fn=cmd_classical_bound)

    p = sub.add_parser("faithful-check", parents=[common], help="fine-tuning diagnosis of a model")
    p.add_argument("model")
    p.add_argument("phenomenon")
    p.set_defaults(fn=cmd_faithful_check)

    p = sub.add_parser("verify-theorem1", parents=[common], help="exhaustive candidate-graph check")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--latent-card", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--bell-only", action="store_true", help="no X-Y edges or common causes")
    p.add_argument("--no-numeric", action="store_true")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(fn=cmd_verify_theorem1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = RunConfig(seed=getattr(args, "seed", None) or 0,
                        trials=getattr(args, "trials", None) or 50,
                        latent_card=getattr(args, "latent_card", None) or 4,
                        mode=args.mode, eps=args.eps, vertex_kind=args.vertex_kind, output=args.output)
        if getattr(args, "jobs", 1) < 1:
            raise ValueError("--jobs must be >= 1")
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    try:
        args.fn(args, cfg)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_PARSE
    except DisjointnessError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_DISJOINT
    except NoFineTuneError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK
