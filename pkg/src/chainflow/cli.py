"""Command line entry point: ``chainflow generate|run|evaluate|export-ilp``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .ace import load_trace
from .exceptions import ChainflowError, GuardError
from .harness import ALGORITHMS, ExperimentConfig, build_instance, evaluate, run_experiment
from .instance import save_instance
from .lp import export_ilp
from .offline import DEFAULT_NODE_BUDGET, MAX_COMBINATIONS, SolveResult
from .validation import check_instance

logger = logging.getLogger("chainflow")


def _generator_params(args):
    if args.type == "random":
        params = {
            "n": args.n,
            "ell": args.ell,
            "instances_per_function": args.instances_per_function,
            "request_count": args.requests,
            "capacity": (args.cap_min, args.cap_max),
            "r": args.r,
            "edge_probability": args.edge_prob,
            "stretch": args.stretch,
        }
        return params
    if args.type == "adversarial":
        return {"ell": args.ell, "kappa": args.kappa}
    if args.input is None:
        raise ChainflowError(f"--type {args.type} needs --input")
    doc = json.loads(Path(args.input).read_text())
    if args.type == "ksp":
        return {"universe_size": doc["universe_size"], "sets": doc["sets"], "k": args.k}
    nodes = doc.get("node_count", doc.get("nodes"))
    if isinstance(nodes, list):
        nodes = len(nodes)
    return {"node_count": nodes, "edges": doc["edges"], "ell": args.ell}


def _add_generator_args(p, required_type):
    p.add_argument("--type", choices=["random", "adversarial", "ksp", "mis"], required=required_type)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int, default=20, help="node count (random)")
    p.add_argument("--ell", type=int, default=2, help="chain length")
    p.add_argument("--instances-per-function", type=int, default=2)
    p.add_argument("--requests", type=int, default=10)
    p.add_argument("--cap-min", type=int, default=3)
    p.add_argument("--cap-max", type=int, default=5)
    p.add_argument("--r", type=int, default=None, help="max walk length in hops (default: unbounded)")
    p.add_argument("--stretch", type=float, default=None, help="stretch factor instead of --r")
    p.add_argument("--edge-prob", type=float, default=0.2)
    p.add_argument("--kappa", type=int, default=None, help="per-node capacity (adversarial)")
    p.add_argument("--k", type=int, default=3, help="set size bound (ksp)")
    p.add_argument("--input", help="set system (ksp) or graph (mis) JSON")


def cmd_generate(args):
    if args.type == "adversarial" and args.kappa is None:
        raise ChainflowError("--type adversarial needs --kappa")
    instance, _ = build_instance(args.type, _generator_params(args), args.seed)
    Path(args.out).write_text(save_instance(instance))
    chains = len(instance.chain_universe())
    print(
        f"wrote {args.out}: n={instance.node_count} ell={instance.max_chain_length} "
        f"requests={len(instance.requests)} chains={chains}"
    )
    return 0


def cmd_run(args):
    algos = tuple(a.strip() for a in args.algo.split(",") if a.strip())
    unknown = [a for a in algos if a not in ALGORITHMS]
    if unknown:
        raise SystemExit(_usage_error(args, f"unknown algorithm(s) {unknown}; choose from {list(ALGORITHMS)}"))
    if (args.instance is None) == (args.type is None):
        raise SystemExit(_usage_error(args, "give exactly one of --instance or --type"))
    out_dir = args.out_dir or (str(Path(args.instance).parent) if args.instance else ".")
    config = ExperimentConfig(
        algorithms=algos,
        instance_path=args.instance,
        generator=args.type,
        generator_params=_generator_params(args) if args.type else {},
        seed=args.seed,
        repetitions=args.repetitions,
        out_dir=out_dir,
        metrics_path=args.metrics,
        mu=args.mu,
        node_budget=args.node_budget,
        max_combinations=args.max_combinations,
        jobs=args.jobs,
    )
    for row in run_experiment(config):
        ratio = "" if row.ratio_vs_offline is None else f" ratio={row.ratio_vs_offline:.4g}"
        ok = "" if row.bound_satisfied is None else f" bound={row.bound:.4g} satisfied={row.bound_satisfied}"
        print(f"{row.instance_id} {row.algorithm}: objective={row.objective}{ratio}{ok}")
    return 0


def cmd_evaluate(args):
    instance = check_instance(args.instance)
    online = SolveResult.from_json(Path(args.online).read_text())
    offline = SolveResult.from_json(Path(args.offline).read_text())
    trace = load_trace(Path(args.trace).read_text()) if args.trace else None
    report = evaluate(instance, online, offline, trace=trace, mu=args.mu)
    text = json.dumps(report.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


def cmd_export_ilp(args):
    text = export_ilp(check_instance(args.instance))
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _usage_error(args, message):
    args._parser.print_usage(sys.stderr)
    print(f"{args._parser.prog}: error: {message}", file=sys.stderr)
    return 2


def build_parser():
    parser = argparse.ArgumentParser(prog="chainflow", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write an instance file")
    _add_generator_args(p, required_type=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate, _parser=p)

    p = sub.add_parser("run", help="run algorithms on an instance or a generated sweep")
    p.add_argument("--instance")
    p.add_argument("--algo", default="ace", help=f"comma-separated subset of {','.join(ALGORITHMS)}")
    p.add_argument("--out-dir")
    p.add_argument("--metrics", help="metrics CSV (default: <out-dir>/metrics.csv)")
    p.add_argument("--mu", type=float, default=None, help="override ACE's cost base (non-standard)")
    p.add_argument("--node-budget", type=int, default=DEFAULT_NODE_BUDGET)
    p.add_argument("--max-combinations", type=int, default=MAX_COMBINATIONS)
    p.add_argument("--repetitions", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    _add_generator_args(p, required_type=False)
    p.set_defaults(func=cmd_run, _parser=p)

    p = sub.add_parser("evaluate", help="offline/online ratio and bound residuals")
    p.add_argument("--instance", required=True)
    p.add_argument("--online", required=True)
    p.add_argument("--offline", required=True)
    p.add_argument("--trace", help="ACE trace (JSON lines) of the online run")
    p.add_argument("--mu", type=float, default=None)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate, _parser=p)

    p = sub.add_parser("export-ilp", help="write the 0-1 program in CPLEX LP format")
    p.add_argument("--instance", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export_ilp, _parser=p)
    return parser


def main(argv=None):
    level = os.environ.get("CHAINFLOW_LOG", "WARNING").upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING) if not level.isdigit() else int(level),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ChainflowError, ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
