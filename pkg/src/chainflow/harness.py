"""Experiment plumbing: run algorithms, compare against the offline optimum, log metrics."""
from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .ace import ACE, AceParams, GreedyFirstFit, dump_trace
from .exceptions import MismatchedInstanceError
from .generators import adversarial_instance, ksp_to_scep, mis_to_scep, random_instance
from .instance import save_instance
from .offline import DEFAULT_NODE_BUDGET, MAX_COMBINATIONS, branch_and_bound, brute_force, verify_solution
from .validation import check_instance

ALGORITHMS = ("ace", "greedy", "offline-bb", "offline-brute")
OFFLINE = ("offline-bb", "offline-brute")

METRICS_HEADER = [
    "instance_id",
    "algorithm",
    "objective",
    "runtime_ms",
    "ratio_vs_offline",
    "bound",
    "bound_satisfied",
    "optimal",
    "seed",
]


@dataclass
class MetricsRow:
    instance_id: str
    algorithm: str
    objective: int
    runtime_ms: float
    ratio_vs_offline: Optional[float] = None
    bound: Optional[float] = None
    bound_satisfied: Optional[bool] = None
    optimal: bool = False
    seed: Optional[int] = None

    def to_csv(self):
        out = {}
        for key, value in asdict(self).items():
            if value is None:
                out[key] = ""
            elif isinstance(value, bool):
                out[key] = "true" if value else "false"
            elif isinstance(value, float):
                out[key] = "inf" if math.isinf(value) else repr(value)
            else:
                out[key] = str(value)
        return out

    @classmethod
    def from_csv(cls, row):
        def opt(kind, text):
            return None if text == "" else kind(text)

        def flag(text):
            return None if text == "" else text == "true"

        return cls(
            instance_id=row["instance_id"],
            algorithm=row["algorithm"],
            objective=int(row["objective"]),
            runtime_ms=float(row["runtime_ms"]),
            ratio_vs_offline=opt(float, row["ratio_vs_offline"]),
            bound=opt(float, row["bound"]),
            bound_satisfied=flag(row["bound_satisfied"]),
            optimal=row["optimal"] == "true",
            seed=opt(int, row["seed"]),
        )


def append_metrics(path, rows):
    """Append rows to a metrics CSV, writing the header only for a new file."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    if not fresh:
        with path.open(newline="") as fh:
            header = next(csv.reader(fh), None)
        if header != METRICS_HEADER:
            raise ValueError(f"{path} has an unexpected header {header}")
    with path.open("a", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_HEADER)
        if fresh:
            writer.writeheader()
        for row in rows:
            writer.writerow(row.to_csv())


def read_metrics(path):
    with Path(path).open(newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != METRICS_HEADER:
            raise ValueError(f"{path} has an unexpected header {reader.fieldnames}")
        return [MetricsRow.from_csv(row) for row in reader]


def offline_online_ratio(offline, online):
    """OFF / ON, with 0/0 read as 1 and x/0 as infinity."""
    if online == 0:
        return 1.0 if offline == 0 else math.inf
    return offline / online


@dataclass
class AlgorithmRun:
    algorithm: str
    result: object
    runtime_ms: float
    trace: Optional[list] = None


def run_algorithm(instance, algorithm, mu=None, node_budget=DEFAULT_NODE_BUDGET, max_combinations=MAX_COMBINATIONS):
    instance = check_instance(instance)
    start = time.perf_counter()
    trace = None
    if algorithm == "ace":
        est = ACE(mu=mu).fit(instance)
        result, trace = est.result_, est.trace_
    elif algorithm == "greedy":
        result = GreedyFirstFit().fit(instance).result_
    elif algorithm == "offline-bb":
        result = branch_and_bound(instance, node_budget=node_budget)
    elif algorithm == "offline-brute":
        result = brute_force(instance, max_combinations=max_combinations)
    else:
        raise ValueError(f"unknown algorithm {algorithm!r}; choose from {', '.join(ALGORITHMS)}")
    elapsed = (time.perf_counter() - start) * 1000
    report = verify_solution(instance, result)
    if not report.ok:
        raise RuntimeError(f"{algorithm} produced an invalid solution: {report.summary()}")
    return AlgorithmRun(algorithm, result, elapsed, trace)


def metrics_for(instance, runs, instance_id, mu=None, seed=None):
    """One metrics row per run; ratios are taken against the best optimal offline run."""
    params = AceParams.for_instance(instance, mu)
    offline = [r for r in runs if r.algorithm in OFFLINE and r.result.optimal]
    reference = offline[0].result.objective if offline else None
    rows = []
    for run in runs:
        ratio = satisfied = None
        if reference is not None:
            ratio = offline_online_ratio(reference, run.result.objective)
            satisfied = ratio <= params.competitive_bound
        rows.append(
            MetricsRow(
                instance_id=instance_id,
                algorithm=run.algorithm,
                objective=run.result.objective,
                runtime_ms=run.runtime_ms,
                ratio_vs_offline=ratio,
                bound=params.competitive_bound,
                bound_satisfied=satisfied,
                optimal=run.result.optimal,
                seed=seed,
            )
        )
    return rows


@dataclass
class RatioReport:
    online_objective: int
    offline_objective: int
    offline_optimal: bool
    ratio: float
    mu: float
    ell: int
    bound: float
    bound_satisfied: bool
    mincap_satisfied: bool
    weight_bound_slack: Optional[float] = None
    weight_bound_holds: Optional[bool] = None
    rejection_bound_slack: Optional[float] = None
    rejection_bound_holds: Optional[bool] = None

    def to_dict(self):
        out = asdict(self)
        if math.isinf(self.ratio):
            out["ratio"] = None
            out["ratio_unbounded"] = True
        return out


def evaluate(instance, online, offline, trace=None, mu=None, rtol=1e-6):
    """Compare an online result with an offline one on the same instance.

    With an ACE ``trace`` the report also carries the slack of the per-step
    weight bound ``2 * ell * log2(mu) * |A| - W`` (smallest over all steps)
    and of the rejected-by-online bound ``W_final - sum of chain lengths of
    requests admitted offline but rejected online``.
    """
    instance = check_instance(instance)
    for name, result in (("online", online), ("offline", offline)):
        report = verify_solution(instance, result)
        if not report.ok:
            raise MismatchedInstanceError(f"{name} result does not fit the instance: {report.summary()}")
    params = AceParams.for_instance(instance, mu)
    ratio = offline_online_ratio(offline.objective, online.objective)
    rep = RatioReport(
        online_objective=online.objective,
        offline_objective=offline.objective,
        offline_optimal=offline.optimal,
        ratio=ratio,
        mu=params.mu,
        ell=params.ell,
        bound=params.competitive_bound,
        bound_satisfied=ratio <= params.competitive_bound,
        mincap_satisfied=min(instance.capacities, default=math.inf) >= params.log_mu,
    )
    if trace is not None:
        if len(trace) != len(instance.requests) or {
            r.index for r in trace if r.chain is not None
        } != set(online.admitted):
            raise MismatchedInstanceError("trace does not match the online result")
        slack = [params.step_weight_bound * r.admitted_count - r.total_weight for r in trace]
        rep.weight_bound_slack = min(slack, default=0.0)
        rep.weight_bound_holds = all(
            s >= -rtol * max(1.0, r.total_weight) for s, r in zip(slack, trace)
        )
        final_weight = trace[-1].total_weight if trace else 0.0
        missed = set(offline.admitted) - set(online.admitted)
        rep.rejection_bound_slack = final_weight - sum(instance.request_length(j) for j in missed)
        rep.rejection_bound_holds = rep.rejection_bound_slack >= -rtol * max(1.0, final_weight)
    return rep


# --------------------------------------------------------------------------- #
# Experiment sweeps

def build_instance(kind, params, seed=None):
    """Instance (and id) from a generator name and its keyword parameters."""
    params = dict(params)
    if kind == "random":
        inst = random_instance(seed=seed if seed is not None else 0, **params)
        return inst, f"random-seed{seed}"
    if kind == "adversarial":
        inst, _ = adversarial_instance(params["ell"], params["kappa"])
        return inst, f"adversarial-l{params['ell']}-k{params['kappa']}"
    if kind == "ksp":
        return ksp_to_scep(params["universe_size"], params["sets"], params["k"]), "ksp"
    if kind == "mis":
        return mis_to_scep((params["node_count"], params["edges"]), params["ell"]), "mis"
    raise ValueError(f"unknown generator {kind!r}")


@dataclass
class ExperimentConfig:
    algorithms: tuple
    instance_path: Optional[str] = None
    generator: Optional[str] = None
    generator_params: dict = field(default_factory=dict)
    seed: int = 0
    repetitions: int = 1
    out_dir: str = "."
    metrics_path: Optional[str] = None
    mu: Optional[float] = None
    node_budget: int = DEFAULT_NODE_BUDGET
    max_combinations: int = MAX_COMBINATIONS
    jobs: int = 1

    def __post_init__(self):
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        for algo in self.algorithms:
            if algo not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGORITHMS)}")
        if (self.instance_path is None) == (self.generator is None):
            raise ValueError("give exactly one of an instance file or a generator")


def _solve_one(config, rep):
    if config.instance_path is not None:
        instance = check_instance(config.instance_path)
        instance_id, seed = Path(config.instance_path).stem, None
    else:
        seed = config.seed + rep
        instance, instance_id = build_instance(config.generator, config.generator_params, seed)
    runs = [
        run_algorithm(instance, a, config.mu, config.node_budget, config.max_combinations)
        for a in config.algorithms
    ]
    return instance, instance_id, seed, runs


def write_outputs(out_dir, instance, instance_id, runs, write_instance=False):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if write_instance:
        path = out_dir / f"{instance_id}.instance.json"
        path.write_text(save_instance(instance))
        written.append(path)
    for run in runs:
        path = out_dir / f"{instance_id}.{run.algorithm}.result.json"
        path.write_text(run.result.to_json())
        written.append(path)
        if run.trace is not None:
            tpath = out_dir / f"{instance_id}.{run.algorithm}.trace.jsonl"
            tpath.write_text(dump_trace(run.trace))
            written.append(tpath)
    return written


def run_experiment(config):
    """Run every repetition; results and metrics are written from this process only."""
    reps = range(1 if config.instance_path is not None else config.repetitions)
    if config.jobs > 1 and len(reps) > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            outcomes = list(pool.map(_solve_one, [config] * len(reps), reps))
    else:
        outcomes = [_solve_one(config, rep) for rep in reps]
    metrics_path = Path(config.metrics_path or Path(config.out_dir) / "metrics.csv")
    all_rows = []
    for instance, instance_id, seed, runs in outcomes:
        write_outputs(config.out_dir, instance, instance_id, runs, write_instance=config.generator is not None)
        rows = metrics_for(instance, runs, instance_id, config.mu, seed)
        metrics_path.parent.mkdir(parents=True, exist_ok=True)
        append_metrics(metrics_path, rows)
        all_rows.extend(rows)
    return all_rows
