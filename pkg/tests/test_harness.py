import csv
import math

import pytest

from chainflow.ace import ace_run
from chainflow.exceptions import MismatchedInstanceError
from chainflow.harness import (
    METRICS_HEADER,
    ExperimentConfig,
    MetricsRow,
    append_metrics,
    build_instance,
    evaluate,
    metrics_for,
    offline_online_ratio,
    read_metrics,
    run_algorithm,
    run_experiment,
)
from chainflow.instance import explicit_instance
from chainflow.offline import SolveResult, brute_force

from conftest import small_instance


class TestRatio:
    @pytest.mark.parametrize(
        "off, on, expected",
        [(3, 3, 1.0), (0, 0, 1.0), (6, 2, 3.0), (1, 0, math.inf)],
    )
    def test_convention(self, off, on, expected):
        assert offline_online_ratio(off, on) == expected


class TestMetricsCsv:
    def row(self, **kw):
        base = dict(instance_id="x", algorithm="ace", objective=2, runtime_ms=1.5)
        base.update(kw)
        return MetricsRow(**base)

    def test_append_keeps_one_header(self, tmp_path):
        path = tmp_path / "m.csv"
        append_metrics(path, [self.row()])
        append_metrics(path, [self.row(algorithm="greedy", ratio_vs_offline=1.5, bound=6.17, bound_satisfied=True, seed=3)])
        lines = path.read_text().splitlines()
        assert lines[0].split(",") == METRICS_HEADER
        assert sum(line.startswith("instance_id") for line in lines) == 1
        rows = read_metrics(path)
        assert [r.algorithm for r in rows] == ["ace", "greedy"]
        assert rows[1].bound_satisfied is True and rows[1].seed == 3
        assert rows[0].ratio_vs_offline is None

    def test_infinite_ratio_round_trips(self, tmp_path):
        path = tmp_path / "m.csv"
        append_metrics(path, [self.row(ratio_vs_offline=math.inf)])
        assert math.isinf(read_metrics(path)[0].ratio_vs_offline)

    def test_foreign_header_rejected(self, tmp_path):
        path = tmp_path / "m.csv"
        with path.open("w", newline="") as fh:
            csv.writer(fh).writerow(["a", "b"])
        with pytest.raises(ValueError):
            append_metrics(path, [self.row()])
        with pytest.raises(ValueError):
            read_metrics(path)


class TestRunAlgorithm:
    @pytest.mark.parametrize("algo", ["ace", "greedy", "offline-bb", "offline-brute"])
    def test_each_algorithm(self, algo):
        inst = small_instance(2)
        run = run_algorithm(inst, algo)
        assert run.algorithm == algo and run.runtime_ms >= 0
        assert (run.trace is not None) == (algo == "ace")

    def test_unknown(self):
        with pytest.raises(ValueError):
            run_algorithm(small_instance(0), "simplex")

    def test_metrics_rows(self):
        inst = small_instance(6)
        runs = [run_algorithm(inst, a) for a in ("ace", "offline-bb")]
        rows = metrics_for(inst, runs, "i", seed=1)
        off = runs[1].result.objective
        assert rows[1].ratio_vs_offline == 1.0
        assert rows[0].ratio_vs_offline == offline_online_ratio(off, runs[0].result.objective)
        assert all(r.ratio_vs_offline >= 1 for r in rows)
        assert all(r.bound_satisfied for r in rows)

    def test_metrics_without_offline(self):
        inst = small_instance(6)
        rows = metrics_for(inst, [run_algorithm(inst, "ace")], "i")
        assert rows[0].ratio_vs_offline is None and rows[0].bound_satisfied is None


class TestEvaluate:
    def test_equal_results(self):
        inst = small_instance(1)
        off = brute_force(inst)
        rep = evaluate(inst, off, off)
        assert rep.ratio == 1.0 and rep.bound_satisfied

    def test_both_empty(self):
        inst = explicit_instance([1], [[]])
        empty = SolveResult.from_assignment(inst, {})
        assert evaluate(inst, empty, empty).ratio == 1.0

    def test_bound_for_ell_two(self):
        inst = explicit_instance([3, 3], [[(0, 1)], [(1, 0)]])
        online, trace = ace_run(inst)
        rep = evaluate(inst, online, brute_force(inst), trace=trace)
        assert rep.mu == 6 and rep.bound == pytest.approx(6.1699, abs=1e-4)
        assert rep.ratio <= rep.bound
        assert rep.weight_bound_holds and rep.rejection_bound_holds

    @pytest.mark.parametrize("seed", range(30))
    def test_residuals_nonnegative(self, seed):
        inst = small_instance(seed)
        online, trace = ace_run(inst)
        rep = evaluate(inst, online, brute_force(inst), trace=trace)
        assert rep.weight_bound_holds and rep.rejection_bound_holds and rep.bound_satisfied

    def test_unbounded_ratio_serializes_as_null(self):
        inst = explicit_instance([1], [[(0,)]])
        rep = evaluate(inst, SolveResult.from_assignment(inst, {}), brute_force(inst))
        doc = rep.to_dict()
        assert doc["ratio"] is None and doc["ratio_unbounded"] is True

    def test_mismatched_instance(self):
        a = explicit_instance([1, 1], [[(0,)], [(1,)]])
        b = explicit_instance([1], [[(0,)]])
        with pytest.raises(MismatchedInstanceError):
            evaluate(b, brute_force(a), brute_force(b))

    def test_mismatched_trace(self):
        inst = small_instance(2)
        other = small_instance(3)
        online, _ = ace_run(inst)
        _, foreign = ace_run(other)
        if len(foreign) == len(inst.requests):
            foreign = foreign[:-1]
        with pytest.raises(MismatchedInstanceError):
            evaluate(inst, online, brute_force(inst), trace=foreign)


class TestExperiment:
    def test_config_validation(self):
        with pytest.raises(ValueError):
            ExperimentConfig(algorithms=())
        with pytest.raises(ValueError):
            ExperimentConfig(algorithms=("lp",), generator="random")
        with pytest.raises(ValueError):
            ExperimentConfig(algorithms=("ace",))

    def test_build_instance(self):
        inst, name = build_instance("adversarial", {"ell": 4, "kappa": 2})
        assert len(inst.requests) == 14 and name == "adversarial-l4-k2"
        with pytest.raises(ValueError):
            build_instance("grid", {})

    def test_sweep_writes_outputs(self, tmp_path):
        params = dict(n=8, ell=2, instances_per_function=2, request_count=5, capacity=(3, 4))
        config = ExperimentConfig(
            algorithms=("ace", "offline-bb"),
            generator="random",
            generator_params=params,
            seed=10,
            repetitions=3,
            out_dir=str(tmp_path),
        )
        rows = run_experiment(config)
        assert [r.seed for r in rows] == [10, 10, 11, 11, 12, 12]
        assert (tmp_path / "random-seed11.ace.trace.jsonl").exists()
        assert (tmp_path / "random-seed12.offline-bb.result.json").exists()
        assert (tmp_path / "random-seed10.instance.json").exists()
        assert read_metrics(tmp_path / "metrics.csv") == rows

    def test_parallel_matches_serial(self, tmp_path):
        params = dict(n=8, ell=1, instances_per_function=2, request_count=6, capacity=(2, 3))
        common = dict(algorithms=("ace", "greedy"), generator="random", generator_params=params, repetitions=3)
        serial = run_experiment(ExperimentConfig(out_dir=str(tmp_path / "a"), **common))
        parallel = run_experiment(ExperimentConfig(out_dir=str(tmp_path / "b"), jobs=2, **common))
        key = lambda r: (r.instance_id, r.algorithm, r.objective)  # noqa: E731
        assert list(map(key, serial)) == list(map(key, parallel))
        for name in ("random-seed1.instance.json", "random-seed1.ace.result.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
