import numpy as np
import pytest
from scipy.optimize import Bounds, LinearConstraint, milp

from chainflow.instance import explicit_instance
from chainflow.lp import export_ilp, parse_lp
from chainflow.offline import brute_force

from conftest import small_instance

ONE = explicit_instance([1], [[(0,)]])


def solve_with_scipy(model):
    names = model.variables
    index = {n: k for k, n in enumerate(names)}
    c = np.zeros(len(names))
    for var, coef in model.objective.items():
        c[index[var]] = -coef if model.sense == "max" else coef
    if not model.rows:
        return 0.0
    a = np.zeros((len(model.rows), len(names)))
    lo = np.full(len(model.rows), -np.inf)
    hi = np.full(len(model.rows), np.inf)
    for r, row in enumerate(model.rows):
        for var, coef in row.coefficients.items():
            a[r, index[var]] = coef
        if row.sense in ("<=", "="):
            hi[r] = row.rhs
        if row.sense in (">=", "="):
            lo[r] = row.rhs
    res = milp(
        c,
        constraints=LinearConstraint(a, lo, hi),
        integrality=np.ones(len(names)),
        bounds=Bounds(0, 1),
    )
    assert res.success
    return -res.fun if model.sense == "max" else res.fun


class TestExport:
    def test_one_request_one_chain(self):
        text = export_ilp(ONE)
        assert "Maximize\n obj: x_0\nSubject To\n" in text
        for line in (
            " c2_r0: x_0 - x_c0_r0 = 0",
            " c4_c0_v0: x_c0 - x_v0 <= 0",
            " c5_v0: x_c0 - x_v0 >= 0",
            " c6_v0: x_c0_r0 - x_v0 <= 0",
        ):
            assert line in text.splitlines()
        assert text.endswith("End\n")

    def test_variable_count(self):
        inst = explicit_instance([1, 2, 1], [[(0, 1), (1, 2)], [(1, 2)], [(2, 0)]])
        model = parse_lp(export_ilp(inst))
        chains = 3  # (0,1), (1,2), (2,0)
        pairs = 2 + 1 + 1
        assert len(model.binaries) == 3 + chains + pairs + 3
        assert sorted(model.binaries) == sorted(model.variables)

    def test_capacity_coefficient(self):
        inst = explicit_instance([4], [[(0,)]])
        row = next(r for r in parse_lp(export_ilp(inst)).rows if r.name == "c6_v0")
        assert row.coefficients == {"x_c0_r0": 1.0, "x_v0": -4.0}
        assert row.sense == "<=" and row.rhs == 0

    def test_deterministic(self):
        inst = small_instance(9)
        assert export_ilp(inst) == export_ilp(inst)

    def test_long_rows_wrap_and_parse(self):
        inst = explicit_instance([20], [[(0,)]] * 20)
        text = export_ilp(inst)
        model = parse_lp(text)
        assert len(model.objective) == 20
        c6 = next(r for r in model.rows if r.name == "c6_v0")
        assert len(c6.coefficients) == 21


class TestParse:
    def test_round_trip_rows(self):
        inst = small_instance(5)
        model = parse_lp(export_ilp(inst))
        assert model.sense == "max"
        assert set(model.objective) == {f"x_{i}" for i in range(len(inst.requests))}
        assert len({r.name for r in model.rows}) == len(model.rows)

    def test_negative_rhs_and_comments(self):
        model = parse_lp("\\ note\nMinimize\n obj: 2 a + b\nSubject To\n r: a - 3 b >= -2\nBinary\n a b\nEnd\n")
        assert model.sense == "min"
        assert model.objective == {"a": 2.0, "b": 1.0}
        assert model.rows[0].coefficients == {"a": 1.0, "b": -3.0}
        assert model.rows[0].rhs == -2.0

    def test_missing_operator(self):
        with pytest.raises(ValueError):
            parse_lp("Maximize\n obj: a\nSubject To\n r: a + b\nEnd\n")


class TestExternalSolver:
    def test_two_requests_unit_capacity(self):
        inst = explicit_instance([1], [[(0,)], [(0,)]])
        assert solve_with_scipy(parse_lp(export_ilp(inst))) == pytest.approx(1)

    @pytest.mark.parametrize("seed", range(40))
    def test_matches_brute_force(self, seed):
        inst = small_instance(seed, mincap=seed % 2 == 0)
        value = solve_with_scipy(parse_lp(export_ilp(inst)))
        assert value == pytest.approx(brute_force(inst).objective, abs=1e-6)
