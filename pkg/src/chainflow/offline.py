"""Exact offline solvers for the 0-1 embedding program, plus a solution verifier.

Both solvers maximise the number of admitted requests subject to: one
candidate chain per admitted request, and per-node load within capacity. A
node's load is the number of admitted requests whose chain visits it.
"""
from __future__ import annotations

import json
import logging
import math
import sys
from dataclasses import dataclass, field
from itertools import combinations

from sklearn.base import BaseEstimator

from .exceptions import SearchSpaceTooLarge
from .validation import check_instance

logger = logging.getLogger(__name__)

MAX_COMBINATIONS = 10**7
DEFAULT_NODE_BUDGET = 2_000_000


@dataclass
class SolveResult:
    """Admitted requests, their chains and the resulting node loads."""

    admitted: tuple
    assignment: dict
    objective: int
    loads: dict
    optimal: bool = False

    @classmethod
    def from_assignment(cls, instance, assignment, optimal=False):
        assignment = {int(i): tuple(c) for i, c in sorted(assignment.items())}
        return cls(
            admitted=tuple(assignment),
            assignment=assignment,
            objective=len(assignment),
            loads=compute_loads(instance, assignment),
            optimal=optimal,
        )

    def to_dict(self):
        return {
            "admitted": list(self.admitted),
            "assignment": {str(i): list(c) for i, c in sorted(self.assignment.items())},
            "objective": self.objective,
            "loads": {str(v): n for v, n in sorted(self.loads.items())},
            "optimal": self.optimal,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), separators=(",", ":")) + "\n"

    @classmethod
    def from_dict(cls, doc):
        return cls(
            admitted=tuple(int(i) for i in doc["admitted"]),
            assignment={int(i): tuple(c) for i, c in doc["assignment"].items()},
            objective=int(doc["objective"]),
            loads={int(v): int(n) for v, n in doc["loads"].items()},
            optimal=bool(doc["optimal"]),
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def compute_loads(instance, assignment):
    loads = dict.fromkeys(range(instance.node_count), 0)
    for chain in assignment.values():
        for v in set(chain):
            loads[v] = loads.get(v, 0) + 1
    return loads


@dataclass
class Violation:
    constraint: str
    detail: str


@dataclass
class VerificationReport:
    violations: list = field(default_factory=list)
    used_nodes: frozenset = frozenset()

    @property
    def ok(self):
        return not self.violations

    def __bool__(self):
        return self.ok

    def summary(self):
        if self.ok:
            return "valid"
        return "; ".join(f"({v.constraint}) {v.detail}" for v in self.violations)


def verify_solution(instance, result):
    """Check ``result`` against the program's constraints.

    Constraint tags follow the program rows: ``2`` one chain per admitted
    request and none for rejected ones, ``3`` chain drawn from the request's
    candidate set, ``6`` node capacity. ``objective`` and ``loads`` flag
    bookkeeping that disagrees with the assignment.
    """
    instance = check_instance(instance)
    bad = []
    k = len(instance.requests)
    admitted = set(result.admitted)
    if len(admitted) != len(result.admitted):
        bad.append(Violation("2", "request admitted more than once"))
    for i in sorted(admitted | set(result.assignment)):
        if not 0 <= i < k:
            bad.append(Violation("2", f"request index {i} out of range"))
        elif i not in result.assignment:
            bad.append(Violation("2", f"admitted request {i} has no chain"))
        elif i not in admitted:
            bad.append(Violation("2", f"rejected request {i} holds chain {list(result.assignment[i])}"))
    if result.objective != len(admitted) or result.objective != len(result.assignment):
        bad.append(
            Violation("objective", f"objective {result.objective} != |admitted| {len(admitted)}")
        )
    for i, chain in sorted(result.assignment.items()):
        if 0 <= i < k and tuple(chain) not in instance.candidates[i]:
            bad.append(Violation("3", f"request {i} assigned to non-candidate chain {list(chain)}"))
    for v in {v for c in result.assignment.values() for v in c}:
        if not 0 <= v < instance.node_count:
            bad.append(Violation("6", f"chain uses unknown node {v}"))
    loads = compute_loads(instance, {i: c for i, c in result.assignment.items()})
    for v, used in sorted(loads.items()):
        if 0 <= v < instance.node_count and used > instance.capacities[v]:
            bad.append(Violation("6", f"node {v} carries {used} > capacity {instance.capacities[v]}"))
    reported = {v: n for v, n in result.loads.items() if n}
    if reported != {v: n for v, n in loads.items() if n}:
        bad.append(Violation("loads", "reported loads disagree with the assignment"))
    used_nodes = frozenset(v for v, n in loads.items() if n)
    return VerificationReport(bad, used_nodes)


def search_space_size(instance):
    return math.prod(len(c) + 1 for c in instance.candidates)


def _chain_demand(chain):
    return tuple((v, 1) for v in sorted(set(chain)))


def brute_force(instance, max_combinations=MAX_COMBINATIONS):
    """Exhaustive optimum with a canonical tie-break.

    Admission sets are visited by decreasing size and, within a size, in
    lexicographic order of request indices; each set is tried against every
    chain combination in lexicographic candidate order. The first feasible
    combination found is therefore the maximum-cardinality solution with the
    smallest admitted set and, after that, the smallest chain choices.
    """
    instance = check_instance(instance)
    size = search_space_size(instance)
    if size > max_combinations:
        raise SearchSpaceTooLarge(
            f"{size} admission/assignment combinations exceed {max_combinations}",
            size=size,
            limit=max_combinations,
        )
    cands = instance.candidates
    demands = [[_chain_demand(c) for c in cs] for cs in cands]
    eligible = [i for i, cs in enumerate(cands) if cs]
    residual = list(instance.capacities)

    def assign(subset, pos, picks):
        if pos == len(subset):
            return True
        i = subset[pos]
        for choice, demand in enumerate(demands[i]):
            if all(residual[v] >= m for v, m in demand):
                for v, m in demand:
                    residual[v] -= m
                picks.append(choice)
                if assign(subset, pos + 1, picks):
                    return True
                picks.pop()
                for v, m in demand:
                    residual[v] += m
        return False

    for size in range(len(eligible), 0, -1):
        for subset in combinations(eligible, size):
            picks = []
            if assign(subset, 0, picks):
                assignment = {i: cands[i][c] for i, c in zip(subset, picks)}
                return SolveResult.from_assignment(instance, assignment, optimal=True)
    return SolveResult.from_assignment(instance, {}, optimal=True)


class _BudgetExhausted(Exception):
    pass


def branch_and_bound(instance, node_budget=DEFAULT_NODE_BUDGET):
    """Depth-first branch and bound over requests sorted by candidate count.

    Each search node either assigns the current request to one of its
    candidates that still fits, or rejects it. The bound is the admitted count
    plus the number of undecided requests that still have a fitting candidate;
    a subtree is pruned when that bound cannot beat the incumbent. When more
    than ``node_budget`` search nodes are expanded the incumbent is returned
    with ``optimal=False``.

    Requests with identical candidate lists are interchangeable, so among them
    only solutions that admit a prefix, with non-decreasing chain indices, are
    explored. Any solution can be permuted into that form.
    """
    instance = check_instance(instance)
    cands = instance.candidates
    k = len(cands)
    order = sorted(range(k), key=lambda i: (len(cands[i]), cands[i], i))
    twin_of = [None] * k  # previous request in search order with the same candidates
    for pos in range(1, k):
        if cands[order[pos]] == cands[order[pos - 1]]:
            twin_of[pos] = order[pos - 1]
    demands = {i: [_chain_demand(c) for c in cands[i]] for i in range(k)}
    residual = list(instance.capacities)
    best = {"count": 0, "picks": {}}
    current = {}
    expanded = 0

    def fits(demand):
        return all(residual[v] >= m for v, m in demand)

    def bound(pos):
        extra = 0
        for i in order[pos:]:
            if any(fits(d) for d in demands[i]):
                extra += 1
        return len(current) + extra

    def search(pos):
        nonlocal expanded
        expanded += 1
        if expanded > node_budget:
            raise _BudgetExhausted
        if len(current) > best["count"]:
            best["count"] = len(current)
            best["picks"] = dict(current)
        if pos == k or bound(pos) <= best["count"]:
            return
        i = order[pos]
        twin = twin_of[pos]
        first = 0
        if twin is not None:
            first = current.get(twin, len(demands[i]))
        for choice in range(first, len(demands[i])):
            demand = demands[i][choice]
            if fits(demand):
                for v, m in demand:
                    residual[v] -= m
                current[i] = choice
                search(pos + 1)
                del current[i]
                for v, m in demand:
                    residual[v] += m
        search(pos + 1)

    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, k + 200))
    optimal = True
    try:
        search(0)
    except _BudgetExhausted:
        optimal = False
        logger.info("branch and bound stopped after %d nodes; returning incumbent", node_budget)
    finally:
        sys.setrecursionlimit(limit)
    assignment = {i: cands[i][c] for i, c in best["picks"].items()}
    return SolveResult.from_assignment(instance, assignment, optimal=optimal)


class BruteForceSolver(BaseEstimator):
    """Estimator wrapper around :func:`brute_force`."""

    def __init__(self, max_combinations=MAX_COMBINATIONS):
        self.max_combinations = max_combinations

    def fit(self, instance, y=None):
        self.instance_ = check_instance(instance)
        self.result_ = brute_force(self.instance_, max_combinations=self.max_combinations)
        return self

    def fit_predict(self, instance, y=None):
        return self.fit(instance).result_


class BranchAndBoundSolver(BaseEstimator):
    """Estimator wrapper around :func:`branch_and_bound`."""

    def __init__(self, node_budget=DEFAULT_NODE_BUDGET):
        self.node_budget = node_budget

    def fit(self, instance, y=None):
        self.instance_ = check_instance(instance)
        self.result_ = branch_and_bound(self.instance_, node_budget=self.node_budget)
        return self

    def fit_predict(self, instance, y=None):
        return self.fit(instance).result_
