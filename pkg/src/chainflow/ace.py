"""Online admission with exponential node costs (ACE) and a first-fit baseline.

Every node carries a cost ``kappa * (mu ** load_fraction - 1)``. A request is
admitted on its cheapest candidate chain when the summed per-unit cost
``sum(mu ** load_fraction - 1)`` along that chain is at most the chain length;
otherwise it is rejected. With ``mu = 2 * ell + 2`` and capacities of at least
``log2(mu)`` this keeps every node within capacity and admits an
``O(log ell)`` fraction of the offline optimum.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

from sklearn.base import BaseEstimator

from .offline import SolveResult
from .validation import check_instance

logger = logging.getLogger(__name__)

EPSILON = 1e-9

ADMITTED = "admitted"
NO_CANDIDATES = "no_candidates"
TOO_EXPENSIVE = "all_chains_too_expensive"
CAPACITY_GUARD = "capacity_guard"
NO_RESIDUAL = "no_residual_capacity"


class MinCapacityWarning(UserWarning):
    """Some node has capacity below log2(mu); ACE's load guarantee no longer applies."""


def default_mu(ell):
    return 2 * ell + 2


@dataclass(frozen=True)
class AceParams:
    ell: int
    mu: Optional[float] = None
    log_base: int = 2

    def __post_init__(self):
        if self.ell < 1:
            raise ValueError(f"ell must be >= 1, got {self.ell}")
        if self.mu is None:
            object.__setattr__(self, "mu", float(default_mu(self.ell)))
        if not self.mu > 1:
            raise ValueError(f"mu must exceed 1, got {self.mu}")

    @classmethod
    def for_instance(cls, instance, mu=None):
        return cls(ell=instance.max_chain_length, mu=mu)

    @property
    def standard(self):
        return self.mu == default_mu(self.ell)

    @property
    def log_mu(self):
        return math.log2(self.mu)

    @property
    def competitive_bound(self):
        """Offline/online ratio guaranteed when capacities are at least log2(mu)."""
        return 1 + 2 * self.log_mu

    @property
    def step_weight_bound(self):
        """Upper bound on the total-weight increase caused by one admission."""
        return 2 * self.ell * self.log_mu


@dataclass
class OnlineState:
    """Per-node count of admitted requests whose chain visits the node.

    A node hosting several functions of one chain serves that request once,
    so it is charged one unit per request, not per chain position.
    """

    used: list
    admitted: list = field(default_factory=list)
    assignment: dict = field(default_factory=dict)
    step: int = 0

    @classmethod
    def fresh(cls, instance):
        return cls(used=[0] * instance.node_count)

    def residual_fits(self, capacities, chain):
        return all(self.used[v] < capacities[v] for v in set(chain))

    def commit(self, index, chain):
        for v in set(chain):
            self.used[v] += 1
        self.admitted.append(index)
        self.assignment[index] = tuple(chain)

    def to_result(self, instance, optimal=False):
        return SolveResult.from_assignment(instance, self.assignment, optimal=optimal)


@dataclass(frozen=True)
class Decision:
    admitted: bool
    reason: str
    chain: Optional[tuple] = None
    cost: Optional[float] = None
    min_cost: Optional[float] = None
    threshold: Optional[float] = None

    def __post_init__(self):
        if self.admitted != (self.chain is not None):
            raise ValueError("a decision carries a chain exactly when it admits")


@dataclass(frozen=True)
class TraceRecord:
    index: int
    decision: str
    chain: Optional[tuple]
    cost: Optional[float]
    total_weight: float
    admitted_count: int
    threshold: Optional[float] = None
    min_cost: Optional[float] = None

    def to_dict(self):
        return {
            "index": self.index,
            "decision": self.decision,
            "chain": list(self.chain) if self.chain is not None else None,
            "cost": self.cost,
            "total_weight": self.total_weight,
            "admitted_count": self.admitted_count,
            "threshold": self.threshold,
            "min_cost": self.min_cost,
        }

    @classmethod
    def from_dict(cls, doc):
        chain = doc.get("chain")
        return cls(
            index=doc["index"],
            decision=doc["decision"],
            chain=tuple(chain) if chain is not None else None,
            cost=doc.get("cost"),
            total_weight=doc["total_weight"],
            admitted_count=doc["admitted_count"],
            threshold=doc.get("threshold"),
            min_cost=doc.get("min_cost"),
        )


def dump_trace(trace):
    return "".join(json.dumps(r.to_dict(), separators=(",", ":")) + "\n" for r in trace)


def load_trace(text):
    return [TraceRecord.from_dict(json.loads(line)) for line in text.splitlines() if line.strip()]


def relative_load(state, graph, v):
    return state.used[v] / graph.capacities[v]


def node_weight(state, graph, params, v):
    cap = graph.capacities[v]
    return cap * (params.mu ** (state.used[v] / cap) - 1)


def chain_cost(state, graph, params, chain):
    """Sum of w_v / kappa_v over the distinct nodes of ``chain``."""
    caps = graph.capacities
    return math.fsum(params.mu ** (state.used[v] / caps[v]) - 1 for v in sorted(set(chain)))


def total_weight(state, graph, params):
    return math.fsum(node_weight(state, graph, params, v) for v, n in enumerate(state.used) if n)


def ace_step(state, instance, params, index, candidates):
    """Decide request ``index``; on admission ``state`` is updated in place.

    Among candidates whose cost is within the threshold (the request's chain
    length, plus ``EPSILON``) and which still fit the residual capacities, the
    cheapest is taken; ties go to the earlier candidate.
    """
    if not candidates:
        return Decision(False, NO_CANDIDATES)
    threshold = len(candidates[0])
    graph = instance.graph
    best = best_cost = None
    min_cost = math.inf
    cheap_but_full = False
    for chain in candidates:
        cost = chain_cost(state, graph, params, chain)
        min_cost = min(min_cost, cost)
        if cost > threshold + EPSILON:
            continue
        if not state.residual_fits(graph.capacities, chain):
            cheap_but_full = True
            continue
        if best is None or cost < best_cost:
            best, best_cost = chain, cost
    if best is None:
        reason = CAPACITY_GUARD if cheap_but_full else TOO_EXPENSIVE
        if cheap_but_full:
            logger.debug("request %d rejected by the capacity guard", index)
        return Decision(False, reason, min_cost=min_cost, threshold=threshold)
    state.commit(index, best)
    return Decision(True, ADMITTED, tuple(best), best_cost, min_cost, threshold)


def greedy_step(state, instance, index, candidates):
    """First candidate with residual capacity at every position, if any."""
    if not candidates:
        return Decision(False, NO_CANDIDATES)
    for chain in candidates:
        if state.residual_fits(instance.capacities, chain):
            state.commit(index, chain)
            return Decision(True, ADMITTED, tuple(chain), threshold=len(chain))
    return Decision(False, NO_RESIDUAL, threshold=len(candidates[0]))


def mincap_satisfied(instance, params):
    return min(instance.capacities, default=math.inf) >= params.log_mu


class OnlineAdmission(BaseEstimator):
    """Shared driver for online admission estimators.

    ``fit`` processes every request of an instance in arrival order.
    ``partial_fit`` continues from where the previous call stopped, which lets
    an adversary observe decisions before revealing more requests.
    """

    def _start(self, instance):
        self.instance_ = instance
        self.state_ = OnlineState.fresh(instance)
        self.decisions_ = []

    def _decide(self, index, candidates):
        raise NotImplementedError

    def fit(self, instance, y=None):
        self._start(check_instance(instance))
        return self._advance(len(self.instance_.requests))

    def partial_fit(self, instance, count=None):
        """Process the next ``count`` requests of ``instance`` (all remaining by default)."""
        instance = check_instance(instance)
        if getattr(self, "instance_", None) is not instance:
            self._start(instance)
        remaining = len(instance.requests) - self.state_.step
        return self._advance(remaining if count is None else min(count, remaining))

    def _advance(self, count):
        cands = self.instance_.candidates
        for _ in range(count):
            j = self.state_.step
            self.decisions_.append(self._decide(j, list(cands[j])))
            self.state_.step += 1
        return self

    @property
    def result_(self):
        return self.state_.to_result(self.instance_)

    def fit_predict(self, instance, y=None):
        return self.fit(instance).result_


class ACE(OnlineAdmission):
    """Exponential-cost online admission.

    Parameters
    ----------
    mu : float, optional
        Cost base. ``None`` selects ``2 * ell + 2`` where ``ell`` is the longest
        chain of the instance; any other value is non-standard and voids the
        competitive guarantee.
    """

    def __init__(self, mu=None):
        self.mu = mu

    def _start(self, instance):
        super()._start(instance)
        self.params_ = AceParams.for_instance(instance, self.mu)
        self.mincap_ok_ = mincap_satisfied(instance, self.params_)
        if not self.params_.standard:
            logger.info("running ACE with non-standard mu=%s", self.params_.mu)
        if not self.mincap_ok_:
            msg = (
                f"min capacity {min(instance.capacities)} < log2(mu) = {self.params_.log_mu:.4f}; "
                "capacity is enforced by the hard guard only"
            )
            logger.warning(msg)
            if instance.mode == "graph":
                warnings.warn(msg, MinCapacityWarning, stacklevel=3)
        self.trace_ = []

    def _decide(self, index, candidates):
        decision = ace_step(self.state_, self.instance_, self.params_, index, candidates)
        self.trace_.append(
            TraceRecord(
                index=index,
                decision=decision.reason,
                chain=decision.chain,
                cost=decision.cost,
                total_weight=total_weight(self.state_, self.instance_.graph, self.params_),
                admitted_count=len(self.state_.admitted),
                threshold=decision.threshold,
                min_cost=decision.min_cost,
            )
        )
        return decision


class GreedyFirstFit(OnlineAdmission):
    """Admit whenever some candidate still fits; take the first one that does."""

    def _decide(self, index, candidates):
        return greedy_step(self.state_, self.instance_, index, candidates)


def ace_run(instance, params=None):
    """Run ACE over all requests; returns ``(SolveResult, trace)``."""
    est = ACE(mu=None if params is None else params.mu).fit(instance)
    return est.result_, est.trace_


def greedy_run(instance):
    return GreedyFirstFit().fit(instance).result_
