"""Instance generators: lower-bound adversary, hardness reductions, random graphs."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Optional

from sklearn.base import clone

from .instance import (
    MAX_LENGTH,
    STRETCH,
    FunctionPlacement,
    Instance,
    NetworkGraph,
    Request,
    RouteConstraint,
    explicit_instance,
)
from .offline import SolveResult, verify_solution
from .validation import check_positive_int, is_power_of_two


@dataclass(frozen=True)
class PhaseGroup:
    phase: int
    group: int
    segment: tuple
    requests: tuple


@dataclass(frozen=True)
class PhaseSchedule:
    """Phase ``i`` splits the ``ell`` line nodes into ``2**i`` segments of
    ``ell / 2**i`` nodes; each segment receives ``kappa`` identical requests."""

    ell: int
    kappa: int
    phases: tuple

    @property
    def phase_count(self):
        return len(self.phases)

    def phase_requests(self, i):
        return [j for g in self.phases[i] for j in g.requests]

    @property
    def total_requests(self):
        return sum(len(g.requests) for groups in self.phases for g in groups)


def min_adversary_kappa(ell):
    """Smallest capacity the phase construction accepts (log2 of the line length)."""
    return max(1, math.ceil(math.log2(ell)))


def mincap_kappa(ell):
    """Smallest capacity meeting ACE's log2(2 * ell + 2) assumption."""
    return math.ceil(math.log2(2 * ell + 2))


def adversarial_instance(ell, kappa):
    """Explicit-mode lower-bound instance over a line of ``ell`` nodes.

    Returns ``(instance, schedule)``. Request order is phase by phase, group by
    group; each request's only candidate is its group's whole segment.
    """
    if not is_power_of_two(ell) or ell < 2:
        raise ValueError(f"ell must be a power of two >= 2, got {ell!r}")
    check_positive_int(kappa, "kappa", minimum=min_adversary_kappa(ell))
    phases = []
    candidates = []
    for i in range(int(math.log2(ell)) + 1):
        width = ell // 2**i
        groups = []
        for j in range(2**i):
            segment = tuple(range(j * width, (j + 1) * width))
            first = len(candidates)
            candidates.extend([[segment]] * kappa)
            groups.append(PhaseGroup(i, j, segment, tuple(range(first, first + kappa))))
        phases.append(tuple(groups))
    instance = explicit_instance([kappa] * ell, candidates)
    return instance, PhaseSchedule(ell, kappa, tuple(phases))


@dataclass
class AdversaryOutcome:
    stop_phase: int
    online_admitted: int
    offline_value: int
    ratio: float
    admitted_per_phase: list = field(default_factory=list)
    occupied_bounds: list = field(default_factory=list)
    capacity_used: int = 0
    capacity_total: int = 0
    offline_solution: Optional[SolveResult] = None
    offline_verified: bool = False

    @property
    def capacity_identity_holds(self):
        return self.capacity_used <= self.capacity_total

    def to_dict(self):
        return {
            "stop_phase": self.stop_phase,
            "online_admitted": self.online_admitted,
            "offline_value": self.offline_value,
            "ratio": None if math.isinf(self.ratio) else self.ratio,
            "admitted_per_phase": self.admitted_per_phase,
            "occupied_bounds": self.occupied_bounds,
            "capacity_used": self.capacity_used,
            "capacity_total": self.capacity_total,
            "capacity_identity_holds": self.capacity_identity_holds,
            "offline_verified": self.offline_verified,
        }


def phase_offline_solution(instance, schedule, phase):
    """Offline solution admitting exactly the requests of ``phase``."""
    assignment = {
        j: instance.requests[j].explicit_candidates[0] for j in schedule.phase_requests(phase)
    }
    return SolveResult.from_assignment(instance, assignment, optimal=False)


def adversary_run(online_algorithm, ell, kappa):
    """Play the phase adversary against an online admission estimator.

    The estimator (cloned, so the caller's object is untouched) receives one
    phase at a time through ``partial_fit``. The adversary then stops after
    the phase ``j`` where the online prefix count is smallest relative to the
    ``2**j * kappa`` requests an offline algorithm admits by taking phase
    ``j`` alone.
    """
    instance, schedule = adversarial_instance(ell, kappa)
    algo = clone(online_algorithm)
    admitted_per_phase = []
    seen = 0
    for i in range(schedule.phase_count):
        count = len(schedule.phase_requests(i))
        algo.partial_fit(instance, count)
        decisions = algo.decisions_[seen : seen + count]
        admitted_per_phase.append(sum(d.admitted for d in decisions))
        seen += count

    prefix = 0
    fractions = []
    occupied = []
    for j, x in enumerate(admitted_per_phase):
        prefix += x
        occupied.append(ell // 2**j * prefix)
        fractions.append((prefix / (2**j * kappa), j, prefix))
    _, stop, online = min(fractions)
    offline = 2**stop * kappa
    solution = phase_offline_solution(instance, schedule, stop)
    return AdversaryOutcome(
        stop_phase=stop,
        online_admitted=online,
        offline_value=offline,
        ratio=offline / online if online else math.inf,
        admitted_per_phase=admitted_per_phase,
        occupied_bounds=occupied,
        capacity_used=sum(ell // 2**i * x for i, x in enumerate(admitted_per_phase)),
        capacity_total=ell * kappa,
        offline_solution=solution,
        offline_verified=verify_solution(instance, solution).ok and solution.objective == offline,
    )


def ksp_to_scep(universe_size, sets, k):
    """Unit-capacity instance whose optimum equals the maximum k-set packing.

    Element ``u`` becomes node ``u``; sets smaller than ``k`` are padded with
    fresh auxiliary nodes. Every request may use every set's chain.
    """
    if k < 3:
        raise ValueError(f"k must be >= 3, got {k}")
    check_positive_int(universe_size, "universe_size", minimum=0)
    chains = []
    next_aux = universe_size
    for idx, members in enumerate(sets):
        members = sorted(set(members))
        if len(members) > k:
            raise ValueError(f"set {idx} has {len(members)} > k={k} elements")
        for u in members:
            if not 0 <= u < universe_size:
                raise ValueError(f"set {idx}: element {u} outside universe 0..{universe_size - 1}")
        pad = k - len(members)
        chains.append(tuple(members) + tuple(range(next_aux, next_aux + pad)))
        next_aux += pad
    return explicit_instance([1] * next_aux, [chains] * len(chains))


def mis_to_scep(graph, ell):
    """Unit-capacity instance whose optimum equals the maximum independent set.

    ``graph`` is a :class:`NetworkGraph` or a ``(node_count, edges)`` pair.
    Input edge ``e`` (in sorted order) becomes node ``e``; vertex ``v`` becomes
    the chain of its incident edges, padded with its own auxiliary nodes up to
    length ``ell``.
    """
    if ell < 3:
        raise ValueError(f"ell must be >= 3, got {ell}")
    if not isinstance(graph, NetworkGraph):
        n, edges = graph
        graph = NetworkGraph.from_edges(n, edges)
    incident = [[] for _ in range(graph.node_count)]
    for e, (u, v) in enumerate(graph.edges):
        incident[u].append(e)
        incident[v].append(e)
    worst = max((len(x) for x in incident), default=0)
    if worst > ell:
        raise ValueError(f"max degree {worst} exceeds ell={ell}")
    chains = []
    next_aux = len(graph.edges)
    for edges in incident:
        pad = ell - len(edges)
        chains.append(tuple(edges) + tuple(range(next_aux, next_aux + pad)))
        next_aux += pad
    return explicit_instance([1] * next_aux, [chains] * len(chains))


def random_instance(
    n,
    ell,
    instances_per_function,
    request_count,
    capacity=(1, 3),
    r=None,
    edge_probability=0.2,
    seed=0,
    stretch=None,
):
    """Seeded random graph-mode instance.

    The graph is a random spanning tree plus independent extra edges; each
    function type is placed on ``instances_per_function`` distinct nodes drawn
    uniformly (an int, or one count per function type). ``r=None`` leaves the
    walk length unbounded; ``stretch`` switches to a stretch constraint.
    """
    check_positive_int(n, "n")
    check_positive_int(ell, "ell")
    check_positive_int(request_count, "request_count", minimum=0)
    lo, hi = capacity
    check_positive_int(lo, "capacity lower bound")
    if hi < lo:
        raise ValueError(f"empty capacity range {capacity}")
    if not 0 <= edge_probability <= 1:
        raise ValueError(f"edge probability must lie in [0, 1], got {edge_probability}")
    counts = [instances_per_function] * ell if isinstance(instances_per_function, int) else list(instances_per_function)
    if len(counts) != ell or not all(1 <= c <= n for c in counts):
        raise ValueError(f"need {ell} instance counts in 1..{n}, got {counts}")

    rng = random.Random(seed)
    order = rng.sample(range(n), n)
    edges = set()
    for pos in range(1, n):
        u, v = order[pos], order[rng.randrange(pos)]
        edges.add((min(u, v), max(u, v)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in edges and rng.random() < edge_probability:
                edges.add((u, v))
    caps = tuple(rng.randint(lo, hi) for _ in range(n))
    placement = FunctionPlacement(tuple(tuple(rng.sample(range(n), c)) for c in counts))
    requests = tuple(Request(rng.randrange(n), rng.randrange(n)) for _ in range(request_count))
    if stretch is not None:
        constraint = RouteConstraint(STRETCH, stretch)
    else:
        constraint = RouteConstraint(MAX_LENGTH, math.inf if r is None else r)
    return Instance(NetworkGraph(n, tuple(sorted(edges)), caps), requests, placement, constraint)
