"""Problem data model: network, function placement, requests and candidate chains.

Two instance flavours exist. In *graph* mode a request is a source/target pair
and its candidate chains are every function-instance combination whose walk
fits the route constraint. In *explicit* mode each request lists its candidate
chains directly, which is how the lower-bound adversary and the hardness
reductions describe their instances.
"""
from __future__ import annotations

import itertools
import json
import math
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Optional, Sequence

from .exceptions import EnumerationTooLarge, InstanceError, InstanceParseError

GRAPH = "graph"
EXPLICIT = "explicit"
MAX_LENGTH = "max_length"
STRETCH = "stretch"

#: Default cap on the number of chains enumerated for one placement.
MAX_CHAINS = 10**7

#: Marker stored in distance tables for node pairs in different components.
UNREACHABLE = None

Chain = tuple  # ordered tuple of node ids, one per function position


@dataclass(frozen=True)
class NetworkGraph:
    node_count: int
    edges: tuple
    capacities: tuple

    def __post_init__(self):
        if isinstance(self.node_count, bool) or not isinstance(self.node_count, int) or self.node_count < 0:
            raise InstanceError("nodes", f"node count must be a non-negative integer, got {self.node_count!r}")
        if len(self.capacities) != self.node_count:
            raise InstanceError("nodes", "one capacity per node is required")
        for v, cap in enumerate(self.capacities):
            if isinstance(cap, bool) or not isinstance(cap, int) or cap < 1:
                raise InstanceError(f"nodes[{v}].capacity", f"capacity must be an integer >= 1, got {cap!r}")
        normalized = []
        for k, edge in enumerate(self.edges):
            if len(edge) != 2:
                raise InstanceError(f"edges[{k}]", "an edge has exactly two endpoints")
            u, v = edge
            for x in (u, v):
                if not _is_node(x, self.node_count):
                    raise InstanceError(f"edges[{k}]", f"endpoint {x!r} is not a node id")
            if u == v:
                raise InstanceError(f"edges[{k}]", f"self-loop at node {u}")
            normalized.append((min(u, v), max(u, v)))
        if len(set(normalized)) != len(normalized):
            raise InstanceError("edges", "duplicate edge")
        object.__setattr__(self, "edges", tuple(sorted(normalized)))
        object.__setattr__(self, "capacities", tuple(self.capacities))

    @classmethod
    def from_edges(cls, node_count, edges, capacity=1):
        """Build a graph with a uniform capacity (or a per-node sequence)."""
        if isinstance(capacity, int):
            capacity = (capacity,) * node_count
        return cls(node_count, tuple(tuple(e) for e in edges), tuple(capacity))

    def neighbors(self):
        adj = [[] for _ in range(self.node_count)]
        for u, v in self.edges:
            adj[u].append(v)
            adj[v].append(u)
        return adj


@dataclass(frozen=True)
class FunctionPlacement:
    """Nodes hosting an instance of each function type, in chain order."""

    instances: tuple

    def __post_init__(self):
        if len(self.instances) == 0:
            raise InstanceError("functions", "at least one function type is required")
        normalized = []
        for i, hosts in enumerate(self.instances):
            hosts = tuple(sorted(set(hosts)))
            if not hosts:
                raise InstanceError(f"functions[{i}]", "every function type needs at least one instance")
            normalized.append(hosts)
        object.__setattr__(self, "instances", tuple(normalized))

    @property
    def chain_length(self):
        return len(self.instances)

    def chain_count(self):
        return math.prod(len(hosts) for hosts in self.instances)


@dataclass(frozen=True)
class Request:
    source: Optional[int] = None
    target: Optional[int] = None
    explicit_candidates: Optional[tuple] = None

    def __post_init__(self):
        if self.explicit_candidates is not None:
            object.__setattr__(
                self, "explicit_candidates", tuple(tuple(c) for c in self.explicit_candidates)
            )


@dataclass(frozen=True)
class RouteConstraint:
    """Bound on the walk length: absolute hops, or a stretch over d(s, t).

    ``value`` may be ``math.inf`` in max_length mode for an unconstrained route.
    """

    mode: str = MAX_LENGTH
    value: float = math.inf

    def __post_init__(self):
        if self.mode == MAX_LENGTH:
            if self.value != math.inf and (
                isinstance(self.value, bool) or not isinstance(self.value, int) or self.value < 0
            ):
                raise InstanceError("constraint.value", "max_length needs an integer >= 0")
        elif self.mode == STRETCH:
            if isinstance(self.value, bool) or not isinstance(self.value, (int, float)) or not self.value >= 1:
                raise InstanceError("constraint.value", "stretch factor must be >= 1")
        else:
            raise InstanceError("constraint.mode", f"unknown mode {self.mode!r}")

    def limit(self, shortest):
        """Walk-length limit for a request whose endpoints are ``shortest`` hops apart."""
        if self.mode == MAX_LENGTH:
            return self.value
        if shortest is UNREACHABLE:
            return -1
        return math.ceil(self.value * shortest)


@dataclass(frozen=True)
class Instance:
    graph: NetworkGraph
    requests: tuple
    placement: Optional[FunctionPlacement] = None
    constraint: Optional[RouteConstraint] = None
    mode: str = GRAPH

    def __post_init__(self):
        object.__setattr__(self, "requests", tuple(self.requests))
        n = self.graph.node_count
        if self.mode == GRAPH:
            if self.placement is None:
                raise InstanceError("functions", "graph-mode instances need a function placement")
            if self.constraint is None:
                raise InstanceError("constraint", "graph-mode instances need a route constraint")
            for i, hosts in enumerate(self.placement.instances):
                for v in hosts:
                    if not _is_node(v, n):
                        raise InstanceError(f"functions[{i}]", f"{v!r} is not a node id")
            for i, req in enumerate(self.requests):
                if req.explicit_candidates is not None:
                    raise InstanceError(f"requests[{i}].candidates", "not allowed in graph mode")
                for name, x in (("s", req.source), ("t", req.target)):
                    if not _is_node(x, n):
                        raise InstanceError(f"requests[{i}].{name}", f"{x!r} is not a node id")
        elif self.mode == EXPLICIT:
            if self.placement is not None:
                raise InstanceError("functions", "not allowed in explicit mode")
            if self.constraint is not None:
                raise InstanceError("constraint", "not allowed in explicit mode")
            for i, req in enumerate(self.requests):
                if req.explicit_candidates is None:
                    raise InstanceError(f"requests[{i}].candidates", "required in explicit mode")
                for name, x in (("s", req.source), ("t", req.target)):
                    if x is not None and not _is_node(x, n):
                        raise InstanceError(f"requests[{i}].{name}", f"{x!r} is not a node id")
                lengths = {len(c) for c in req.explicit_candidates}
                if 0 in lengths:
                    raise InstanceError(f"requests[{i}].candidates", "empty chain")
                if len(lengths) > 1:
                    raise InstanceError(
                        f"requests[{i}].candidates",
                        f"candidate chains of one request must share a length, got {sorted(lengths)}",
                    )
                for k, chain in enumerate(req.explicit_candidates):
                    for v in chain:
                        if not _is_node(v, n):
                            raise InstanceError(f"requests[{i}].candidates[{k}]", f"{v!r} is not a node id")
        else:
            raise InstanceError("mode", f"unknown mode {self.mode!r}")

    @property
    def node_count(self):
        return self.graph.node_count

    @property
    def capacities(self):
        return self.graph.capacities

    def request_length(self, index):
        """Chain length demanded by request ``index`` (0 if it has no candidates)."""
        if self.mode == GRAPH:
            return self.placement.chain_length
        cands = self.requests[index].explicit_candidates
        return len(cands[0]) if cands else 0

    @property
    def max_chain_length(self):
        if self.mode == GRAPH:
            return self.placement.chain_length
        return max((self.request_length(i) for i in range(len(self.requests))), default=1) or 1

    @cached_property
    def distances(self):
        return hop_distances(self.graph)

    @cached_property
    def candidates(self):
        """Candidate chain list per request, in arrival order."""
        if self.mode == EXPLICIT:
            return tuple(req.explicit_candidates for req in self.requests)
        chains = enumerate_chains(self.placement)
        return tuple(
            tuple(_filter_chains(self.distances, chains, req, self.constraint)) for req in self.requests
        )

    def chain_universe(self):
        """Distinct chains appearing in at least one candidate set, in first-seen order."""
        if self.mode == GRAPH:
            usable = set().union(*map(set, self.candidates)) if self.requests else set()
            return [c for c in enumerate_chains(self.placement) if c in usable]
        return list(dict.fromkeys(c for cands in self.candidates for c in cands))


def _is_node(x, n):
    return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < n


def hop_distances(graph):
    """All-pairs hop distances by breadth-first search from every node.

    Returns a tuple of rows; ``dist[u][v]`` is ``UNREACHABLE`` (None) when u and
    v lie in different components.
    """
    adj = graph.neighbors()
    rows = []
    for src in range(graph.node_count):
        row = [UNREACHABLE] * graph.node_count
        row[src] = 0
        queue = deque([src])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if row[w] is UNREACHABLE:
                    row[w] = row[u] + 1
                    queue.append(w)
        rows.append(tuple(row))
    return tuple(rows)


def enumerate_chains(placement, max_chains=MAX_CHAINS):
    """Cartesian product of the instance sets, lexicographic in node ids."""
    size = placement.chain_count()
    if size > max_chains:
        raise EnumerationTooLarge(
            f"placement spans {size} chains, cap is {max_chains}", size=size, limit=max_chains
        )
    return [tuple(c) for c in itertools.product(*placement.instances)]


def walk_length(dist, chain, request):
    """Hop length of the walk s -> v_1 -> ... -> v_l -> t, or UNREACHABLE."""
    stops = (request.source, *chain, request.target)
    total = 0
    for u, v in zip(stops, stops[1:]):
        d = dist[u][v]
        if d is UNREACHABLE:
            return UNREACHABLE
        total += d
    return total


def _filter_chains(dist, chains, request, constraint):
    limit = constraint.limit(dist[request.source][request.target])
    out = []
    for chain in chains:
        length = walk_length(dist, chain, request)
        if length is not UNREACHABLE and length <= limit:
            out.append(chain)
    return out


def candidate_set(instance, request, max_chains=MAX_CHAINS):
    """Chains through which ``request`` may be routed, in enumeration order."""
    if instance.mode == EXPLICIT:
        return list(request.explicit_candidates)
    chains = enumerate_chains(instance.placement, max_chains=max_chains)
    return _filter_chains(instance.distances, chains, request, instance.constraint)


# --------------------------------------------------------------------------- #
# JSON document format

_TOP_FIELDS = {
    GRAPH: {"mode", "nodes", "edges", "functions", "constraint", "requests"},
    EXPLICIT: {"mode", "nodes", "edges", "requests"},
}


def instance_to_dict(instance):
    doc = {
        "mode": instance.mode,
        "nodes": [{"id": v, "capacity": c} for v, c in enumerate(instance.capacities)],
        "edges": [list(e) for e in instance.graph.edges],
    }
    if instance.mode == GRAPH:
        doc["functions"] = [list(hosts) for hosts in instance.placement.instances]
        value = instance.constraint.value
        doc["constraint"] = {"mode": instance.constraint.mode, "value": None if value == math.inf else value}
    requests = []
    for req in instance.requests:
        item = {}
        if req.source is not None:
            item["s"] = req.source
        if req.target is not None:
            item["t"] = req.target
        if req.explicit_candidates is not None:
            item["candidates"] = [list(c) for c in req.explicit_candidates]
        requests.append(item)
    doc["requests"] = requests
    return doc


def save_instance(instance):
    """Canonical JSON text: one top-level field per line, one list item per line."""
    return dump_document(instance_to_dict(instance))


def dump_document(doc):
    compact = dict(separators=(",", ":"))
    lines = ["{"]
    for k, (key, value) in enumerate(doc.items()):
        comma = "," if k < len(doc) - 1 else ""
        if isinstance(value, list) and value:
            items = [json.dumps(x, **compact) for x in value]
            body = ",\n  ".join(items)
            lines.append(f'"{key}":[\n  {body}\n]{comma}')
        else:
            lines.append(f'"{key}":{json.dumps(value, **compact)}{comma}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_instance(serialized):
    try:
        doc = json.loads(serialized)
    except json.JSONDecodeError as exc:
        raise InstanceParseError("<document>", f"invalid JSON: {exc}") from exc
    return instance_from_dict(doc)


def instance_from_dict(doc):
    if not isinstance(doc, dict):
        raise InstanceParseError("<document>", "top level must be a JSON object")
    mode = doc.get("mode", GRAPH)
    if mode not in _TOP_FIELDS:
        raise InstanceError("mode", f"unknown mode {mode!r}")
    unknown = set(doc) - _TOP_FIELDS[mode]
    if unknown:
        raise InstanceError(sorted(unknown)[0], f"unknown field in {mode}-mode document")

    nodes = _expect(doc, "nodes", list)
    caps = {}
    for k, node in enumerate(nodes):
        where = f"nodes[{k}]"
        if not isinstance(node, dict):
            raise InstanceParseError(where, "expected an object {id, capacity}")
        if set(node) - {"id", "capacity"}:
            raise InstanceError(where, f"unknown field {sorted(set(node) - {'id', 'capacity'})[0]!r}")
        for key in ("id", "capacity"):
            if key not in node:
                raise InstanceError(f"{where}.{key}", "missing")
        nid = node["id"]
        if not _is_node(nid, len(nodes)):
            raise InstanceError(f"{where}.id", f"ids must be 0..{len(nodes) - 1}, got {nid!r}")
        if nid in caps:
            raise InstanceError(f"{where}.id", f"duplicate node id {nid}")
        cap = node["capacity"]
        if isinstance(cap, bool) or not isinstance(cap, int) or cap < 1:
            raise InstanceError(f"nodes[{k}].capacity", f"capacity must be an integer >= 1, got {cap!r}")
        caps[nid] = cap
    n = len(nodes)

    edges = _expect(doc, "edges", list)
    for k, e in enumerate(edges):
        if not isinstance(e, list) or len(e) != 2:
            raise InstanceParseError(f"edges[{k}]", "expected [u, v]")
    graph = NetworkGraph(n, tuple(tuple(e) for e in edges), tuple(caps[v] for v in range(n)))

    placement = constraint = None
    if mode == GRAPH:
        functions = _expect(doc, "functions", list)
        for k, hosts in enumerate(functions):
            if not isinstance(hosts, list):
                raise InstanceParseError(f"functions[{k}]", "expected a list of node ids")
            for v in hosts:
                if not _is_node(v, n):
                    raise InstanceError(f"functions[{k}]", f"{v!r} is not a node id")
            if len(set(hosts)) != len(hosts):
                raise InstanceError(f"functions[{k}]", "duplicate node id")
        placement = FunctionPlacement(tuple(tuple(h) for h in functions))
        cdoc = _expect(doc, "constraint", dict)
        if set(cdoc) - {"mode", "value"}:
            raise InstanceError("constraint", f"unknown field {sorted(set(cdoc) - {'mode', 'value'})[0]!r}")
        if "mode" not in cdoc:
            raise InstanceError("constraint.mode", "missing")
        value = cdoc.get("value")
        if cdoc["mode"] == MAX_LENGTH and value is None:
            value = math.inf
        constraint = RouteConstraint(cdoc["mode"], value)

    requests = []
    allowed = {"s", "t"} if mode == GRAPH else {"s", "t", "candidates"}
    for k, item in enumerate(_expect(doc, "requests", list)):
        where = f"requests[{k}]"
        if not isinstance(item, dict):
            raise InstanceParseError(where, "expected an object")
        extra = set(item) - allowed
        if extra:
            raise InstanceError(f"{where}.{sorted(extra)[0]}", f"unknown field in {mode}-mode request")
        cands = item.get("candidates")
        if cands is not None:
            if not isinstance(cands, list) or not all(isinstance(c, list) for c in cands):
                raise InstanceParseError(f"{where}.candidates", "expected a list of node-id lists")
            cands = tuple(tuple(c) for c in cands)
        if mode == GRAPH:
            for key in ("s", "t"):
                if key not in item:
                    raise InstanceError(f"{where}.{key}", "missing")
        requests.append(Request(item.get("s"), item.get("t"), cands))
    return Instance(graph, tuple(requests), placement, constraint, mode)


def _expect(doc, key, kind):
    if key not in doc:
        raise InstanceError(key, "missing")
    value = doc[key]
    if not isinstance(value, kind):
        raise InstanceParseError(key, f"expected {kind.__name__}")
    return value


def explicit_instance(capacities, candidate_lists, endpoints: Optional[Sequence] = None):
    """Convenience constructor for explicit-mode instances without edges."""
    capacities = tuple(capacities)
    graph = NetworkGraph(len(capacities), (), capacities)
    requests = []
    for i, cands in enumerate(candidate_lists):
        s, t = endpoints[i] if endpoints is not None else (None, None)
        requests.append(Request(s, t, tuple(tuple(c) for c in cands)))
    return Instance(graph, tuple(requests), mode=EXPLICIT)
