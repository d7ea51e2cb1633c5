"""Network graph, flow specs, per-edge delay model and path cost sums.

Nodes are switches or hosts identified by strings. All delays are integer
nanoseconds and all bandwidths integer bits/second so that path costs and
solver comparisons stay exact.
"""

from __future__ import annotations

import heapq
import json
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    DuplicateDeadline,
    EmptyTopology,
    InvalidParams,
    NonContiguousPath,
)

SPEED_OF_LIGHT_M_S = 299_792_458

SWITCH = "switch"
HOST = "host"

FORMAT_VERSION = 1


@dataclass
class Edge:
    """Undirected link. `residual_bps` is mutable reservation bookkeeping."""

    a: str
    b: str
    bandwidth_bps: int
    delay_ns: int
    residual_bps: int = -1

    def __post_init__(self):
        if self.a > self.b:
            self.a, self.b = self.b, self.a
        if self.residual_bps < 0:
            self.residual_bps = self.bandwidth_bps
        if self.bandwidth_bps <= 0:
            raise InvalidParams(f"edge {self.a}-{self.b}: bandwidth must be positive")
        if self.delay_ns <= 0:
            raise InvalidParams(f"edge {self.a}-{self.b}: delay must be positive")
        if self.residual_bps > self.bandwidth_bps:
            raise InvalidParams(f"edge {self.a}-{self.b}: residual exceeds bandwidth")

    @property
    def key(self) -> tuple[str, str]:
        return (self.a, self.b)

    def other(self, node: str) -> str:
        if node == self.a:
            return self.b
        if node == self.b:
            return self.a
        raise KeyError(f"{node} is not an endpoint of {self.a}-{self.b}")


class Topology:
    """Simple undirected graph of switches and hosts."""

    def __init__(self, queues_per_port: int = 8):
        if queues_per_port < 1:
            raise InvalidParams("queues_per_port must be >= 1")
        self.queues_per_port = queues_per_port
        self.nodes: dict[str, str] = {}  # id -> "switch" | "host"
        self.edges: dict[tuple[str, str], Edge] = {}

    def add_node(self, node_id: str, kind: str) -> None:
        if kind not in (SWITCH, HOST):
            raise InvalidParams(f"unknown node kind {kind!r}")
        self.nodes[node_id] = kind

    def add_edge(self, a: str, b: str, bandwidth_bps: int, delay_ns: int) -> Edge:
        if a == b:
            raise InvalidParams("self-loops are not allowed")
        for n in (a, b):
            if n not in self.nodes:
                raise InvalidParams(f"edge endpoint {n!r} is not a declared node")
        edge = Edge(a, b, bandwidth_bps, delay_ns)
        if edge.key in self.edges:
            raise InvalidParams(f"duplicate edge {a}-{b}")
        self.edges[edge.key] = edge
        return edge

    def edge_between(self, a: str, b: str) -> Edge:
        return self.edges[(a, b) if a < b else (b, a)]

    def has_edge(self, a: str, b: str) -> bool:
        return ((a, b) if a < b else (b, a)) in self.edges

    def neighbors(self, node: str) -> list[str]:
        out = []
        for edge in self.edges.values():
            if edge.a == node:
                out.append(edge.b)
            elif edge.b == node:
                out.append(edge.a)
        return sorted(out)

    def switches(self) -> list[str]:
        return sorted(n for n, k in self.nodes.items() if k == SWITCH)

    def hosts(self) -> list[str]:
        return sorted(n for n, k in self.nodes.items() if k == HOST)

    def host_switch(self, host: str) -> str:
        """The switch a host hangs off (hosts are leaves)."""
        for edge in self.edges.values():
            if host in (edge.a, edge.b):
                other = edge.other(host)
                if self.nodes[other] == SWITCH:
                    return other
        raise KeyError(f"host {host!r} has no switch link")

    def clone(self) -> "Topology":
        t = Topology(self.queues_per_port)
        t.nodes = dict(self.nodes)
        for edge in self.edges.values():
            e = t.add_edge(edge.a, edge.b, edge.bandwidth_bps, edge.delay_ns)
            e.residual_bps = edge.residual_bps
        return t

    def switch_diameter(self) -> int:
        """Max eccentricity over switch nodes in the switch-only subgraph."""
        switches = self.switches()
        adj = {s: [] for s in switches}
        for edge in self.edges.values():
            if self.nodes[edge.a] == SWITCH and self.nodes[edge.b] == SWITCH:
                adj[edge.a].append(edge.b)
                adj[edge.b].append(edge.a)
        best = 0
        for src in switches:
            dist = {src: 0}
            frontier = [src]
            while frontier:
                nxt = []
                for u in frontier:
                    for v in adj[u]:
                        if v not in dist:
                            dist[v] = dist[u] + 1
                            nxt.append(v)
                frontier = nxt
            if len(dist) != len(switches):
                raise InvalidParams("switch subgraph is disconnected")
            best = max(best, max(dist.values()))
        return best

    def to_json(self) -> dict:
        return {
            "format_version": FORMAT_VERSION,
            "queues_per_port": self.queues_per_port,
            "nodes": [
                {"id": n, "kind": self.nodes[n]} for n in sorted(self.nodes)
            ],
            "edges": [
                {
                    "a": e.a,
                    "b": e.b,
                    "bandwidth_bps": e.bandwidth_bps,
                    "delay_ns": e.delay_ns,
                }
                for e in sorted(self.edges.values(), key=lambda e: e.key)
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Topology":
        if doc.get("format_version") != FORMAT_VERSION:
            raise InvalidParams("unsupported topology format_version")
        topo = cls(queues_per_port=doc.get("queues_per_port", 8))
        for node in doc["nodes"]:
            topo.add_node(node["id"], node["kind"])
        for e in doc["edges"]:
            topo.add_edge(e["a"], e["b"], e["bandwidth_bps"], e["delay_ns"])
        return topo


@dataclass(frozen=True)
class FlowSpec:
    """One real-time flow: source/destination hosts, deadline and demand."""

    id: str
    source: str
    dest: str
    deadline_ns: int
    demand_bps: int

    def __post_init__(self):
        if self.source == self.dest:
            raise InvalidParams(f"flow {self.id}: source equals dest")
        if self.deadline_ns <= 0 or self.demand_bps <= 0:
            raise InvalidParams(f"flow {self.id}: deadline and demand must be positive")

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "source": self.source,
            "dest": self.dest,
            "deadline_ns": self.deadline_ns,
            "demand_bps": self.demand_bps,
        }


def load_flows(doc) -> list[FlowSpec]:
    """Parse a flow-set document; deadlines must be pairwise distinct."""
    if isinstance(doc, dict):
        if doc.get("format_version") != FORMAT_VERSION:
            raise InvalidParams("unsupported flow-set format_version")
        entries = doc["flows"]
    else:
        entries = doc
    flows = [
        FlowSpec(
            id=str(e["id"]),
            source=e["source"],
            dest=e["dest"],
            deadline_ns=e["deadline_ns"],
            demand_bps=e["demand_bps"],
        )
        for e in entries
    ]
    seen: dict[int, str] = {}
    for f in flows:
        if f.deadline_ns in seen:
            raise DuplicateDeadline(
                f"flows {seen[f.deadline_ns]} and {f.id} share deadline {f.deadline_ns} ns"
            )
        seen[f.deadline_ns] = f.id
    return flows


def flows_to_json(flows: Sequence[FlowSpec]) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "flows": [f.to_json() for f in flows],
    }


@dataclass(frozen=True)
class DelayModel:
    """Per-link delay components: processing, propagation and transmission."""

    processing_ns: int = 3600
    link_length_m: float = 100.0
    propagation_fraction_of_c: float = 0.66
    max_packet_bytes: int = 125

    def propagation_ns(self) -> int:
        speed = self.propagation_fraction_of_c * SPEED_OF_LIGHT_M_S
        return math.ceil(self.link_length_m * 1e9 / speed)

    def transmission_ns(self, bandwidth_bps: int) -> int:
        bits = self.max_packet_bytes * 8
        return math.ceil(bits * 1_000_000_000 / bandwidth_bps)


def edge_delay_bound(model: DelayModel, bandwidth_bps: int) -> int:
    """Upper bound on one-hop delay for a max-size packet, in ns."""
    if bandwidth_bps <= 0:
        raise InvalidParams("bandwidth must be positive")
    return (
        model.processing_ns
        + model.propagation_ns()
        + model.transmission_ns(bandwidth_bps)
    )


@dataclass(frozen=True)
class PathCost:
    """Additive two-part path cost: total delay and summed utilization."""

    delay_ns: int
    bw_util: Fraction


def walk_nodes(path: Sequence[Edge], start: Optional[str] = None) -> list[str]:
    """Node sequence of an edge walk; raises NonContiguousPath if broken."""
    if not path:
        return [] if start is None else [start]
    first = path[0]
    if start is None:
        if len(path) == 1:
            start = first.a
        else:
            nxt = set(path[1].key)
            if first.b in nxt:
                start = first.a
            elif first.a in nxt:
                start = first.b
            else:
                raise NonContiguousPath(f"edges {first.key} and {path[1].key} do not touch")
    nodes = [start]
    cur = start
    for edge in path:
        if cur not in (edge.a, edge.b):
            raise NonContiguousPath(f"edge {edge.key} does not start at {cur}")
        cur = edge.other(cur)
        nodes.append(cur)
    return nodes


def path_delay(topology: Topology, path: Sequence[Edge]) -> int:
    """Sum of per-edge delay bounds along a walk, in ns."""
    walk_nodes(path)
    return sum(e.delay_ns for e in path)


def path_bw_utilization(
    topology: Topology, path: Sequence[Edge], flow: FlowSpec
) -> Fraction:
    """Sum of demand/bandwidth fractions along a walk (dimensionless)."""
    walk_nodes(path)
    return sum(
        (Fraction(flow.demand_bps, e.bandwidth_bps) for e in path), Fraction(0)
    )


def bw_util_bound(topology: Topology, flow: FlowSpec) -> Fraction:
    """Utilization budget: (max per-edge utilization) times |nodes|.

    Any simple path has fewer than |nodes| edges, each contributing at most
    the max term, so this bound always dominates path_bw_utilization.
    """
    if not topology.edges:
        raise EmptyTopology("bw_util_bound needs at least one edge")
    worst = max(
        Fraction(flow.demand_bps, e.bandwidth_bps) for e in topology.edges.values()
    )
    return worst * len(topology.nodes)


def _prufer_tree(rng: random.Random, n: int) -> list[tuple[int, int]]:
    """Uniform random labeled tree on n nodes via a Prufer sequence."""
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    seq = [rng.randrange(n) for _ in range(n - 2)]
    degree = [1] * n
    for x in seq:
        degree[x] += 1
    edges = []
    leaves = [i for i in range(n) if degree[i] == 1]
    heapq.heapify(leaves)
    for x in seq:
        leaf = heapq.heappop(leaves)
        edges.append((leaf, x))
        degree[x] -= 1
        if degree[x] == 1:
            heapq.heappush(leaves, x)
    u = heapq.heappop(leaves)
    v = heapq.heappop(leaves)
    edges.append((u, v))
    return edges


def random_topology(
    seed,
    n_switches: int = 5,
    hosts_per_switch: int = 2,
    bandwidth_bps: int = 10_000_000,
    delay_range_ns: tuple[int, int] = (25_000, 125_000),
    extra_edge_prob: float = 0.3,
    queues_per_port: int = 8,
) -> Topology:
    """Connected random switch graph (uniform spanning tree plus extras)
    with leaf hosts; every edge gets a delay drawn uniformly from the range.
    """
    if n_switches < 2:
        raise InvalidParams("need at least 2 switches")
    if hosts_per_switch < 0:
        raise InvalidParams("hosts_per_switch must be >= 0")
    lo, hi = delay_range_ns
    if lo <= 0 or hi < lo:
        raise InvalidParams("delay_range_ns must be a nonempty positive range")
    if not 0.0 <= extra_edge_prob <= 1.0:
        raise InvalidParams("extra_edge_prob must be in [0, 1]")

    rng = random.Random(f"rtflow-topology:{seed}")
    topo = Topology(queues_per_port=queues_per_port)
    switches = [f"s{i}" for i in range(n_switches)]
    for s in switches:
        topo.add_node(s, SWITCH)

    for i, j in _prufer_tree(rng, n_switches):
        topo.add_edge(switches[i], switches[j], bandwidth_bps, rng.randint(lo, hi))
    for i in range(n_switches):
        for j in range(i + 1, n_switches):
            if topo.has_edge(switches[i], switches[j]):
                continue
            if rng.random() < extra_edge_prob:
                topo.add_edge(
                    switches[i], switches[j], bandwidth_bps, rng.randint(lo, hi)
                )

    for i in range(n_switches):
        for h in range(hosts_per_switch):
            host = f"h{h}s{i}"
            topo.add_node(host, HOST)
            topo.add_edge(host, switches[i], bandwidth_bps, rng.randint(lo, hi))
    return topo


def dump_json(doc: dict) -> str:
    """Canonical JSON encoding used for all files (byte-stable)."""
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
