"""Greedy priority-ordered path layout with residual-bandwidth bookkeeping.

Flows are processed tightest-deadline-first. Each flow gets two solver
attempts: first with the true delay bound and the utilization constraint
mapped onto the integer grid, then (if that fails) with delay mapped onto
the grid and the true utilization bound. Placed flows reserve bandwidth
and one egress queue per switch port on their path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DuplicateDeadline
from .model import (
    FlowSpec,
    PathCost,
    Topology,
    bw_util_bound,
    dump_json,
)
from .solver import RelaxParams, WeightedInstance, mcp_heuristic, relax_weight

BANDWIDTH_RELAXED = "bandwidth_relaxed"
DELAY_RELAXED = "delay_relaxed"

REASON_NO_PATH = "no_path"
REASON_QUEUE_EXHAUSTED = "queue_exhausted"


@dataclass
class LayoutResult:
    flow_id: str
    placed: bool
    path: Optional[list[str]] = None  # node sequence, source host to dest host
    branch: Optional[str] = None
    cost: Optional[PathCost] = None
    reason: Optional[str] = None

    def to_json(self, flow: Optional[FlowSpec] = None) -> dict:
        doc = {
            "id": self.flow_id,
            "status": "placed" if self.placed else "rejected",
            "branch": self.branch,
            "path": self.path,
            "delay_ns": self.cost.delay_ns if self.cost else None,
            "bw_util": float(self.cost.bw_util) if self.cost else None,
            "reason": self.reason,
        }
        if flow is not None:
            doc["deadline_ns"] = flow.deadline_ns
        return doc


@dataclass
class LayoutReport:
    results: list[LayoutResult] = field(default_factory=list)

    @property
    def schedulable(self) -> bool:
        return all(r.placed for r in self.results)

    def result_for(self, flow_id: str) -> LayoutResult:
        for r in self.results:
            if r.flow_id == flow_id:
                return r
        raise KeyError(flow_id)

    def placed(self) -> list[LayoutResult]:
        return [r for r in self.results if r.placed]

    def to_json(self, flows: Optional[Sequence[FlowSpec]] = None) -> dict:
        by_id = {f.id: f for f in flows} if flows else {}
        return {
            "format_version": 1,
            "schedulable": self.schedulable,
            "flows": [r.to_json(by_id.get(r.flow_id)) for r in self.results],
        }

    def to_json_str(self, flows: Optional[Sequence[FlowSpec]] = None) -> str:
        return dump_json(self.to_json(flows))

    @classmethod
    def from_json(cls, doc: dict) -> "LayoutReport":
        results = []
        for entry in doc["flows"]:
            placed = entry["status"] == "placed"
            cost = None
            if placed and entry.get("delay_ns") is not None:
                cost = PathCost(entry["delay_ns"], Fraction(entry["bw_util"]).limit_denominator(10**9))
            results.append(
                LayoutResult(
                    flow_id=entry["id"],
                    placed=placed,
                    path=entry.get("path"),
                    branch=entry.get("branch"),
                    cost=cost,
                    reason=entry.get("reason"),
                )
            )
        return cls(results)


def prioritize(flows: Sequence[FlowSpec]) -> list[FlowSpec]:
    """Delay-monotonic order: ascending deadline, processed first."""
    deadlines = [f.deadline_ns for f in flows]
    if len(set(deadlines)) != len(deadlines):
        raise DuplicateDeadline("flow deadlines must be pairwise distinct")
    return sorted(flows, key=lambda f: f.deadline_ns)


def _egress_ports(topology: Topology, path: list[str]) -> list[tuple[str, str]]:
    """Directed (switch, next-hop) pairs along a placed path."""
    ports = []
    for a, b in zip(path, path[1:]):
        if topology.nodes[a] == "switch":
            ports.append((a, b))
    return ports


def _path_edges(topology: Topology, path: list[str]):
    return [topology.edge_between(a, b) for a, b in zip(path, path[1:])]


def layout_paths(
    topology: Topology,
    flows: Sequence[FlowSpec],
    relax: RelaxParams = RelaxParams(),
) -> LayoutReport:
    """Place flows greedily in priority order; never aborts on a rejection.

    The caller's topology is not mutated; reservations run on a clone.
    """
    topo = topology.clone()
    x = relax.x
    rt_queue_capacity = topo.queues_per_port - 1  # queue 0 stays best-effort
    port_use: dict[tuple[str, str], int] = {}
    report = LayoutReport()

    for flow in prioritize(flows):
        bhat = bw_util_bound(topo, flow)
        usable = [
            e for e in sorted(topo.edges.values(), key=lambda e: e.key)
            if e.residual_bps >= flow.demand_bps
        ]
        edge_pairs = tuple(e.key for e in usable)
        nodes = tuple(sorted(topo.nodes))
        utils = [Fraction(flow.demand_bps, e.bandwidth_bps) for e in usable]

        path = None
        branch = None
        if usable:
            # Attempt 1: true delay bound, utilization on the integer grid.
            inst = WeightedInstance(
                nodes=nodes,
                edges=edge_pairs,
                w1=tuple(e.delay_ns for e in usable),
                w2=tuple(relax_weight(u, bhat, x) for u in utils),
                source=flow.source,
                dest=flow.dest,
                c1=flow.deadline_ns,
                c2=x,
            )
            path = mcp_heuristic(inst)
            branch = BANDWIDTH_RELAXED
            if path is None:
                # Attempt 2: delay on the integer grid, true utilization bound.
                inst = WeightedInstance(
                    nodes=nodes,
                    edges=edge_pairs,
                    w1=tuple(utils),
                    w2=tuple(
                        relax_weight(e.delay_ns, flow.deadline_ns, x) for e in usable
                    ),
                    source=flow.source,
                    dest=flow.dest,
                    c1=bhat,
                    c2=x,
                )
                path = mcp_heuristic(inst)
                branch = DELAY_RELAXED

        if path is None:
            report.results.append(
                LayoutResult(flow.id, placed=False, reason=REASON_NO_PATH)
            )
            continue

        ports = _egress_ports(topo, path)
        if any(port_use.get(p, 0) >= rt_queue_capacity for p in ports):
            report.results.append(
                LayoutResult(flow.id, placed=False, reason=REASON_QUEUE_EXHAUSTED)
            )
            continue

        edges = _path_edges(topo, path)
        for e in edges:
            e.residual_bps -= flow.demand_bps
        for p in ports:
            port_use[p] = port_use.get(p, 0) + 1
        cost = PathCost(
            delay_ns=sum(e.delay_ns for e in edges),
            bw_util=sum(
                (Fraction(flow.demand_bps, e.bandwidth_bps) for e in edges),
                Fraction(0),
            ),
        )
        report.results.append(
            LayoutResult(flow.id, placed=True, path=path, branch=branch, cost=cost)
        )
    return report


@dataclass(frozen=True)
class Violation:
    kind: str  # "delay" | "capacity" | "queue"
    subject: str  # flow id, edge key or port
    detail: str


def verify_layout(
    topology: Topology, flows: Sequence[FlowSpec], report: LayoutReport
) -> list[Violation]:
    """Recompute every constraint of a layout from scratch."""
    by_id = {f.id: f for f in flows}
    violations: list[Violation] = []
    edge_load: dict[tuple[str, str], int] = {}
    port_use: dict[tuple[str, str], int] = {}

    for result in report.results:
        if not result.placed:
            continue
        flow = by_id[result.flow_id]
        edges = _path_edges(topology, result.path)
        delay = sum(e.delay_ns for e in edges)
        if delay > flow.deadline_ns:
            violations.append(
                Violation(
                    "delay",
                    flow.id,
                    f"path delay {delay} ns exceeds deadline {flow.deadline_ns} ns",
                )
            )
        for e in edges:
            edge_load[e.key] = edge_load.get(e.key, 0) + flow.demand_bps
        for p in _egress_ports(topology, result.path):
            port_use[p] = port_use.get(p, 0) + 1

    for key, load in sorted(edge_load.items()):
        cap = topology.edges[key].bandwidth_bps
        if load > cap:
            violations.append(
                Violation(
                    "capacity",
                    f"{key[0]}-{key[1]}",
                    f"placed demand {load} bps exceeds bandwidth {cap} bps",
                )
            )
    limit = topology.queues_per_port - 1
    for port, count in sorted(port_use.items()):
        if count > limit:
            violations.append(
                Violation(
                    "queue",
                    f"{port[0]}->{port[1]}",
                    f"{count} flows need queues but only {limit} are available",
                )
            )
    return violations
