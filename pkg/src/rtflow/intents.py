"""Per-switch forwarding intents and egress-queue allocation.

Each placed flow becomes one intent per switch on its path. Every intent
reserves a dedicated egress queue at the flow's demand rate; queue 0 on
every used port is kept free for best-effort traffic.
"""

from __future__ import annotations

import ipaddress
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import PathNotPlaced, QueueExhausted
from .model import FlowSpec, Topology, dump_json
from .layout import LayoutReport

DEFAULT_QUEUE_ID = 0
DEFAULT_OWNER = "default"
UDP = 17


@dataclass(frozen=True)
class Match:
    """Packet classifier; unspecified fields are wildcards."""

    eth_type: Optional[int] = None
    ip_src: Optional[str] = None  # "a.b.c.d/len"
    ip_dst: Optional[str] = None
    ip_proto: Optional[int] = None
    l4_src_port: Optional[int] = None
    l4_dst_port: Optional[int] = None

    def __post_init__(self):
        fields = (
            self.eth_type,
            self.ip_src,
            self.ip_dst,
            self.ip_proto,
            self.l4_src_port,
            self.l4_dst_port,
        )
        if all(f is None for f in fields):
            raise ValueError("a match must specify at least one field")
        for prefix in (self.ip_src, self.ip_dst):
            if prefix is not None:
                net = ipaddress.ip_network(prefix, strict=False)
                if not 0 <= net.prefixlen <= 32:
                    raise ValueError(f"bad prefix length in {prefix}")

    def to_json(self) -> dict:
        doc = {}
        for name in ("eth_type", "ip_src", "ip_dst", "ip_proto", "l4_src_port", "l4_dst_port"):
            value = getattr(self, name)
            if value is not None:
                doc[name] = value
        return doc


@dataclass(frozen=True)
class Intent:
    flow_id: str
    switch: str
    match: Match
    in_port: int
    out_port: int
    rate_bps: int

    def __post_init__(self):
        if self.in_port == self.out_port:
            raise ValueError("intent in_port must differ from out_port")
        if self.rate_bps <= 0:
            raise ValueError("intent rate must be positive")


@dataclass(frozen=True)
class QueueConfig:
    switch: str
    port: int
    queue_id: int
    rate_bps: int
    owner: str  # flow id, or DEFAULT_OWNER for the best-effort queue


def port_map(topology: Topology, switch: str) -> dict[str, int]:
    """Deterministic small-integer port numbers: neighbors in sorted order,
    starting at 1."""
    return {nbr: i + 1 for i, nbr in enumerate(topology.neighbors(switch))}


def host_ip(topology: Topology, host: str) -> str:
    """Deterministic synthetic /32 for a host (topology files carry names)."""
    idx = topology.hosts().index(host)
    return f"10.0.{idx // 250}.{idx % 250 + 1}/32"


def default_match(topology: Topology, flow: FlowSpec) -> Match:
    return Match(
        ip_src=host_ip(topology, flow.source),
        ip_dst=host_ip(topology, flow.dest),
        ip_proto=UDP,
    )


def decompose(
    flow: FlowSpec,
    path: Sequence[str],
    topology: Topology,
    match: Optional[Match] = None,
) -> list[Intent]:
    """One intent per switch on the placed path."""
    if not path:
        raise PathNotPlaced(f"flow {flow.id} has no placed path")
    if match is None:
        match = default_match(topology, flow)
    intents = []
    for pos, node in enumerate(path):
        if topology.nodes[node] != "switch":
            continue
        if pos == 0 or pos == len(path) - 1:
            raise PathNotPlaced(f"flow {flow.id}: path must start and end at hosts")
        ports = port_map(topology, node)
        intents.append(
            Intent(
                flow_id=flow.id,
                switch=node,
                match=match,
                in_port=ports[path[pos - 1]],
                out_port=ports[path[pos + 1]],
                rate_bps=flow.demand_bps,
            )
        )
    if not intents:
        raise PathNotPlaced(f"flow {flow.id}: path crosses no switch")
    return intents


def allocate_queues(
    intents: Sequence[Intent], topology: Topology
) -> list[QueueConfig]:
    """Dedicated queue per flow per egress port; queue 0 reserved as default.

    Intents must arrive in flow-priority order so queue ids are stable.
    """
    next_id: dict[tuple[str, int], int] = {}
    assigned: dict[tuple[str, int, str], int] = {}
    configs: list[QueueConfig] = []
    default_done: set[tuple[str, int]] = set()

    for intent in intents:
        port_key = (intent.switch, intent.out_port)
        if port_key not in default_done:
            # Best-effort queue capped at the egress link's full bandwidth.
            nbr = _port_neighbor(topology, intent.switch, intent.out_port)
            configs.append(
                QueueConfig(
                    switch=intent.switch,
                    port=intent.out_port,
                    queue_id=DEFAULT_QUEUE_ID,
                    rate_bps=topology.edge_between(intent.switch, nbr).bandwidth_bps,
                    owner=DEFAULT_OWNER,
                )
            )
            default_done.add(port_key)
            next_id[port_key] = 1
        flow_key = (intent.switch, intent.out_port, intent.flow_id)
        if flow_key in assigned:
            continue
        qid = next_id[port_key]
        if qid >= topology.queues_per_port:
            raise QueueExhausted(
                f"no free queue on {intent.switch} port {intent.out_port}"
            )
        next_id[port_key] = qid + 1
        assigned[flow_key] = qid
        configs.append(
            QueueConfig(
                switch=intent.switch,
                port=intent.out_port,
                queue_id=qid,
                rate_bps=intent.rate_bps,
                owner=intent.flow_id,
            )
        )
    return configs


def _port_neighbor(topology: Topology, switch: str, port: int) -> str:
    for nbr, p in port_map(topology, switch).items():
        if p == port:
            return nbr
    raise KeyError(f"switch {switch} has no port {port}")


def synthesize(
    topology: Topology,
    flows: Sequence[FlowSpec],
    report: LayoutReport,
    matches: Optional[dict[str, Match]] = None,
) -> tuple[list[Intent], list[QueueConfig]]:
    """Intents plus queue configs for every placed flow, in priority order."""
    by_id = {f.id: f for f in flows}
    ordered = sorted(
        (r for r in report.results if r.placed),
        key=lambda r: by_id[r.flow_id].deadline_ns,
    )
    intents: list[Intent] = []
    for result in ordered:
        flow = by_id[result.flow_id]
        match = (matches or {}).get(flow.id)
        intents.extend(decompose(flow, result.path, topology, match))
    queues = allocate_queues(intents, topology)
    return intents, queues


def export_rules(
    intents: Sequence[Intent], queues: Sequence[QueueConfig]
) -> dict:
    """OpenFlow-like rule document; deterministic for identical inputs."""
    queue_of: dict[tuple[str, int, str], int] = {
        (q.switch, q.port, q.owner): q.queue_id for q in queues
    }
    switches: dict[str, dict] = {}
    for intent in intents:
        entry = switches.setdefault(intent.switch, {"rules": [], "queues": []})
        entry["rules"].append(
            {
                "match": intent.match.to_json(),
                "in_port": intent.in_port,
                "actions": [
                    {"set_queue": queue_of[(intent.switch, intent.out_port, intent.flow_id)]},
                    {"output": intent.out_port},
                ],
                "flow": intent.flow_id,
            }
        )
    for q in sorted(queues, key=lambda q: (q.switch, q.port, q.queue_id)):
        if q.switch not in switches:
            switches[q.switch] = {"rules": [], "queues": []}
        switches[q.switch]["queues"].append(
            {
                "port": q.port,
                "queue_id": q.queue_id,
                "rate_bps": q.rate_bps,
                "owner": q.owner,
            }
        )
    return {"format_version": 1, "switches": switches}


def export_rules_str(intents: Sequence[Intent], queues: Sequence[QueueConfig]) -> str:
    return dump_json(export_rules(intents, queues))
