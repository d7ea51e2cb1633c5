"""Seeded discrete-event replay of a layout under synthetic traffic.

Each hop is a token-bucket-shaped FIFO queue followed by a fixed link
latency. The shaper enforces the queue's configured rate (per-flow
reserved rate in separate-queue mode, the sum of reserved rates in
shared-queue mode) with a small burst allowance; the fixed latency covers
processing, propagation and serialization at the link bandwidth. All time
is integer nanoseconds; event ties break on a global sequence number, so
identical seeds give identical reports.
"""

from __future__ import annotations

import csv
import heapq
import io
import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from .errors import OverCapacityProfile, UnplacedFlow
from .layout import LayoutReport
from .model import FlowSpec, Topology, dump_json

SEPARATE_PER_FLOW = "separate"
SHARED_SINGLE = "shared"

_UNITS = 1_000_000_000  # token units per bit (token math stays integral)


@dataclass(frozen=True)
class ConstantRate:
    pass


@dataclass(frozen=True)
class Burst:
    burst_size: int
    inter_burst_ns: int

    def __post_init__(self):
        if self.burst_size < 1:
            raise ValueError("burst_size must be >= 1")
        if self.inter_burst_ns < 1:
            raise ValueError("inter_burst_ns must be >= 1")


@dataclass(frozen=True)
class TrafficProfile:
    flow_id: str
    send_rate_bps: int
    duration_ns: int
    packet_bytes: int = 125
    pattern: ConstantRate | Burst = ConstantRate()

    def packet_bits(self) -> int:
        return self.packet_bytes * 8


@dataclass(frozen=True)
class SimParams:
    max_packet_bytes: int = 125  # reference size the edge delay bound covers
    bucket_packets: int = 8  # shaper burst allowance, in packets
    jitter_ns: int = 0  # bounded send-time displacement, +/- this many ns


@dataclass
class FlowStats:
    packets_sent: int = 0
    packets_delivered: int = 0
    mean_delay_ns: int = 0
    p99_delay_ns: int = 0
    max_delay_ns: int = 0
    deadline_misses: int = 0


@dataclass
class SimReport:
    mode: str
    seed: str
    flows: dict[str, FlowStats] = field(default_factory=dict)
    delays: dict[str, list[int]] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "format_version": 1,
            "mode": self.mode,
            "seed": self.seed,
            "flows": {
                fid: {
                    "packets_sent": s.packets_sent,
                    "packets_delivered": s.packets_delivered,
                    "mean_delay_ns": s.mean_delay_ns,
                    "p99_delay_ns": s.p99_delay_ns,
                    "max_delay_ns": s.max_delay_ns,
                    "deadline_misses": s.deadline_misses,
                }
                for fid, s in sorted(self.flows.items())
            },
        }

    def to_json_str(self) -> str:
        return dump_json(self.to_json())

    def to_csv_str(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [
                "flow",
                "packets_sent",
                "packets_delivered",
                "mean_delay_ns",
                "p99_delay_ns",
                "max_delay_ns",
                "deadline_misses",
            ]
        )
        for fid, s in sorted(self.flows.items()):
            writer.writerow(
                [
                    fid,
                    s.packets_sent,
                    s.packets_delivered,
                    s.mean_delay_ns,
                    s.p99_delay_ns,
                    s.max_delay_ns,
                    s.deadline_misses,
                ]
            )
        return buf.getvalue()


class _Queue:
    __slots__ = ("rate_bps", "tokens", "cap", "tok_time", "last_release")

    def __init__(self, rate_bps: int, bucket_bits: int):
        self.rate_bps = rate_bps
        self.cap = bucket_bits * _UNITS
        self.tokens = self.cap
        self.tok_time = 0
        self.last_release = 0

    def release(self, arrival: int, bits: int) -> int:
        """Earliest FIFO- and token-feasible release time; consumes tokens."""
        t = arrival if arrival > self.last_release else self.last_release
        gained = (t - self.tok_time) * self.rate_bps
        tokens = self.tokens + gained
        if tokens > self.cap:
            tokens = self.cap
        need = bits * _UNITS
        if tokens < need:
            wait = -(-(need - tokens) // self.rate_bps)  # ceil division
            t += wait
            tokens += wait * self.rate_bps
            if tokens > self.cap:
                tokens = self.cap
        self.tokens = tokens - need
        self.tok_time = t
        self.last_release = t
        return t


def static_latency(edge, bits: int, params: SimParams) -> int:
    """Wait-free traversal time of one edge for a packet of `bits`.

    The edge's delay bound covers a max-size packet; smaller packets
    serialize faster, so the bound's transmission share is swapped out.
    Never exceeds the provisioned bound itself, so a layout's per-hop
    delay guarantee carries over to the simulation.
    """
    tx = math.ceil(bits * 1_000_000_000 / edge.bandwidth_bps)
    tx_ref = math.ceil(
        params.max_packet_bytes * 8 * 1_000_000_000 / edge.bandwidth_bps
    )
    base = edge.delay_ns - tx_ref
    if base < 0:
        base = 0
    return min(base + tx, edge.delay_ns)


def generate_send_times(
    profile: TrafficProfile, rng: random.Random, jitter_ns: int
) -> list[int]:
    """Packet emission times within [0, duration).

    Jitter is a bounded displacement of each emission from its nominal slot
    (never a cumulative drift), so the long-run rate is unchanged.
    """
    if profile.duration_ns <= 0:
        return []
    times: list[int] = []
    if isinstance(profile.pattern, Burst):
        gap = profile.pattern.inter_burst_ns
        per = profile.pattern.burst_size
    else:
        gap = max(1, round(profile.packet_bits() * 1_000_000_000 / profile.send_rate_bps))
        per = 1
    jitter = jitter_ns
    phase = rng.randrange(gap)
    k = 0
    while True:
        t = phase + k * gap
        if jitter:
            t += rng.randint(-jitter, jitter)
        if t < 0:
            t = 0
        if phase + k * gap >= profile.duration_ns:
            break
        times.extend([t] * per)
        k += 1
    return times


def _queue_key(mode: str, u: str, v: str, flow_id: str) -> tuple:
    if mode == SEPARATE_PER_FLOW:
        return (u, v, flow_id)
    return (u, v, "__shared__")


def simulate(
    topology: Topology,
    layout: LayoutReport,
    flows: Sequence[FlowSpec],
    profiles: Sequence[TrafficProfile],
    mode: str,
    seed,
    params: SimParams = SimParams(),
    strict: bool = False,
    best_effort: Sequence[tuple[TrafficProfile, list[str]]] = (),
) -> SimReport:
    """Run the event loop and collect per-flow delay statistics.

    `best_effort` entries are (profile, path) pairs routed through the
    shared default queue of each port at full link rate; they never touch
    the real-time flows' dedicated queues.
    """
    if mode not in (SEPARATE_PER_FLOW, SHARED_SINGLE):
        raise ValueError(f"unknown queue mode {mode!r}")
    by_id = {f.id: f for f in flows}
    paths: dict[str, list[str]] = {}
    for profile in profiles:
        result = layout.result_for(profile.flow_id)
        if not result.placed:
            raise UnplacedFlow(f"flow {profile.flow_id} is not placed")
        demand = by_id[profile.flow_id].demand_bps
        if strict and profile.send_rate_bps > demand:
            raise OverCapacityProfile(
                f"flow {profile.flow_id} sends {profile.send_rate_bps} bps "
                f"over its reserved {demand} bps"
            )
        paths[profile.flow_id] = result.path

    # Shared-queue service rate: sum of reserved rates of the flows that
    # cross each directed hop.
    hop_rate: dict[tuple[str, str], int] = {}
    for profile in profiles:
        path = paths[profile.flow_id]
        demand = by_id[profile.flow_id].demand_bps
        for u, v in zip(path, path[1:]):
            hop_rate[(u, v)] = hop_rate.get((u, v), 0) + demand

    queues: dict[tuple, _Queue] = {}

    def queue_for(key: tuple, rate: int, bits: int) -> _Queue:
        q = queues.get(key)
        if q is None:
            q = _Queue(rate, params.bucket_packets * bits)
            queues[key] = q
        return q

    # Pipelines: per traffic source, a list of (queue_key, rate, edge).
    pipelines: dict[str, list[tuple[tuple, int, object]]] = {}
    deadlines: dict[str, Optional[int]] = {}
    all_profiles: list[TrafficProfile] = []
    for profile in profiles:
        path = paths[profile.flow_id]
        demand = by_id[profile.flow_id].demand_bps
        stages = []
        if strict:
            stages.append(((path[0], profile.flow_id, "__police__"), demand, None))
        for u, v in zip(path, path[1:]):
            rate = demand if mode == SEPARATE_PER_FLOW else hop_rate[(u, v)]
            stages.append((_queue_key(mode, u, v, profile.flow_id), rate, topology.edge_between(u, v)))
        pipelines[profile.flow_id] = stages
        deadlines[profile.flow_id] = by_id[profile.flow_id].deadline_ns
        all_profiles.append(profile)
    for profile, path in best_effort:
        stages = []
        for u, v in zip(path, path[1:]):
            edge = topology.edge_between(u, v)
            stages.append(((u, v, "__default__"), edge.bandwidth_bps, edge))
        pipelines[profile.flow_id] = stages
        deadlines[profile.flow_id] = None
        all_profiles.append(profile)

    # Packet generation (seeded per flow; identical seed => identical run).
    packets: list[tuple[str, int, int]] = []  # (flow, send_time, bits)
    heap: list[tuple[int, int, int, int]] = []  # (time, seq, pkt, stage)
    seq = 0
    for profile in all_profiles:
        rng = random.Random(f"rtflow-sim:{seed}:{profile.flow_id}")
        for t in generate_send_times(profile, rng, params.jitter_ns):
            packets.append((profile.flow_id, t, profile.packet_bits()))
            heapq.heappush(heap, (t, seq, len(packets) - 1, 0))
            seq += 1

    delays: dict[str, list[int]] = {p.flow_id: [] for p in all_profiles}
    while heap:
        t, _, pkt, stage_idx = heapq.heappop(heap)
        flow_id, send_time, bits = packets[pkt]
        stages = pipelines[flow_id]
        key, rate, edge = stages[stage_idx]
        q = queue_for(key, rate, bits)
        out = q.release(t, bits)
        if edge is not None:
            out += static_latency(edge, bits, params)
        if stage_idx + 1 < len(stages):
            heapq.heappush(heap, (out, seq, pkt, stage_idx + 1))
            seq += 1
        else:
            delays[flow_id].append(out - send_time)

    report = SimReport(mode=mode, seed=str(seed))
    sent: dict[str, int] = {p.flow_id: 0 for p in all_profiles}
    for flow_id, _, _ in packets:
        sent[flow_id] += 1
    for profile in all_profiles:
        fid = profile.flow_id
        ds = delays[fid]
        stats = FlowStats(packets_sent=sent[fid], packets_delivered=len(ds))
        if ds:
            ds_sorted = sorted(ds)
            stats.mean_delay_ns = sum(ds_sorted) // len(ds_sorted)
            stats.p99_delay_ns = ds_sorted[max(0, math.ceil(0.99 * len(ds_sorted)) - 1)]
            stats.max_delay_ns = ds_sorted[-1]
            deadline = deadlines[fid]
            if deadline is not None:
                stats.deadline_misses = sum(1 for d in ds if d > deadline)
        report.flows[fid] = stats
        report.delays[fid] = ds
    return report


def deadline_check(report: SimReport, flows: Iterable[FlowSpec]) -> dict[str, bool]:
    """True iff the flow's worst observed one-way delay meets its budget."""
    out = {}
    for flow in flows:
        stats = report.flows.get(flow.id)
        if stats is None:
            continue
        out[flow.id] = stats.max_delay_ns <= flow.deadline_ns
    return out
