"""Experiment harness: schedulability sweeps, delay CDFs and the
separate-vs-shared queue comparison. Every output is a pure function of
(config, seed); trials use derived string seeds so parallel execution
cannot change results.
"""

from __future__ import annotations

import csv
import heapq
import io
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import InvalidParams
from .layout import LayoutReport, layout_paths, verify_layout
from .model import (
    DelayModel,
    FlowSpec,
    Topology,
    edge_delay_bound,
    random_topology,
)
from .sim import (
    Burst,
    ConstantRate,
    SEPARATE_PER_FLOW,
    SHARED_SINGLE,
    SimParams,
    TrafficProfile,
    simulate,
)
from .solver import RelaxParams


def deadline_schedule(
    d_min_ns: int, flow_count: int, topology_diameter: Optional[int] = None
) -> list[int]:
    """Strictly increasing deadlines: d_min plus d_min/10 per extra flow.

    `d_min_ns` is expected to already be scaled by the topology diameter
    (the optional argument is informational).
    """
    if flow_count < 1:
        raise InvalidParams("flow_count must be >= 1")
    return [d_min_ns * (10 + k) // 10 for k in range(flow_count)]


def random_flows(
    topology: Topology,
    rng: random.Random,
    deadlines: Sequence[int],
    demand_range_bps: tuple[int, int],
) -> list[FlowSpec]:
    """Flows between distinct host pairs on distinct switches."""
    hosts = topology.hosts()
    used: set[tuple[str, str]] = set()
    flows = []
    for k, deadline in enumerate(deadlines):
        for _ in range(10_000):
            src, dst = rng.sample(hosts, 2)
            if topology.host_switch(src) == topology.host_switch(dst):
                continue
            if (src, dst) in used:
                continue
            used.add((src, dst))
            break
        else:
            raise InvalidParams("cannot find enough distinct host pairs")
        flows.append(
            FlowSpec(
                id=f"f{k}",
                source=src,
                dest=dst,
                deadline_ns=deadline,
                demand_bps=rng.randint(*demand_range_bps),
            )
        )
    return flows


# ---------------------------------------------------------------------------
# Acceptance-ratio sweep


@dataclass(frozen=True)
class SweepConfig:
    n_switches: int = 5
    hosts_per_switch: int = 2
    # Wide enough that 20 flows of 1-5 Mbps never exhaust a 5-switch fabric;
    # the deadline grid, not capacity, is what the sweep studies.
    bandwidth_bps: int = 100_000_000
    delay_range_ns: tuple[int, int] = (25_000, 125_000)
    extra_edge_prob: float = 0.3
    flow_counts: tuple[int, ...] = (2, 5, 8, 11, 14, 17, 20)
    # Base deadline per unit of switch-graph diameter (D_min = value * diameter).
    d_min_grid: tuple[int, ...] = (
        120_000,
        140_000,
        160_000,
        180_000,
        200_000,
        220_000,
        240_000,
        260_000,
    )
    trials_per_cell: int = 50
    demand_range_bps: tuple[int, int] = (1_000_000, 5_000_000)
    relax_x: int = 10
    seed: str = "0"

    def __post_init__(self):
        if self.trials_per_cell < 1:
            raise InvalidParams("trials_per_cell must be >= 1")
        if not self.flow_counts or not self.d_min_grid:
            raise InvalidParams("grids must be nonempty")


@dataclass
class AcceptanceSurface:
    trials_per_cell: int
    cells: dict[tuple[int, int], float] = field(default_factory=dict)

    def ratio(self, d_min: int, flow_count: int) -> float:
        return self.cells[(d_min, flow_count)]

    def to_csv_str(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["d_min_per_diameter_ns", "flow_count", "acceptance_ratio", "trials"])
        for (d_min, fc), ratio in sorted(self.cells.items()):
            writer.writerow([d_min, fc, f"{ratio:.6f}", self.trials_per_cell])
        return buf.getvalue()


def _sweep_trial(config: SweepConfig, trial: int) -> dict[tuple[int, int], bool]:
    """One random instance evaluated at every grid cell.

    The topology, host pairs and demands are drawn once per trial (common
    random numbers), deadlines vary with d_min, and flow sets are nested
    prefixes across flow counts: the greedy layout never looks ahead, so
    placing the first k flows is independent of the flows after them and
    one layout run per d_min covers every flow-count cell.
    """
    seed = f"{config.seed}:sweep:{trial}"
    topo = random_topology(
        seed,
        n_switches=config.n_switches,
        hosts_per_switch=config.hosts_per_switch,
        bandwidth_bps=config.bandwidth_bps,
        delay_range_ns=config.delay_range_ns,
        extra_edge_prob=config.extra_edge_prob,
    )
    diameter = topo.switch_diameter()
    fc_max = max(config.flow_counts)
    out: dict[tuple[int, int], bool] = {}
    for d_min in config.d_min_grid:
        deadlines = deadline_schedule(d_min * diameter, fc_max, diameter)
        rng = random.Random(f"{seed}:flows")
        flows = random_flows(topo, rng, deadlines, config.demand_range_bps)
        report = layout_paths(topo, flows, RelaxParams(config.relax_x))
        placed = [r.placed for r in report.results]  # in deadline order
        for fc in config.flow_counts:
            out[(d_min, fc)] = all(placed[:fc])
    return out


def _sweep_chunk(args) -> dict[tuple[int, int], int]:
    config, trials = args
    counts: dict[tuple[int, int], int] = {}
    for trial in trials:
        for key, ok in _sweep_trial(config, trial).items():
            counts[key] = counts.get(key, 0) + ok
    return counts


def acceptance_sweep(config: SweepConfig, jobs: int = 1) -> AcceptanceSurface:
    trials = list(range(config.trials_per_cell))
    surface = AcceptanceSurface(trials_per_cell=config.trials_per_cell)
    totals: dict[tuple[int, int], int] = {}
    if jobs > 1:
        chunks = [(config, trials[i::jobs]) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = pool.map(_sweep_chunk, chunks)
    else:
        results = [_sweep_chunk((config, trials))]
    for counts in results:
        for key, n in counts.items():
            totals[key] = totals.get(key, 0) + n
    for key, n in totals.items():
        surface.cells[key] = n / config.trials_per_cell
    return surface


# ---------------------------------------------------------------------------
# Deadline-satisfaction runs and delay CDF


@dataclass(frozen=True)
class CdfConfig:
    n_instances: int = 25
    rt_flows: int = 7
    best_effort_range: tuple[int, int] = (1, 3)
    n_switches: int = 5
    hosts_per_switch: int = 2
    bandwidth_bps: int = 10_000_000
    delay_range_ns: tuple[int, int] = (25_000, 125_000)
    extra_edge_prob: float = 0.3
    d1_per_diameter_ns: int = 100_000
    d_increment_ns: int = 10_000
    demand_range_bps: tuple[int, int] = (1_000_000, 5_000_000)
    duration_ns: int = 1_000_000_000
    relax_x: int = 10
    seed: str = "0"


@dataclass
class CdfResult:
    # Empirical CDF of one-way per-packet delay across all real-time flows.
    points: list[tuple[int, float]]
    total_packets: int
    total_misses: int
    instances: list[dict]

    def to_csv_str(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["delay_ns", "cumulative_fraction"])
        for delay, frac in self.points:
            writer.writerow([delay, f"{frac:.9f}"])
        return buf.getvalue()


def _shortest_delay_path(topology: Topology, src: str, dst: str) -> list[str]:
    """Dijkstra on edge delay; used to route best-effort traffic."""
    dist = {src: 0}
    prev: dict[str, str] = {}
    heap = [(0, src)]
    while heap:
        d, u = heapq.heappop(heap)
        if u == dst:
            break
        if d > dist[u]:
            continue
        for v in topology.neighbors(u):
            nd = d + topology.edge_between(u, v).delay_ns
            if v not in dist or nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if dst not in dist:
        raise InvalidParams(f"no path between {src} and {dst}")
    path = [dst]
    while path[-1] != src:
        path.append(prev[path[-1]])
    path.reverse()
    return path


def schedulable_instance(
    config: CdfConfig, index: int
) -> tuple[Topology, list[FlowSpec], LayoutReport, int]:
    """Draw random instances until one is fully schedulable and verified."""
    for attempt in range(1000):
        seed = f"{config.seed}:cdf:{index}:{attempt}"
        topo = random_topology(
            seed,
            n_switches=config.n_switches,
            hosts_per_switch=config.hosts_per_switch,
            bandwidth_bps=config.bandwidth_bps,
            delay_range_ns=config.delay_range_ns,
            extra_edge_prob=config.extra_edge_prob,
        )
        diameter = topo.switch_diameter()
        deadlines = [
            config.d1_per_diameter_ns * diameter + config.d_increment_ns * k
            for k in range(config.rt_flows)
        ]
        rng = random.Random(f"{seed}:flows")
        flows = random_flows(topo, rng, deadlines, config.demand_range_bps)
        report = layout_paths(topo, flows, RelaxParams(config.relax_x))
        if report.schedulable and not verify_layout(topo, flows, report):
            return topo, flows, report, diameter
    raise InvalidParams("could not draw a schedulable instance")


def _rt_profile(flow: FlowSpec, duration_ns: int) -> TrafficProfile:
    """Bursty source: 5 packets per millisecond at the reserved rate, so
    packet size tracks the demand."""
    packet_bytes = max(25, min(125, flow.demand_bps // 40_000))
    return TrafficProfile(
        flow_id=flow.id,
        send_rate_bps=packet_bytes * 40_000,
        duration_ns=duration_ns,
        packet_bytes=packet_bytes,
        pattern=Burst(burst_size=5, inter_burst_ns=1_000_000),
    )


def delay_cdf_run(config: CdfConfig) -> CdfResult:
    all_delays: list[int] = []
    total_misses = 0
    instances = []
    for i in range(config.n_instances):
        topo, flows, report, diameter = schedulable_instance(config, i)
        profiles = [_rt_profile(f, config.duration_ns) for f in flows]
        rng = random.Random(f"{config.seed}:cdf:{i}:be")
        n_be = rng.randint(*config.best_effort_range)
        best_effort = []
        hosts = topo.hosts()
        for b in range(n_be):
            src, dst = rng.sample(hosts, 2)
            path = _shortest_delay_path(topo, src, dst)
            best_effort.append(
                (
                    TrafficProfile(
                        flow_id=f"be{b}",
                        send_rate_bps=2_000_000,
                        duration_ns=config.duration_ns,
                        packet_bytes=125,
                        pattern=ConstantRate(),
                    ),
                    path,
                )
            )
        sim = simulate(
            topo,
            report,
            flows,
            profiles,
            SEPARATE_PER_FLOW,
            seed=f"{config.seed}:cdf:{i}",
            best_effort=best_effort,
        )
        misses = sum(sim.flows[f.id].deadline_misses for f in flows)
        total_misses += misses
        rt_delays = [d for f in flows for d in sim.delays[f.id]]
        all_delays.extend(rt_delays)
        p99_x2 = 2 * max(sim.flows[f.id].p99_delay_ns for f in flows)
        instances.append(
            {
                "diameter": diameter,
                "deadline_misses": misses,
                "doubled_p99_ns": p99_x2,
                "round_trip_bound_ns": 2 * config.delay_range_ns[1] * diameter,
            }
        )
    all_delays.sort()
    n = len(all_delays)
    points: list[tuple[int, float]] = []
    for idx, delay in enumerate(all_delays):
        if idx + 1 == n or all_delays[idx + 1] != delay:
            points.append((delay, (idx + 1) / n))
    return CdfResult(
        points=points,
        total_packets=n,
        total_misses=total_misses,
        instances=instances,
    )


# ---------------------------------------------------------------------------
# Separate vs shared queue comparison


@dataclass(frozen=True)
class CompareConfig:
    reserved_bps: int = 50_000_000
    link_bps: int = 1_000_000_000
    packet_bytes: int = 125
    burst_size: int = 5
    rate_fracs: tuple[float, ...] = (0.5, 0.7, 0.9, 0.96)
    n_seeds: int = 20
    duration_ns: int = 100_000_000
    jitter_ns: int = 25_000
    bucket_packets: int = 8
    seed: str = "0"


@dataclass
class CompareRow:
    rate_frac: float
    seed: str
    mode: str
    mean_delay_ns: float
    p99_delay_ns: int


@dataclass
class CompareTable:
    rows: list[CompareRow] = field(default_factory=list)

    def mean_of(self, rate_frac: float, mode: str) -> float:
        vals = [
            r.mean_delay_ns
            for r in self.rows
            if r.rate_frac == rate_frac and r.mode == mode
        ]
        return sum(vals) / len(vals)

    def seed_pairs(self, rate_frac: float) -> list[tuple[float, float]]:
        """(separate mean, shared mean) per seed at one operating point."""
        by_seed: dict[str, dict[str, float]] = {}
        for r in self.rows:
            if r.rate_frac == rate_frac:
                by_seed.setdefault(r.seed, {})[r.mode] = r.mean_delay_ns
        return [
            (entry[SEPARATE_PER_FLOW], entry[SHARED_SINGLE])
            for entry in by_seed.values()
        ]

    def to_csv_str(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["rate_frac", "seed", "mode", "mean_delay_ns", "p99_delay_ns"])
        for r in self.rows:
            writer.writerow(
                [r.rate_frac, r.seed, r.mode, f"{r.mean_delay_ns:.1f}", r.p99_delay_ns]
            )
        return buf.getvalue()


def two_switch_fixture(config: CompareConfig) -> tuple[Topology, list[FlowSpec]]:
    """Two switches, two hosts each, both flows crossing the s0-s1 link."""
    topo = Topology()
    model = DelayModel(max_packet_bytes=config.packet_bytes)
    delay = edge_delay_bound(model, config.link_bps)
    for s in ("s0", "s1"):
        topo.add_node(s, "switch")
    for h in ("h0s0", "h1s0", "h0s1", "h1s1"):
        topo.add_node(h, "host")
    topo.add_edge("s0", "s1", config.link_bps, delay)
    topo.add_edge("h0s0", "s0", config.link_bps, delay)
    topo.add_edge("h1s0", "s0", config.link_bps, delay)
    topo.add_edge("h0s1", "s1", config.link_bps, delay)
    topo.add_edge("h1s1", "s1", config.link_bps, delay)
    flows = [
        FlowSpec("f0", "h0s0", "h0s1", deadline_ns=1_000_000_000, demand_bps=config.reserved_bps),
        FlowSpec("f1", "h1s0", "h1s1", deadline_ns=1_000_000_001, demand_bps=config.reserved_bps),
    ]
    return topo, flows


def queue_strategy_compare(config: CompareConfig) -> CompareTable:
    topo, flows = two_switch_fixture(config)
    report = layout_paths(topo, flows)
    if not report.schedulable:
        raise InvalidParams("fixture layout failed")
    params = SimParams(
        max_packet_bytes=config.packet_bytes,
        bucket_packets=config.bucket_packets,
        jitter_ns=config.jitter_ns,
    )
    bits = config.packet_bytes * 8
    table = CompareTable()
    for frac in config.rate_fracs:
        rate = int(config.reserved_bps * frac)
        inter = round(config.burst_size * bits * 1_000_000_000 / rate)
        profiles = [
            TrafficProfile(
                flow_id=f.id,
                send_rate_bps=rate,
                duration_ns=config.duration_ns,
                packet_bytes=config.packet_bytes,
                pattern=Burst(config.burst_size, inter),
            )
            for f in flows
        ]
        for s in range(config.n_seeds):
            seed = f"{config.seed}:compare:{s}"
            for mode in (SEPARATE_PER_FLOW, SHARED_SINGLE):
                sim = simulate(topo, report, flows, profiles, mode, seed, params)
                delays = [d for f in flows for d in sim.delays[f.id]]
                delays.sort()
                table.rows.append(
                    CompareRow(
                        rate_frac=frac,
                        seed=seed,
                        mode=mode,
                        mean_delay_ns=sum(delays) / len(delays),
                        p99_delay_ns=delays[max(0, len(delays) * 99 // 100 - 1)],
                    )
                )
    return table
