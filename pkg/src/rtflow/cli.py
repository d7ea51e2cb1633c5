"""Command-line entry points.

All commands are deterministic for a fixed seed: rerunning with the same
arguments writes byte-identical output files.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from pathlib import Path

import click

from . import __version__
from .errors import RtflowError
from .experiments import (
    CdfConfig,
    CompareConfig,
    SweepConfig,
    acceptance_sweep,
    delay_cdf_run,
    queue_strategy_compare,
)
from .intents import export_rules_str, synthesize
from .layout import LayoutReport, layout_paths, verify_layout
from .model import (
    FlowSpec,
    Topology,
    bw_util_bound,
    dump_json,
    load_flows,
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
from .solver import RelaxParams, WeightedInstance, dp_table, relax_weight


def _load_topology(path: str) -> Topology:
    with open(path) as fh:
        return Topology.from_json(json.load(fh))


def _load_flow_file(path: str) -> list[FlowSpec]:
    with open(path) as fh:
        return load_flows(json.load(fh))


def _write(out_dir: Path, name: str, text: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    target = out_dir / name
    target.write_text(text)
    return target


@click.group()
@click.version_option(__version__)
@click.option("--seed", default="0", show_default=True, help="Master seed (any string).")
@click.option("--jobs", default=1, show_default=True, type=click.IntRange(min=1))
@click.option(
    "--out-dir",
    default="out",
    show_default=True,
    type=click.Path(file_okay=False, path_type=Path),
)
@click.option(
    "--format",
    "fmt",
    default="json",
    show_default=True,
    type=click.Choice(["json", "csv"]),
)
@click.pass_context
def main(ctx, seed: str, jobs: int, out_dir: Path, fmt: str):
    """Real-time flow layout, rule synthesis and validation toolkit."""
    ctx.obj = {"seed": seed, "jobs": jobs, "out_dir": out_dir, "format": fmt}


def _dump_dp_tables(topo: Topology, flows: list[FlowSpec], x: int, out_dir: Path):
    """Debug aid: per-flow final DP table for the first solver attempt,
    computed on the unreserved topology."""
    edges = sorted(topo.edges.values(), key=lambda e: e.key)
    nodes = tuple(sorted(topo.nodes))
    for flow in flows:
        bhat = bw_util_bound(topo, flow)
        usable = [e for e in edges if e.bandwidth_bps >= flow.demand_bps]
        inst = WeightedInstance(
            nodes=nodes,
            edges=tuple(e.key for e in usable),
            w1=tuple(e.delay_ns for e in usable),
            w2=tuple(
                relax_weight(flow.demand_bps, e.bandwidth_bps * bhat, x)
                for e in usable
            ),
            source=flow.source,
            dest=flow.dest,
            c1=flow.deadline_ns,
            c2=x,
        )
        table = dp_table(inst)
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["node"] + [f"j{j}" for j in range(x + 1)])
        for node in nodes:
            writer.writerow(
                [node]
                + ["" if v is None else str(v) for v in table[node]]
            )
        _write(out_dir, f"dp_{flow.id}.csv", buf.getvalue())


@main.command()
@click.argument("topology_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("flows_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--relax-x", default=10, show_default=True, type=click.IntRange(min=1))
@click.option("--allow-partial", is_flag=True, help="Exit 0 even if some flows are rejected.")
@click.option("--dump-dp", is_flag=True, help="Also write per-flow DP tables (debug).")
@click.pass_context
def synth(ctx, topology_file, flows_file, relax_x, allow_partial, dump_dp):
    """Place flows and emit layout.json plus rules.json."""
    topo = _load_topology(topology_file)
    flows = _load_flow_file(flows_file)
    report = layout_paths(topo, flows, RelaxParams(relax_x))
    out_dir: Path = ctx.obj["out_dir"]
    _write(out_dir, "layout.json", report.to_json_str(flows))
    intents, queues = synthesize(topo, flows, report)
    _write(out_dir, "rules.json", export_rules_str(intents, queues))
    if dump_dp:
        _dump_dp_tables(topo, flows, relax_x, out_dir)
    placed = sum(1 for r in report.results if r.placed)
    click.echo(f"placed {placed}/{len(report.results)} flows -> {out_dir}")
    if not report.schedulable and not allow_partial:
        sys.exit(1)


@main.command()
@click.argument("topology_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("flows_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("layout_file", type=click.Path(exists=True, dir_okay=False))
def verify(topology_file, flows_file, layout_file):
    """Re-check every constraint of a previously computed layout."""
    topo = _load_topology(topology_file)
    flows = _load_flow_file(flows_file)
    with open(layout_file) as fh:
        report = LayoutReport.from_json(json.load(fh))
    violations = verify_layout(topo, flows, report)
    for v in violations:
        click.echo(f"{v.kind}: {v.subject}: {v.detail}")
    if violations:
        sys.exit(1)
    click.echo("layout ok")


def _parse_profiles(doc: dict) -> list[TrafficProfile]:
    profiles = []
    for entry in doc["profiles"]:
        pattern_doc = entry.get("pattern", {"type": "constant"})
        if pattern_doc["type"] == "burst":
            pattern = Burst(pattern_doc["burst_size"], pattern_doc["inter_burst_ns"])
        elif pattern_doc["type"] == "constant":
            pattern = ConstantRate()
        else:
            raise RtflowError(f"unknown pattern type {pattern_doc['type']!r}")
        profiles.append(
            TrafficProfile(
                flow_id=entry["flow"],
                send_rate_bps=entry["send_rate_bps"],
                duration_ns=entry["duration_ns"],
                packet_bytes=entry.get("packet_bytes", 125),
                pattern=pattern,
            )
        )
    return profiles


@main.command()
@click.argument("topology_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("flows_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("layout_file", type=click.Path(exists=True, dir_okay=False))
@click.argument("profiles_file", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--mode",
    default=SEPARATE_PER_FLOW,
    show_default=True,
    type=click.Choice([SEPARATE_PER_FLOW, SHARED_SINGLE]),
)
@click.option("--jitter-ns", default=0, show_default=True, type=click.IntRange(min=0))
@click.option("--strict", is_flag=True, help="Reject profiles that exceed the reservation.")
@click.pass_context
def simulate_cmd(ctx, topology_file, flows_file, layout_file, profiles_file, mode, jitter_ns, strict):
    """Replay traffic through a layout and report per-flow delays."""
    topo = _load_topology(topology_file)
    flows = _load_flow_file(flows_file)
    with open(layout_file) as fh:
        report = LayoutReport.from_json(json.load(fh))
    with open(profiles_file) as fh:
        profiles = _parse_profiles(json.load(fh))
    sim = simulate(
        topo,
        report,
        flows,
        profiles,
        mode,
        seed=ctx.obj["seed"],
        params=SimParams(jitter_ns=jitter_ns),
        strict=strict,
    )
    out_dir: Path = ctx.obj["out_dir"]
    if ctx.obj["format"] == "csv":
        target = _write(out_dir, "sim_report.csv", sim.to_csv_str())
    else:
        target = _write(out_dir, "sim_report.json", sim.to_json_str())
    misses = sum(s.deadline_misses for s in sim.flows.values())
    click.echo(f"simulated {len(profiles)} flows, {misses} deadline misses -> {target}")


main.add_command(simulate_cmd, name="simulate")


def _surface_json(surface) -> str:
    return dump_json(
        {
            "format_version": 1,
            "trials_per_cell": surface.trials_per_cell,
            "cells": [
                {
                    "d_min_per_diameter_ns": d_min,
                    "flow_count": fc,
                    "acceptance_ratio": ratio,
                }
                for (d_min, fc), ratio in sorted(surface.cells.items())
            ],
        }
    )


@main.command()
@click.option("--trials", default=50, show_default=True, type=click.IntRange(min=1))
@click.option("--full", is_flag=True, help="Use 250 trials per cell.")
@click.pass_context
def sweep(ctx, trials, full):
    """Acceptance-ratio surface over deadline tightness and flow count."""
    config = SweepConfig(trials_per_cell=250 if full else trials, seed=ctx.obj["seed"])
    surface = acceptance_sweep(config, jobs=ctx.obj["jobs"])
    out_dir: Path = ctx.obj["out_dir"]
    if ctx.obj["format"] == "csv":
        target = _write(out_dir, "acceptance_surface.csv", surface.to_csv_str())
    else:
        target = _write(out_dir, "acceptance_surface.json", _surface_json(surface))
    click.echo(f"swept {len(surface.cells)} cells -> {target}")


@main.command("delay-cdf")
@click.option("--instances", default=25, show_default=True, type=click.IntRange(min=1))
@click.option("--duration-ms", default=1000, show_default=True, type=click.IntRange(min=1))
@click.pass_context
def delay_cdf(ctx, instances, duration_ms):
    """Per-packet delay CDF across schedulable random instances."""
    config = CdfConfig(
        n_instances=instances,
        duration_ns=duration_ms * 1_000_000,
        seed=ctx.obj["seed"],
    )
    result = delay_cdf_run(config)
    out_dir: Path = ctx.obj["out_dir"]
    if ctx.obj["format"] == "csv":
        target = _write(out_dir, "delay_cdf.csv", result.to_csv_str())
    else:
        target = _write(
            out_dir,
            "delay_cdf.json",
            dump_json(
                {
                    "format_version": 1,
                    "total_packets": result.total_packets,
                    "total_misses": result.total_misses,
                    "points": [[d, f] for d, f in result.points],
                    "instances": result.instances,
                }
            ),
        )
    click.echo(
        f"{result.total_packets} packets, {result.total_misses} deadline misses -> {target}"
    )


@main.command("compare-queues")
@click.option("--seeds", default=20, show_default=True, type=click.IntRange(min=1))
@click.pass_context
def compare_queues(ctx, seeds):
    """Dedicated-queue vs shared-queue delay comparison."""
    config = CompareConfig(n_seeds=seeds, seed=ctx.obj["seed"])
    table = queue_strategy_compare(config)
    out_dir: Path = ctx.obj["out_dir"]
    if ctx.obj["format"] == "csv":
        target = _write(out_dir, "compare_queues.csv", table.to_csv_str())
    else:
        target = _write(
            out_dir,
            "compare_queues.json",
            dump_json(
                {
                    "format_version": 1,
                    "rows": [
                        {
                            "rate_frac": r.rate_frac,
                            "seed": r.seed,
                            "mode": r.mode,
                            "mean_delay_ns": round(r.mean_delay_ns, 1),
                            "p99_delay_ns": r.p99_delay_ns,
                        }
                        for r in table.rows
                    ],
                }
            ),
        )
    for frac in config.rate_fracs:
        sep = table.mean_of(frac, SEPARATE_PER_FLOW)
        sha = table.mean_of(frac, SHARED_SINGLE)
        click.echo(f"rate {frac:.2f}: separate {sep:.0f} ns, shared {sha:.0f} ns")
    click.echo(f"wrote {target}")


if __name__ == "__main__":
    main()
