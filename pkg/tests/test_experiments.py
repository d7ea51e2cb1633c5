import pytest

from rtflow.errors import InvalidParams
from rtflow.experiments import (
    CdfConfig,
    CompareConfig,
    SweepConfig,
    acceptance_sweep,
    deadline_schedule,
    delay_cdf_run,
    queue_strategy_compare,
    schedulable_instance,
    two_switch_fixture,
)
from rtflow.layout import verify_layout
from rtflow.sim import SEPARATE_PER_FLOW, SHARED_SINGLE

TINY_SWEEP = SweepConfig(
    flow_counts=(2, 4),
    d_min_grid=(40_000, 150_000, 10_000_000),
    trials_per_cell=10,
    seed="tiny",
)


def test_deadline_schedule_increments():
    assert deadline_schedule(300_000, 3) == [300_000, 330_000, 360_000]
    assert deadline_schedule(100, 1) == [100]
    sched = deadline_schedule(250_000, 20)
    assert sched == sorted(set(sched))  # strictly increasing
    with pytest.raises(InvalidParams):
        deadline_schedule(100, 0)


def test_sweep_ratios_in_unit_interval():
    surface = acceptance_sweep(TINY_SWEEP)
    assert len(surface.cells) == 6
    assert all(0.0 <= r <= 1.0 for r in surface.cells.values())


def test_sweep_extreme_deadlines():
    surface = acceptance_sweep(TINY_SWEEP)
    # far below any single edge delay: nothing schedulable
    assert surface.ratio(40_000, 2) == 0.0
    assert surface.ratio(40_000, 4) == 0.0
    # budgets dominating every path: everything schedulable
    assert surface.ratio(10_000_000, 2) == 1.0


def test_sweep_trend_monotone():
    surface = acceptance_sweep(TINY_SWEEP)
    for fc in TINY_SWEEP.flow_counts:
        seq = [surface.ratio(d, fc) for d in TINY_SWEEP.d_min_grid]
        assert all(b >= a - 0.05 for a, b in zip(seq, seq[1:]))
    for d in TINY_SWEEP.d_min_grid:
        seq = [surface.ratio(d, fc) for fc in TINY_SWEEP.flow_counts]
        assert all(b <= a + 0.05 for a, b in zip(seq, seq[1:]))


def test_sweep_jobs_do_not_change_results():
    assert acceptance_sweep(TINY_SWEEP, jobs=1).cells == \
        acceptance_sweep(TINY_SWEEP, jobs=3).cells


def test_sweep_csv_shape():
    surface = acceptance_sweep(TINY_SWEEP)
    lines = surface.to_csv_str().strip().split("\n")
    assert len(lines) == 7
    assert lines[0].split(",")[0] == "d_min_per_diameter_ns"


def test_schedulable_instance_verifies():
    config = CdfConfig(seed="inst")
    topo, flows, report, diameter = schedulable_instance(config, 0)
    assert report.schedulable
    assert verify_layout(topo, flows, report) == []
    assert diameter >= 1
    assert len(flows) == config.rt_flows


def test_delay_cdf_properties():
    config = CdfConfig(n_instances=3, duration_ns=50_000_000, seed="cdf")
    result = delay_cdf_run(config)
    assert result.total_misses == 0
    fracs = [f for _, f in result.points]
    delays = [d for d, _ in result.points]
    assert delays == sorted(delays)
    assert fracs == sorted(fracs)
    assert fracs[-1] == pytest.approx(1.0)
    assert result.total_packets > 0
    csv_lines = result.to_csv_str().strip().split("\n")
    assert len(csv_lines) == len(result.points) + 1


def test_two_switch_fixture_layout():
    topo, flows = two_switch_fixture(CompareConfig())
    assert len(topo.switches()) == 2
    assert len(topo.hosts()) == 4
    assert {f.source for f in flows} == {"h0s0", "h1s0"}


def test_compare_table_shape_and_pairing():
    config = CompareConfig(
        rate_fracs=(0.5, 0.96), n_seeds=3, duration_ns=20_000_000, seed="cmp"
    )
    table = queue_strategy_compare(config)
    assert len(table.rows) == 2 * 3 * 2
    for frac in config.rate_fracs:
        pairs = table.seed_pairs(frac)
        assert len(pairs) == 3
    # near saturation the shared queue is never better
    for sep_mean, sha_mean in table.seed_pairs(0.96):
        assert sha_mean >= sep_mean


def test_compare_modes_close_at_half_rate():
    config = CompareConfig(
        rate_fracs=(0.5,), n_seeds=5, duration_ns=50_000_000, seed="half"
    )
    table = queue_strategy_compare(config)
    sep = table.mean_of(0.5, SEPARATE_PER_FLOW)
    sha = table.mean_of(0.5, SHARED_SINGLE)
    assert abs(sha - sep) / sep <= 0.10
