from fractions import Fraction

import pytest

from conftest import path_weight_sums, small_instance_corpus
from rtflow.errors import TooLarge, ZeroBound
from rtflow.solver import (
    RelaxParams,
    WeightedInstance,
    _dp_py,
    brute_force_mcp,
    dp_table,
    kernel_name,
    mcp_heuristic,
    relax_weight,
)

TRIANGLE = dict(
    nodes=("A", "B", "C"),
    edges=(("A", "B"), ("B", "C"), ("A", "C")),
    w1=(2, 2, 5),
    w2=(3, 3, 1),
    source="A",
    dest="C",
)


def test_triangle_two_hop_feasible():
    # direct edge violates c1, two-hop path w1=4 w2=6 fits both bounds
    inst = WeightedInstance(c1=4, c2=6, **TRIANGLE)
    assert mcp_heuristic(inst) == ["A", "B", "C"]
    assert brute_force_mcp(inst) == ["A", "B", "C"]


def test_triangle_infeasible():
    inst = WeightedInstance(c1=4, c2=5, **TRIANGLE)
    assert mcp_heuristic(inst) is None
    assert brute_force_mcp(inst) is None


def test_triangle_direct_when_c2_tight():
    inst = WeightedInstance(c1=5, c2=2, **TRIANGLE)
    assert mcp_heuristic(inst) == ["A", "C"]


def test_relax_weight_is_ceiling():
    assert relax_weight(1, 10, 10) == 1
    assert relax_weight(10, 10, 10) == 10
    assert relax_weight(11, 100, 10) == 2
    assert relax_weight(0, 10, 10) == 0
    assert relax_weight(Fraction(1, 3), Fraction(2, 3), 10) == 5


def test_relax_weight_rejects_bad_input():
    with pytest.raises(ZeroBound):
        relax_weight(1, 0, 10)
    with pytest.raises(ZeroBound):
        relax_weight(1, 10, 0)
    with pytest.raises(ZeroBound):
        relax_weight(-1, 10, 10)
    with pytest.raises(ZeroBound):
        RelaxParams(0)


def test_fractional_first_weight():
    inst = WeightedInstance(
        nodes=("A", "B", "C"),
        edges=(("A", "B"), ("B", "C"), ("A", "C")),
        w1=(Fraction(1, 3), Fraction(1, 3), Fraction(3, 4)),
        w2=(1, 1, 1),
        source="A",
        dest="C",
        c1=Fraction(7, 10),
        c2=2,
    )
    assert mcp_heuristic(inst) == ["A", "B", "C"]


def test_instance_validation():
    with pytest.raises(ValueError):
        WeightedInstance(
            nodes=("A", "B"), edges=(("A", "B"),), w1=(1,), w2=(1, 2),
            source="A", dest="B", c1=1, c2=1,
        )
    with pytest.raises(ValueError):
        WeightedInstance(
            nodes=("A", "B"), edges=(("A", "B"),), w1=(1,), w2=(1,),
            source="A", dest="A", c1=1, c2=1,
        )


def test_kernels_agree_on_corpus():
    # both kernels share loop order, so tables must match exactly
    if kernel_name() != "cython":
        pytest.skip("compiled kernel not available")
    import rtflow.solver as solver

    for inst in small_instance_corpus(100, seed="kernels"):
        fast = mcp_heuristic(inst)
        saved = solver._dp_fast
        solver._dp_fast = None
        try:
            slow = mcp_heuristic(inst)
        finally:
            solver._dp_fast = saved
        assert fast == slow


def test_dp_table_estimates_dominate_true_costs():
    inst = WeightedInstance(c1=4, c2=6, **TRIANGLE)
    table = dp_table(inst)
    assert table["A"][0] == 0
    # column j holds the min w1 over walks with relaxed cost <= j
    assert table["C"][6] == 4
    assert table["C"][1] == 5
    assert table["C"][0] is None


def test_dp_sweep_monotone():
    # estimates only improve as sweeps progress
    inst = WeightedInstance(c1=4, c2=6, **TRIANGLE)
    index = {n: i for i, n in enumerate(inst.nodes)}
    edges = [(index[u], index[v]) for u, v in inst.edges]
    snapshots = list(
        _dp_py.dp_sweep_trace(
            len(inst.nodes), edges, list(inst.w1), list(inst.w2),
            index[inst.source], inst.c2,
        )
    )
    for before, after in zip(snapshots, snapshots[1:]):
        for row_b, row_a in zip(before, after):
            for b, a in zip(row_b, row_a):
                assert a <= b


def test_brute_force_caps_size():
    nodes = tuple(f"n{i}" for i in range(11))
    edges = tuple((f"n{i}", f"n{i+1}") for i in range(10))
    inst = WeightedInstance(
        nodes=nodes, edges=edges, w1=(1,) * 10, w2=(1,) * 10,
        source="n0", dest="n10", c1=100, c2=100,
    )
    with pytest.raises(TooLarge):
        brute_force_mcp(inst)


def test_heuristic_soundness_on_sample():
    for inst in small_instance_corpus(300, seed="sound"):
        path = mcp_heuristic(inst)
        if path is None:
            continue
        assert path[0] == inst.source and path[-1] == inst.dest
        assert len(set(path)) == len(path)
        s1, s2 = path_weight_sums(inst, path)
        assert s1 <= inst.c1 and s2 <= inst.c2


def test_pure_python_handles_huge_weights():
    # values past the int64 guard route to the fallback kernel
    big = 2 ** 70
    inst = WeightedInstance(
        nodes=("A", "B", "C"),
        edges=(("A", "B"), ("B", "C")),
        w1=(big, big),
        w2=(1, 1),
        source="A",
        dest="C",
        c1=2 * big,
        c2=2,
    )
    assert mcp_heuristic(inst) == ["A", "B", "C"]
