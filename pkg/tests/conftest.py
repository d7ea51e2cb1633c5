import random

import pytest

from rtflow.model import FlowSpec, Topology
from rtflow.solver import WeightedInstance, relax_weight


def small_instance_corpus(count: int, seed: str = "corpus"):
    """Random two-constraint instances on <= 8 nodes, second weight already
    on the X=10 integer grid."""
    for s in range(count):
        rng = random.Random(f"{seed}:{s}")
        n = rng.randint(5, 8)
        nodes = tuple(f"n{i}" for i in range(n))
        edges = []
        for i in range(1, n):
            edges.append((f"n{rng.randrange(i)}", f"n{i}"))
        for i in range(n):
            for j in range(i + 1, n):
                key = (f"n{i}", f"n{j}")
                if key not in edges and rng.random() < 0.3:
                    edges.append(key)
        w1 = tuple(rng.randint(1, 100) for _ in edges)
        bound2 = rng.randint(120, 400)
        w2 = tuple(relax_weight(rng.randint(1, 100), bound2, 10) for _ in edges)
        src, dst = rng.sample(nodes, 2)
        yield WeightedInstance(
            nodes=nodes,
            edges=tuple(edges),
            w1=w1,
            w2=w2,
            source=src,
            dest=dst,
            c1=rng.randint(60, 260),
            c2=10,
        )


def path_weight_sums(instance: WeightedInstance, path):
    table = {}
    for (u, v), a, b in zip(instance.edges, instance.w1, instance.w2):
        table[(u, v)] = table[(v, u)] = (a, b)
    s1 = sum(table[(path[i], path[i + 1])][0] for i in range(len(path) - 1))
    s2 = sum(table[(path[i], path[i + 1])][1] for i in range(len(path) - 1))
    return s1, s2


def line_topology(n_switches: int = 2, bandwidth_bps: int = 10_000_000,
                  delay_ns: int = 110_000) -> Topology:
    """h0 - s0 - s1 - ... - h1, all edges identical."""
    topo = Topology()
    for i in range(n_switches):
        topo.add_node(f"s{i}", "switch")
    topo.add_node("h0", "host")
    topo.add_node("h1", "host")
    topo.add_edge("h0", "s0", bandwidth_bps, delay_ns)
    for i in range(n_switches - 1):
        topo.add_edge(f"s{i}", f"s{i + 1}", bandwidth_bps, delay_ns)
    topo.add_edge(f"s{n_switches - 1}", "h1", bandwidth_bps, delay_ns)
    return topo


@pytest.fixture
def two_switch_topo() -> Topology:
    return line_topology(2)


@pytest.fixture
def one_flow(two_switch_topo) -> FlowSpec:
    return FlowSpec("f0", "h0", "h1", deadline_ns=400_000, demand_bps=2_000_000)
