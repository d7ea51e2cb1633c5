"""Two-constraint path selection.

The heuristic runs a pseudo-polynomial DP over an integer budget grid:
d[v, j] estimates the least first-cost of any walk from the source to v
whose integer second-cost sums to j. A path exists when some column at the
destination stays within the first bound. The inner sweep is the hot loop;
a compiled kernel is used when available (see `kernel_name`), with a
pure-Python fallback selected at import time.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

from ..errors import TooLarge, ZeroBound
from . import _dp_py

try:  # compiled kernel is optional
    from . import _dp as _dp_fast  # type: ignore
except ImportError:  # pragma: no cover - depends on build environment
    _dp_fast = None

if os.environ.get("RTFLOW_PURE_PYTHON"):
    _dp_fast = None

if _dp_fast is not None:
    import numpy as _np

_INT64_SAFE = 2 ** 61

Weight = Union[int, Fraction]


def kernel_name() -> str:
    return "python" if _dp_fast is None else "cython"


def relax_weight(raw: Weight, bound: Weight, x: int) -> int:
    """ceil(x * raw / bound): maps a real edge cost onto the integer grid."""
    if bound <= 0:
        raise ZeroBound(f"relaxation bound must be positive, got {bound}")
    if x < 1:
        raise ZeroBound(f"relaxation parameter must be >= 1, got {x}")
    if raw < 0:
        raise ZeroBound(f"raw weight must be nonnegative, got {raw}")
    return math.ceil(Fraction(x) * Fraction(raw) / Fraction(bound))


@dataclass(frozen=True)
class RelaxParams:
    x: int = 10

    def __post_init__(self):
        if self.x < 1:
            raise ZeroBound("relaxation parameter must be >= 1")


@dataclass(frozen=True)
class WeightedInstance:
    """A two-weight path query: find source->dest with sum(w1) <= c1 and
    sum(w2) <= c2. w1/c1 may be exact rationals; w2/c2 must be integers."""

    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]
    w1: tuple[Weight, ...]
    w2: tuple[int, ...]
    source: str
    dest: str
    c1: Weight
    c2: int

    def __post_init__(self):
        if len(self.edges) != len(self.w1) or len(self.edges) != len(self.w2):
            raise ValueError("edge/weight lists must be parallel")
        for w in self.w2:
            if not isinstance(w, int) or w < 0:
                raise ValueError("w2 weights must be nonnegative integers")
        if not isinstance(self.c2, int) or self.c2 < 0:
            raise ValueError("c2 must be a nonnegative integer")
        for w in self.w1:
            if w < 0:
                raise ValueError("w1 weights must be nonnegative")
        if self.source == self.dest:
            raise ValueError("source must differ from dest")


def _scale_w1(instance: WeightedInstance) -> tuple[list[int], int, int]:
    """Put w1 and c1 on a common integer scale (exact)."""
    fracs = [Fraction(w) for w in instance.w1]
    c1 = Fraction(instance.c1)
    scale = math.lcm(c1.denominator, *(f.denominator for f in fracs)) if fracs else c1.denominator
    w1i = [int(f * scale) for f in fracs]
    c1i = int(c1 * scale)
    return w1i, c1i, scale


def _run_kernel(instance: WeightedInstance, w1i: Sequence[int], full_sweeps: bool):
    index = {node: i for i, node in enumerate(instance.nodes)}
    eu = [index[u] for u, _ in instance.edges]
    ev = [index[v] for _, v in instance.edges]
    src = index[instance.source]
    n = len(instance.nodes)

    fits = _dp_fast is not None and (
        not w1i or (max(w1i, default=0) * max(n, 1)) < _INT64_SAFE
    )
    if fits:
        d, pn, pc = _dp_fast.dp_run(
            n,
            _np.asarray(eu, dtype=_np.int64),
            _np.asarray(ev, dtype=_np.int64),
            _np.asarray(w1i, dtype=_np.int64),
            _np.asarray(instance.w2, dtype=_np.int64),
            src,
            instance.c2,
            full_sweeps,
        )
        inf = _dp_fast.INF
        d = [[x if x < inf else None for x in row] for row in d.tolist()]
        pn = pn.tolist()
        pc = pc.tolist()
    else:
        d, pn, pc = _dp_py.dp_run(
            n, list(zip(eu, ev)), list(w1i), list(instance.w2), src, instance.c2,
            full_sweeps,
        )
        d = [[x if x is not _dp_py.INF else None for x in row] for row in d]
    return index, d, pn, pc


def _edge_weights(instance: WeightedInstance, w1i: Sequence[int]):
    table: dict[tuple[str, str], tuple[int, int]] = {}
    for (u, v), a, b in zip(instance.edges, w1i, instance.w2):
        table[(u, v)] = (a, b)
        table[(v, u)] = (a, b)
    return table


def mcp_heuristic(
    instance: WeightedInstance, full_sweeps: bool = False
) -> Optional[list[str]]:
    """Return a node-simple path meeting both bounds, or None.

    Any returned path is re-summed against the bounds (soundness is
    unconditional); failure to find one is possible even when a feasible
    path exists (completeness is heuristic).
    """
    w1i, c1i, _ = _scale_w1(instance)
    index, d, pn, pc = _run_kernel(instance, w1i, full_sweeps)
    names = instance.nodes
    weights = _edge_weights(instance, w1i)
    t = index[instance.dest]
    s = index[instance.source]

    for j in range(instance.c2 + 1):
        if d[t][j] is None or d[t][j] > c1i:
            continue
        # Backtrack via stored (node, column) pairs; columns decrease, so
        # this terminates, but a zero-w2 edge could still revisit a node.
        path_idx = [t]
        v, col = t, j
        ok = True
        while v != s:
            u = pn[v][col]
            if u < 0:
                ok = False
                break
            v, col = u, pc[v][col]
            path_idx.append(v)
            if len(path_idx) > len(names):
                ok = False
                break
        if not ok:
            continue
        path = [names[i] for i in reversed(path_idx)]
        if len(set(path)) != len(path):
            continue  # revisits a node: reject this column, try the next
        s1 = sum(weights[(path[i], path[i + 1])][0] for i in range(len(path) - 1))
        s2 = sum(weights[(path[i], path[i + 1])][1] for i in range(len(path) - 1))
        if s1 <= c1i and s2 <= instance.c2:
            return path
    return None


def dp_table(instance: WeightedInstance, full_sweeps: bool = False):
    """Final d-table for inspection: {node: [w1 estimate or None per column]}.

    Values are reported on the original (unscaled) w1 scale as Fractions.
    """
    w1i, _, scale = _scale_w1(instance)
    _, d, _, _ = _run_kernel(instance, w1i, full_sweeps)
    return {
        node: [None if x is None else Fraction(x, scale) for x in row]
        for node, row in zip(instance.nodes, d)
    }


def brute_force_mcp(
    instance: WeightedInstance, max_nodes: int = 10
) -> Optional[list[str]]:
    """Reference oracle: enumerate all simple paths and pick the best
    feasible one (min w1, then min w2, then lexicographic)."""
    if len(instance.nodes) > max_nodes:
        raise TooLarge(
            f"{len(instance.nodes)} nodes exceeds brute-force cap {max_nodes}"
        )
    adj: dict[str, list[tuple[str, Weight, int]]] = {n: [] for n in instance.nodes}
    for (u, v), a, b in zip(instance.edges, instance.w1, instance.w2):
        adj[u].append((v, a, b))
        adj[v].append((u, a, b))
    for lst in adj.values():
        lst.sort(key=lambda item: item[0])

    best = None
    stack = [(instance.source, (instance.source,), Fraction(0), 0)]
    while stack:
        node, path, s1, s2 = stack.pop()
        if node == instance.dest:
            if s1 <= instance.c1 and s2 <= instance.c2:
                key = (s1, s2, path)
                if best is None or key < best:
                    best = key
            continue
        for nxt, a, b in adj[node]:
            if nxt in path:
                continue
            ns1, ns2 = s1 + a, s2 + b
            if ns1 > instance.c1 or ns2 > instance.c2:
                continue  # weights are nonnegative: prune
            stack.append((nxt, path + (nxt,), ns1, ns2))
    return list(best[2]) if best is not None else None
