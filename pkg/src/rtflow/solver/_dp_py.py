"""Pure-Python DP kernel: Bellman-Ford-style sweeps over a (node, budget)
grid. Used when the compiled extension is unavailable or when scaled
weights do not fit in 64-bit integers.
"""

INF = float("inf")


def dp_run(n, edges, w1, w2, src, c2, full_sweeps=False):
    """Relax every undirected edge in both directions, |V|-1 times.

    edges: list of (u, v) node-index pairs; w1/w2: parallel weight lists
    (w1 may be arbitrary-precision ints, w2 nonnegative ints).
    Returns (d, pred_node, pred_col) as lists of per-node rows.
    """
    width = c2 + 1
    d = [[INF] * width for _ in range(n)]
    pn = [[-1] * width for _ in range(n)]
    pc = [[-1] * width for _ in range(n)]
    for j in range(width):
        d[src][j] = 0

    m = len(edges)
    for _ in range(n - 1):
        changed = False
        for j in range(width):
            for idx in range(m):
                b = w2[idx]
                jp = j + b
                if jp > c2:
                    continue
                u, v = edges[idx]
                a = w1[idx]
                du = d[u][j]
                if du is not INF and du + a < d[v][jp]:
                    d[v][jp] = du + a
                    pn[v][jp] = u
                    pc[v][jp] = j
                    changed = True
                dv = d[v][j]
                if dv is not INF and dv + a < d[u][jp]:
                    d[u][jp] = dv + a
                    pn[u][jp] = v
                    pc[u][jp] = j
                    changed = True
        if not changed and not full_sweeps:
            break
    return d, pn, pc


def dp_sweep_trace(n, edges, w1, w2, src, c2):
    """Like dp_run but yields a snapshot of d after every sweep."""
    width = c2 + 1
    d = [[INF] * width for _ in range(n)]
    pn = [[-1] * width for _ in range(n)]
    pc = [[-1] * width for _ in range(n)]
    for j in range(width):
        d[src][j] = 0

    m = len(edges)
    for _ in range(n - 1):
        for j in range(width):
            for idx in range(m):
                b = w2[idx]
                jp = j + b
                if jp > c2:
                    continue
                u, v = edges[idx]
                a = w1[idx]
                du = d[u][j]
                if du is not INF and du + a < d[v][jp]:
                    d[v][jp] = du + a
                    pn[v][jp] = u
                    pc[v][jp] = j
                dv = d[v][j]
                if dv is not INF and dv + a < d[u][jp]:
                    d[u][jp] = dv + a
                    pn[u][jp] = v
                    pc[u][jp] = j
        yield [row[:] for row in d]
