# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled DP kernel. Semantics match _dp_py.dp_run exactly for inputs
whose scaled weights fit in 64-bit integers (the wrapper checks)."""

import numpy as np

INF = 2 ** 62


def dp_run(int n, long long[::1] eu, long long[::1] ev,
           long long[::1] w1, long long[::1] w2,
           int src, long long c2, bint full_sweeps=False):
    cdef Py_ssize_t width = c2 + 1
    cdef Py_ssize_t m = eu.shape[0]

    d_arr = np.full((n, width), INF, dtype=np.int64)
    pn_arr = np.full((n, width), -1, dtype=np.int64)
    pc_arr = np.full((n, width), -1, dtype=np.int64)
    cdef long long[:, ::1] d = d_arr
    cdef long long[:, ::1] pn = pn_arr
    cdef long long[:, ::1] pc = pc_arr

    cdef Py_ssize_t j, idx, sweep
    cdef long long jp, u, v, a, b, du, dv, inf = INF
    cdef bint changed

    for j in range(width):
        d[src, j] = 0

    for sweep in range(n - 1):
        changed = False
        for j in range(width):
            for idx in range(m):
                b = w2[idx]
                jp = j + b
                if jp > c2:
                    continue
                u = eu[idx]
                v = ev[idx]
                a = w1[idx]
                du = d[u, j]
                if du < inf and du + a < d[v, jp]:
                    d[v, jp] = du + a
                    pn[v, jp] = u
                    pc[v, jp] = j
                    changed = True
                dv = d[v, j]
                if dv < inf and dv + a < d[u, jp]:
                    d[u, jp] = dv + a
                    pn[u, jp] = v
                    pc[u, jp] = j
                    changed = True
        if not changed and not full_sweeps:
            break
    return d_arr, pn_arr, pc_arr
