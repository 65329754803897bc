# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels; must stay semantically identical to ``_pykernels.py``."""

import numpy as np


cdef enum:
    TFT = 0
    VINDICTIVE = 1
    ALLC = 2
    ALLD = 3
    PROB = 4


cdef inline int _step(int kind, const double[:] p, double u, int r, int opp_last, int* state) noexcept nogil:
    cdef double stay
    if kind == TFT:
        return 0 if r == 0 else opp_last
    elif kind == VINDICTIVE:
        if r > 0 and opp_last == 1:
            state[0] = 1
        return state[0]
    elif kind == ALLC:
        return 0
    elif kind == ALLD:
        return 1
    else:
        if r == 0:
            stay = p[0]
        elif opp_last == 0:
            stay = p[1] if state[0] == 0 else p[2]
        else:
            stay = p[3] if state[0] == 0 else p[4]
        state[0] = 0 if u < stay else 1
        return state[0]


def run_matches(int kind_a, params_a, int kind_b, params_b, ua, ub):
    if kind_a < 0 or kind_a > PROB or kind_b < 0 or kind_b > PROB:
        raise ValueError("unknown strategy kind")
    cdef const double[:] pa = np.ascontiguousarray(params_a, dtype=np.float64)
    cdef const double[:] pb = np.ascontiguousarray(params_b, dtype=np.float64)
    cdef const double[:, :] UA = np.ascontiguousarray(ua, dtype=np.float64)
    cdef const double[:, :] UB = np.ascontiguousarray(ub, dtype=np.float64)
    cdef Py_ssize_t plays = UA.shape[0], rounds = UA.shape[1]
    out_a_arr = np.zeros((plays, rounds), dtype=np.uint8)
    out_b_arr = np.zeros((plays, rounds), dtype=np.uint8)
    cdef unsigned char[:, :] out_a = out_a_arr
    cdef unsigned char[:, :] out_b = out_b_arr
    cdef Py_ssize_t i, r
    cdef int sa, sb, la, lb, aa, ab
    with nogil:
        for i in range(plays):
            sa = 0
            sb = 0
            la = 0
            lb = 0
            for r in range(rounds):
                aa = _step(kind_a, pa, UA[i, r], <int>r, lb, &sa)
                ab = _step(kind_b, pb, UB[i, r], <int>r, la, &sb)
                la = aa
                lb = ab
                out_a[i, r] = <unsigned char>aa
                out_b[i, r] = <unsigned char>ab
    return out_a_arr, out_b_arr


cdef void _dfs(const double[:, :] W, double[:, :] P, int* visited, int n,
               int src, int node, double weight) noexcept nogil:
    cdef int nxt
    cdef double w
    P[src, node] += weight
    visited[node] = 1
    for nxt in range(n):
        w = W[node, nxt]
        if visited[nxt] == 0 and w != 0.0:
            _dfs(W, P, visited, n, src, nxt, weight * w)
    visited[node] = 0


def simple_path_sums(M):
    cdef const double[:, :] W = np.ascontiguousarray(M, dtype=np.float64)
    cdef int n = <int>W.shape[0]
    if n > 64:
        raise ValueError("too many states for path enumeration")
    P_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, :] P = P_arr
    cdef int visited[64]
    cdef int s
    for s in range(n):
        visited[s] = 0
    with nogil:
        for s in range(n):
            _dfs(W, P, visited, n, s, s, 1.0)
    return P_arr
