"""Pure-Python kernels. Semantics are the reference for ``_ckernels.pyx``."""

import numpy as np

TFT, VINDICTIVE, ALLC, ALLD, PROB = range(5)
C, D = 0, 1


def _play_one(kind_a, pa, kind_b, pb, ua, ub, out_a, out_b):
    rounds = len(ua)
    state_a = state_b = 0
    last_a = last_b = 0
    for r in range(rounds):
        # Each side sees only the opponent's previous action.
        acts = []
        for kind, p, u, opp_last, side in ((kind_a, pa, ua[r], last_b, 0), (kind_b, pb, ub[r], last_a, 1)):
            state = state_a if side == 0 else state_b
            if kind == TFT:
                act = C if r == 0 else opp_last
            elif kind == VINDICTIVE:
                if r > 0 and opp_last == D:
                    state = 1
                act = state
            elif kind == ALLC:
                act = C
            elif kind == ALLD:
                act = D
            elif kind == PROB:
                if r == 0:
                    stay = p[0]
                elif opp_last == C:
                    stay = p[1] if state == 0 else p[2]
                else:
                    stay = p[3] if state == 0 else p[4]
                state = 0 if u < stay else 1
                act = state
            else:
                raise ValueError(f"unknown strategy kind {kind}")
            if side == 0:
                state_a = state
            else:
                state_b = state
            acts.append(act)
        last_a, last_b = acts
        out_a[r] = last_a
        out_b[r] = last_b


def run_matches(kind_a, params_a, kind_b, params_b, ua, ub):
    ua = np.asarray(ua, dtype=np.float64)
    ub = np.asarray(ub, dtype=np.float64)
    plays, rounds = ua.shape
    out_a = np.zeros((plays, rounds), dtype=np.uint8)
    out_b = np.zeros((plays, rounds), dtype=np.uint8)
    pa = [float(x) for x in params_a]
    pb = [float(x) for x in params_b]
    for i in range(plays):
        _play_one(int(kind_a), pa, int(kind_b), pb, ua[i].tolist(), ub[i].tolist(), out_a[i], out_b[i])
    return out_a, out_b


def simple_path_sums(M):
    """``P[i, j]`` = sum over simple paths i -> j of edge-weight products; ``P[i, i] = 1``."""
    M = np.asarray(M, dtype=np.float64)
    n = M.shape[0]
    W = M.tolist()
    P = [[0.0] * n for _ in range(n)]
    visited = [False] * n

    def dfs(src, node, weight):
        P[src][node] += weight
        visited[node] = True
        row = W[node]
        for nxt in range(n):
            if not visited[nxt] and row[nxt] != 0.0:
                dfs(src, nxt, weight * row[nxt])
        visited[node] = False

    for s in range(n):
        dfs(s, s, 1.0)
    return np.array(P, dtype=np.float64)
