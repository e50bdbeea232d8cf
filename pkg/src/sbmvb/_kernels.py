"""Compiled inner loops for the responsibility fixed point.

One sweep updates rows in index order (Gauss-Seidel), renormalizing each
row in log space with max subtraction and a 1e-300 underflow floor, and
keeps the running column sums consistent.  Returns the L1 change of the
sweep.  The same kernel serves the Bayesian and the frequentist E-steps;
only the precomputed weight matrices differ.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_FLOOR = 1e-300
# exp() below this argument underflows into subnormals, which cost an order
# of magnitude more per call; results that small get floored to _FLOOR anyway
_MIN_LOGIT = -690.0


@njit(cache=True)
def sweep_sequential(resp, adj, base, w_edge, w_nonedge, col_sums):
    n, q = resp.shape
    delta = 0.0
    logits = np.empty(q)
    eacc = np.empty(q)
    for i in range(n):
        for a in range(q):
            eacc[a] = 0.0
        for j in range(n):
            if adj[i, j] != 0.0:
                for a in range(q):
                    eacc[a] += resp[j, a]
        top = -np.inf
        for a in range(q):
            s = base[a]
            for b in range(q):
                s += (col_sums[b] - resp[i, b]) * w_nonedge[a, b] + eacc[b] * w_edge[a, b]
            logits[a] = s
            if s > top:
                top = s
        tot = 0.0
        for a in range(q):
            arg = logits[a] - top
            if arg < _MIN_LOGIT:
                arg = _MIN_LOGIT
            v = math.exp(arg)
            logits[a] = v
            tot += v
        tot2 = 0.0
        for a in range(q):
            v = logits[a] / tot
            if v < _FLOOR:
                v = _FLOOR
            logits[a] = v
            tot2 += v
        for a in range(q):
            v = logits[a] / tot2
            delta += abs(v - resp[i, a])
            col_sums[a] += v - resp[i, a]
            resp[i, a] = v
    return delta


@njit(cache=True)
def sweep_sequential_directed(resp, adj, base, w_edge, w_nonedge, col_sums):
    # Directed variant: row i sees out-edges through (q, l) weights and
    # in-edges through the transposed weights.
    n, q = resp.shape
    delta = 0.0
    logits = np.empty(q)
    eout = np.empty(q)
    ein = np.empty(q)
    for i in range(n):
        for a in range(q):
            eout[a] = 0.0
            ein[a] = 0.0
        for j in range(n):
            if adj[i, j] != 0.0:
                for a in range(q):
                    eout[a] += resp[j, a]
            if adj[j, i] != 0.0:
                for a in range(q):
                    ein[a] += resp[j, a]
        top = -np.inf
        for a in range(q):
            s = base[a]
            for b in range(q):
                s += (col_sums[b] - resp[i, b]) * (w_nonedge[a, b] + w_nonedge[b, a])
                s += eout[b] * w_edge[a, b] + ein[b] * w_edge[b, a]
            logits[a] = s
            if s > top:
                top = s
        tot = 0.0
        for a in range(q):
            arg = logits[a] - top
            if arg < _MIN_LOGIT:
                arg = _MIN_LOGIT
            v = math.exp(arg)
            logits[a] = v
            tot += v
        tot2 = 0.0
        for a in range(q):
            v = logits[a] / tot
            if v < _FLOOR:
                v = _FLOOR
            logits[a] = v
            tot2 += v
        for a in range(q):
            v = logits[a] / tot2
            delta += abs(v - resp[i, a])
            col_sums[a] += v - resp[i, a]
            resp[i, a] = v
    return delta
