"""Numba kernels for the hot loops: bit-packed elimination and min-sum BP.

Bit layout for packed rows: column ``j`` lives in word ``j >> 6`` at bit
``j & 63`` (little-endian within the word).
"""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def rref_inplace(A, order, stop_rank):
    """Reduce packed rows ``A`` to reduced row echelon form in place.

    Pivot columns are chosen greedily in the sequence ``order``; the first
    row holding a 1 in the candidate column becomes the pivot. Stops early
    once ``stop_rank`` pivots are found (pass ``-1`` to disable).

    Returns the pivot columns, in the order found.
    """
    m = A.shape[0]
    W = A.shape[1]
    pivots = np.empty(min(m, order.shape[0]), dtype=np.int64)
    r = 0
    for idx in range(order.shape[0]):
        if r == m or r == stop_rank:
            break
        c = order[idx]
        w = c >> 6
        b = np.uint64(1) << np.uint64(c & 63)
        p = -1
        for i in range(r, m):
            if A[i, w] & b:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(W):
                tmp = A[p, k]
                A[p, k] = A[r, k]
                A[r, k] = tmp
        for i in range(m):
            if i != r and (A[i, w] & b):
                for k in range(W):
                    A[i, k] ^= A[r, k]
        pivots[r] = c
        r += 1
    return pivots[:r]


@nb.njit(cache=True)
def minsum_bp(chk_ptr, edge_var, var_ptr, var_edge, syndrome, prior, max_iter, clip,
              hard, post):
    """Flooding min-sum BP with syndrome-signed check messages.

    ``hard`` and ``post`` are filled with the last hard decision and the
    posterior LLRs. Returns ``(iterations_used, converged)``.
    """
    m = chk_ptr.shape[0] - 1
    n = prior.shape[0]
    E = edge_var.shape[0]
    q = np.empty(E)
    r = np.empty(E)
    for e in range(E):
        q[e] = prior[edge_var[e]]
    for it in range(1, max_iter + 1):
        for i in range(m):
            sgn = 1.0 - 2.0 * syndrome[i]
            min1 = np.inf
            min2 = np.inf
            amin = -1
            for e in range(chk_ptr[i], chk_ptr[i + 1]):
                v = q[e]
                if v < 0.0:
                    sgn = -sgn
                    a = -v
                else:
                    a = v
                if a < min1:
                    min2 = min1
                    min1 = a
                    amin = e
                elif a < min2:
                    min2 = a
            for e in range(chk_ptr[i], chk_ptr[i + 1]):
                mag = min2 if e == amin else min1
                if q[e] < 0.0:
                    r[e] = -sgn * mag
                else:
                    r[e] = sgn * mag
        for j in range(n):
            tot = prior[j]
            for k in range(var_ptr[j], var_ptr[j + 1]):
                tot += r[var_edge[k]]
            post[j] = tot
            hard[j] = 1 if tot < 0.0 else 0
            for k in range(var_ptr[j], var_ptr[j + 1]):
                e = var_edge[k]
                v = tot - r[e]
                if v > clip:
                    v = clip
                elif v < -clip:
                    v = -clip
                q[e] = v
        ok = True
        for i in range(m):
            par = syndrome[i]
            for e in range(chk_ptr[i], chk_ptr[i + 1]):
                par ^= hard[edge_var[e]]
            if par:
                ok = False
                break
        if ok:
            return it, True
    return max_iter, False
