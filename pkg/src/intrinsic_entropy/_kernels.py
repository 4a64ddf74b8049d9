"""Compiled inner loop for :meth:`EntropyTracker.extend`.

Mirrors ``EntropyTracker.update`` operation for operation, so the bulk and
per-trade paths agree bit for bit.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Layout of the float state vector shared with EntropyTracker.
PQ, PQC, P_OPEN, P_LAST = 0, 1, 2, 3
A_OPEN, AC_OPEN, B_OPEN, BC_OPEN = 4, 5, 6, 7
A_PREV, AC_PREV, B_PREV, BC_PREV = 8, 9, 10, 11
A_VWAP, AC_VWAP, B_VWAP, BC_VWAP = 12, 13, 14, 15
STATE_SIZE = 16
SPLIT = 134217729.0


@njit(cache=True, nogil=True)
def _two_prod(a, b):
    p = a * b
    t = SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


@njit(cache=True, nogil=True)
def _acc(st, i, x):
    # Knuth two-sum; the exact rounding error goes to the slot after ``i``.
    s = st[i]
    t = s + x
    v = t - s
    st[i + 1] += (s - (t - v)) + (x - v)
    st[i] = t


@njit(cache=True, nogil=True)
def advance(st: np.ndarray, q_total: int, quantities: np.ndarray, prices: np.ndarray) -> int:
    """Fold trades into ``st`` (at least one trade already seen); returns the new total quantity."""
    for k in range(quantities.shape[0]):
        q = quantities[k]
        p = prices[k]
        qf = float(q)
        lq = math.log(qf)

        wq = (p - st[P_OPEN]) / st[P_OPEN] * qf
        _acc(st, A_OPEN, wq * lq)
        _acc(st, B_OPEN, wq)

        wq = (p - st[P_LAST]) / st[P_LAST] * qf
        _acc(st, A_PREV, wq * lq)
        _acc(st, B_PREV, wq)

        ph, pl = _two_prod(p, float(q_total))
        wq = ((ph - st[PQ]) + (pl - st[PQC])) / (st[PQ] + st[PQC]) * qf
        _acc(st, A_VWAP, wq * lq)
        _acc(st, B_VWAP, wq)

        st[P_LAST] = p
        ph, pl = _two_prod(p, qf)
        s = st[PQ]
        t = s + ph
        v = t - s
        st[PQC] += ((s - (t - v)) + (ph - v)) + pl
        st[PQ] = t
        q_total += q
    return q_total
