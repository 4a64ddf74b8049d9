"""Intrinsic entropy of a trade stream, maintained in constant time per trade.

For a day's trades 1..n with quantities q_i, prices p_i and reference prices
r_i, the indicator is

    H = -sum_i w_i * (q_i / Q) * ln(q_i / Q),   w_i = p_i / r_i - 1,   Q = sum_i q_i.

Every probability q_i / Q moves when Q grows, but expanding the log gives

    H = -(A - B * ln Q) / Q,   A = sum_i w_i q_i ln q_i,   B = sum_i w_i q_i

so only A, B and Q need to be carried. Each w_i is fixed when trade i arrives,
using only trades before it, and never revisited.

Numerics: H is often much smaller than the terms it sums, so any absolute
error in a weight is amplified. Weights are therefore formed as
(p - r) / r, and the VWAP's price-volume sum is carried in double-double
from error-free products, which keeps every w_i accurate relative to itself.
"""

from __future__ import annotations

import enum
import io
import itertools
import math
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Sequence, TextIO

import numpy as np

from intrinsic_entropy import _kernels
from intrinsic_entropy.market_data import Trade, TradingDayStream, format_timestamp

_log = math.log
_INT64_MAX = 2**63 - 1
_SPLIT = 134217729.0  # 2**27 + 1, Dekker's splitting constant
EXTEND_CHUNK = 4096


def _two_sum(s: float, x: float) -> tuple[float, float]:
    """(s + x rounded, exact rounding error)."""
    t = s + x
    v = t - s
    return t, (s - (t - v)) + (x - v)


def _two_prod(a: float, b: float) -> tuple[float, float]:
    """(a * b rounded, exact rounding error), without fma."""
    p = a * b
    t = _SPLIT * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLIT * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _pq_add(hi: float, lo: float, price: float, quantity: int) -> tuple[float, float]:
    """Add price * quantity to the double-double (hi, lo)."""
    ph, pl = _two_prod(price, float(quantity))
    t, e = _two_sum(hi, ph)
    return t, lo + (e + pl)


def _vwap_weight(price: float, pq_hi: float, pq_lo: float, q_total: int) -> float:
    """price / VWAP - 1 as (price * Q - S) / S, with S = pq_hi + pq_lo."""
    ph, pl = _two_prod(price, float(q_total))
    return ((ph - pq_hi) + (pl - pq_lo)) / (pq_hi + pq_lo)


class ReferenceMode(enum.Enum):
    """Which price a trade's relative variation is measured against."""

    OPEN_PRICE = "open"
    PRECEDING_TRADE = "prev"
    MOVING_VWAP = "vwap"


@dataclass(frozen=True, slots=True)
class VwapState:
    """Running VWAP; the price-volume sum is a double-double (sum + error term)."""

    weighted_price_sum: float = 0.0
    quantity_sum: int = 0
    trade_count: int = 0
    weighted_price_error: float = 0.0

    @property
    def vwap(self) -> float | None:
        if self.trade_count == 0:
            return None
        return (self.weighted_price_sum + self.weighted_price_error) / self.quantity_sum


def vwap_update(state: VwapState, trade: Trade) -> VwapState:
    total, err = _pq_add(state.weighted_price_sum, state.weighted_price_error, trade.price, trade.quantity)
    return VwapState(total, state.quantity_sum + trade.quantity, state.trade_count + 1, err)


class EntropyAccumulator:
    """Running state for one symbol under one reference mode.

    ``update`` is O(1). A and B are kept as compensated sums.
    """

    __slots__ = (
        "mode",
        "trade_count",
        "total_quantity",
        "_a",
        "_a_comp",
        "_b",
        "_b_comp",
        "open_price",
        "last_price",
        "_pq_sum",
        "_pq_comp",
    )

    def __init__(self, mode: ReferenceMode) -> None:
        self.mode = ReferenceMode(mode)
        self.trade_count = 0
        self.total_quantity = 0
        self._a = self._a_comp = 0.0
        self._b = self._b_comp = 0.0
        self.open_price: float | None = None
        self.last_price: float | None = None
        self._pq_sum = self._pq_comp = 0.0

    @property
    def weighted_qlq_sum(self) -> float:
        return self._a + self._a_comp

    @property
    def weighted_q_sum(self) -> float:
        return self._b + self._b_comp

    @property
    def vwap_state(self) -> VwapState:
        """VWAP state over every trade accepted so far (i.e. lagged w.r.t. the next one)."""
        return VwapState(self._pq_sum, self.total_quantity, self.trade_count, self._pq_comp)

    def reference(self) -> float | None:
        """Reference price the next trade will be weighted against, or None before trade 1."""
        if self.trade_count == 0:
            return None
        if self.mode is ReferenceMode.OPEN_PRICE:
            return self.open_price
        if self.mode is ReferenceMode.PRECEDING_TRADE:
            return self.last_price
        return (self._pq_sum + self._pq_comp) / self.total_quantity

    def weight(self, price: float) -> float:
        """Weight a trade at ``price`` would receive next; 0 for the opening trade."""
        if self.trade_count == 0:
            return 0.0
        if self.mode is ReferenceMode.MOVING_VWAP:
            return _vwap_weight(price, self._pq_sum, self._pq_comp, self.total_quantity)
        ref = self.open_price if self.mode is ReferenceMode.OPEN_PRICE else self.last_price
        return (price - ref) / ref

    def add(self, quantity: int, weight: float) -> EntropyAccumulator:
        """Accept one trade whose price weight has already been fixed."""
        wq = weight * quantity
        x = wq * _log(quantity)

        # Two-sum: carry the low-order bits lost by each addition.
        s = self._a
        t = s + x
        v = t - s
        self._a_comp += (s - (t - v)) + (x - v)
        self._a = t

        s = self._b
        t = s + wq
        v = t - s
        self._b_comp += (s - (t - v)) + (wq - v)
        self._b = t

        self.total_quantity += quantity
        self.trade_count += 1
        return self

    def update(self, quantity: int, price: float) -> EntropyAccumulator:
        if self.trade_count == 0:
            self.open_price = price
        w = self.weight(price)
        self._pq_sum, self._pq_comp = _pq_add(self._pq_sum, self._pq_comp, price, quantity)
        self.add(quantity, w)
        self.last_price = price
        return self

    def value(self) -> float:
        if self.trade_count == 0:
            return 0.0
        q = self.total_quantity
        a = self._a + self._a_comp
        b = self._b + self._b_comp
        return -(a - b * _log(q)) / q


def reference_price(acc: EntropyAccumulator, incoming: Trade | None = None) -> float | None:
    """Reference for ``incoming`` given ``acc`` holds every earlier trade.

    The incoming trade itself never influences its own reference; it is
    accepted only to mirror the call shape used by the strategies.
    """
    return acc.reference()


def entropy_update(acc: EntropyAccumulator, trade: Trade) -> EntropyAccumulator:
    """Feed one trade into ``acc`` in place and return it."""
    return acc.update(trade.quantity, trade.price)


def entropy_value(acc: EntropyAccumulator) -> float:
    return acc.value()


def _partials_add(partials: list[float], x: float) -> None:
    # Shewchuk's non-overlapping partials: their exact sum is the exact running total.
    i = 0
    for y in partials:
        if abs(x) < abs(y):
            x, y = y, x
        hi = x + y
        lo = y - (hi - x)
        if lo:
            partials[i] = lo
            i += 1
        x = hi
    partials[i:] = [x]


def entropy_naive(trades: Iterable[Trade], mode: ReferenceMode) -> float:
    """Direct evaluation of the defining sum over explicit probabilities q_i / Q.

    Deliberately plain: references are re-derived from the
    raw trade list and every term is formed individually. Used as the
    differential oracle for :class:`EntropyAccumulator`.
    """
    mode = ReferenceMode(mode)
    trades = list(trades)
    if not trades:
        return 0.0
    weights = [0.0]
    pq: list[float] = []  # exact partials of sum p_j q_j over earlier trades
    qsum = 0
    for i, t in enumerate(trades):
        if i > 0:
            if mode is ReferenceMode.MOVING_VWAP:
                # w = (p Q - S) / S with a correctly rounded numerator.
                num = math.fsum([*_two_prod(t.price, float(qsum)), *(-x for x in pq)])
                weights.append(num / math.fsum(pq))
            else:
                ref = trades[0].price if mode is ReferenceMode.OPEN_PRICE else trades[i - 1].price
                weights.append((t.price - ref) / ref)
        if mode is ReferenceMode.MOVING_VWAP:
            for x in _two_prod(t.price, float(t.quantity)):
                _partials_add(pq, x)
            qsum += t.quantity
    total = sum(t.quantity for t in trades)
    terms = []
    for w, t in zip(weights, trades):
        prob = t.quantity / total
        terms.append(w * prob * math.log(prob))
    return -math.fsum(terms)


def shannon_entropy(probabilities: Sequence[float], base: float = math.e) -> float:
    """-sum p log_b p, with 0 log 0 taken as 0."""
    if base <= 0 or base == 1:
        raise ValueError(f"logarithm base must be positive and != 1, got {base}")
    probs = list(probabilities)
    if any(p < 0 for p in probs):
        raise ValueError("probabilities must be non-negative")
    if abs(math.fsum(probs) - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1, got {math.fsum(probs)!r}")
    ln_base = math.log(base)
    return -math.fsum(p * math.log(p) / ln_base for p in probs if p > 0)


@dataclass(frozen=True, slots=True)
class EntropySeriesPoint:
    ordinal: int
    timestamp: datetime
    price: float
    vwap: float
    h_open: float
    h_prev: float
    h_vwap: float

    def h(self, mode: ReferenceMode) -> float:
        return getattr(self, _MODE_FIELD[ReferenceMode(mode)])


_MODE_FIELD = {
    ReferenceMode.OPEN_PRICE: "h_open",
    ReferenceMode.PRECEDING_TRADE: "h_prev",
    ReferenceMode.MOVING_VWAP: "h_vwap",
}


class EntropyTracker:
    """All three reference modes plus the moving VWAP, advanced in lockstep.

    Same arithmetic as three :class:`EntropyAccumulator` instances, flattened
    so one trade costs a single ``log(q)`` and no per-mode dispatch.
    """

    __slots__ = (
        "n", "q_total", "pq_sum", "pq_comp", "open_price", "last_price",
        "a_open", "ac_open", "b_open", "bc_open",
        "a_prev", "ac_prev", "b_prev", "bc_prev",
        "a_vwap", "ac_vwap", "b_vwap", "bc_vwap",
    )  # fmt: skip

    # Slot order matching the compiled kernel's state vector.
    _FLOAT_SLOTS = (
        "pq_sum", "pq_comp", "open_price", "last_price",
        "a_open", "ac_open", "b_open", "bc_open",
        "a_prev", "ac_prev", "b_prev", "bc_prev",
        "a_vwap", "ac_vwap", "b_vwap", "bc_vwap",
    )  # fmt: skip

    def __init__(self) -> None:
        self.n = 0
        self.q_total = 0
        self.pq_sum = self.pq_comp = 0.0
        self.open_price = 0.0
        self.last_price = 0.0
        self.a_open = self.ac_open = self.b_open = self.bc_open = 0.0
        self.a_prev = self.ac_prev = self.b_prev = self.bc_prev = 0.0
        self.a_vwap = self.ac_vwap = self.b_vwap = self.bc_vwap = 0.0

    def update(self, quantity: int, price: float) -> None:
        q_total = self.q_total
        if self.n == 0:
            self.open_price = price
            self.last_price = price
            self.pq_sum, self.pq_comp = _two_prod(price, float(quantity))
            self.q_total = quantity
            self.n = 1
            return  # every weight is zero for the opening trade

        lq = _log(quantity)

        wq = (price - self.open_price) / self.open_price * quantity
        x = wq * lq
        s = self.a_open
        t = s + x
        self.ac_open += ((s - t) + x) if abs(s) >= abs(x) else ((x - t) + s)
        self.a_open = t
        s = self.b_open
        t = s + wq
        self.bc_open += ((s - t) + wq) if abs(s) >= abs(wq) else ((wq - t) + s)
        self.b_open = t

        wq = (price - self.last_price) / self.last_price * quantity
        x = wq * lq
        s = self.a_prev
        t = s + x
        self.ac_prev += ((s - t) + x) if abs(s) >= abs(x) else ((x - t) + s)
        self.a_prev = t
        s = self.b_prev
        t = s + wq
        self.bc_prev += ((s - t) + wq) if abs(s) >= abs(wq) else ((wq - t) + s)
        self.b_prev = t

        wq = _vwap_weight(price, self.pq_sum, self.pq_comp, q_total) * quantity
        x = wq * lq
        s = self.a_vwap
        t = s + x
        self.ac_vwap += ((s - t) + x) if abs(s) >= abs(x) else ((x - t) + s)
        self.a_vwap = t
        s = self.b_vwap
        t = s + wq
        self.bc_vwap += ((s - t) + wq) if abs(s) >= abs(wq) else ((wq - t) + s)
        self.b_vwap = t

        self.last_price = price
        self.pq_sum, self.pq_comp = _pq_add(self.pq_sum, self.pq_comp, price, quantity)
        self.q_total = q_total + quantity
        self.n += 1

    def extend_arrays(self, quantities, prices) -> None:
        """Bulk :meth:`update` over parallel quantity and price arrays."""
        qs = np.ascontiguousarray(quantities, dtype=np.int64)
        ps = np.ascontiguousarray(prices, dtype=np.float64)
        if qs.shape != ps.shape or qs.ndim != 1:
            raise ValueError("quantities and prices must be 1-D arrays of equal length")
        if qs.size == 0:
            return
        if qs.min() < 1 or not (ps.min() > 0 and np.isfinite(ps).all()):
            raise ValueError("quantities must be >= 1 and prices finite and > 0")
        if self.n == 0:
            self.update(int(qs[0]), float(ps[0]))
            qs, ps = qs[1:], ps[1:]
            if qs.size == 0:
                return
        if self.q_total + int(qs.max()) * qs.size > _INT64_MAX:
            # Beyond the kernel's integer range; Python ints do not overflow.
            for q, p in zip(qs.tolist(), ps.tolist()):
                self.update(q, p)
            return
        st = np.array([getattr(self, k) for k in self._FLOAT_SLOTS], dtype=np.float64)
        self.q_total = int(_kernels.advance(st, self.q_total, qs, ps))
        for k, v in zip(self._FLOAT_SLOTS, st.tolist()):
            setattr(self, k, v)
        self.n += int(qs.size)

    def extend(self, trades: Iterable[tuple[int, float]]) -> None:
        """Bulk :meth:`update` over ``(quantity, price)`` pairs.

        Consumed in fixed-size chunks, so memory use does not depend on the
        length of ``trades`` when it is an iterator.
        """
        it = iter(trades)
        while chunk := list(itertools.islice(it, EXTEND_CHUNK)):
            qs, ps = zip(*chunk)
            self.extend_arrays(np.array(qs, dtype=np.int64), np.array(ps, dtype=np.float64))

    @property
    def vwap(self) -> float:
        return (self.pq_sum + self.pq_comp) / self.q_total if self.n else float("nan")

    def values(self) -> tuple[float, float, float]:
        """(h_open, h_prev, h_vwap) over every trade seen so far."""
        if self.n == 0:
            return 0.0, 0.0, 0.0
        q = self.q_total
        lq = _log(q)
        return (
            -((self.a_open + self.ac_open) - (self.b_open + self.bc_open) * lq) / q,
            -((self.a_prev + self.ac_prev) - (self.b_prev + self.bc_prev) * lq) / q,
            -((self.a_vwap + self.ac_vwap) - (self.b_vwap + self.bc_vwap) * lq) / q,
        )


def compute_series(stream: TradingDayStream | Sequence[Trade]) -> list[EntropySeriesPoint]:
    """One point per trade; the VWAP at point i includes trade i."""
    tracker = EntropyTracker()
    out = []
    for ordinal, t in enumerate(stream, start=1):
        tracker.update(t.quantity, t.price)
        h_open, h_prev, h_vwap = tracker.values()
        out.append(
            EntropySeriesPoint(ordinal, t.timestamp, t.price, tracker.vwap, h_open, h_prev, h_vwap)
        )
    return out


SERIES_HEADER = ("ordinal", "timestamp", "price", "vwap", "h_open", "h_prev", "h_vwap")


def write_series(points: Iterable[EntropySeriesPoint], sink: TextIO) -> None:
    # repr() is the shortest round-tripping form: full double precision.
    sink.write(",".join(SERIES_HEADER) + "\n")
    for p in points:
        sink.write(
            f"{p.ordinal},{format_timestamp(p.timestamp)},{p.price!r},{p.vwap!r},"
            f"{p.h_open!r},{p.h_prev!r},{p.h_vwap!r}\n"
        )


def dump_series(points: Iterable[EntropySeriesPoint]) -> str:
    buf = io.StringIO()
    write_series(points, buf)
    return buf.getvalue()
