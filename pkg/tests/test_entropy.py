import math
from datetime import datetime
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from intrinsic_entropy.entropy import (
    _two_prod,
    EntropyAccumulator,
    EntropyTracker,
    ReferenceMode,
    VwapState,
    compute_series,
    dump_series,
    entropy_naive,
    entropy_update,
    entropy_value,
    reference_price,
    shannon_entropy,
    vwap_update,
)
from intrinsic_entropy.market_data import Trade, TradingDayStream
from intrinsic_entropy.synthetic import monotone_stream, random_stream, stream_from_arrays

T0 = datetime(2018, 12, 19, 10, 0)
MODES = list(ReferenceMode)

# -(0.1)(0.5)ln(0.5): trade 2 sits 10% above the open, both trades half the volume.
TWO_TRADE_H = -(0.1) * 0.5 * math.log(0.5)


def tr(q, p):
    return Trade(T0, "BRD", q, p)


def feed(mode, pairs):
    acc = EntropyAccumulator(mode)
    for q, p in pairs:
        entropy_update(acc, tr(q, p))
    return acc


def test_two_trade_oracle_value():
    assert TWO_TRADE_H == pytest.approx(0.0346574, abs=1e-7)


@pytest.mark.parametrize(
    "pairs, expected",
    [([(100, 10)], 10.0), ([(100, 10), (100, 12)], 11.0), ([(100, 10), (300, 12)], (1000 + 3600) / 400)],
)
def test_vwap_update(pairs, expected):
    state = VwapState()
    assert state.vwap is None
    for q, p in pairs:
        state = vwap_update(state, tr(q, p))
    assert state.vwap == pytest.approx(expected, rel=1e-15)


def test_reference_prices():
    acc = feed(ReferenceMode.PRECEDING_TRADE, [(100, 10)])
    assert reference_price(acc, tr(50, 11)) == 10.0
    acc = feed(ReferenceMode.MOVING_VWAP, [(100, 10), (300, 12)])
    assert reference_price(acc, tr(1, 1)) == pytest.approx(11.5, rel=1e-15)
    assert reference_price(EntropyAccumulator(ReferenceMode.OPEN_PRICE), tr(100, 10)) is None
    acc = feed(ReferenceMode.OPEN_PRICE, [(100, 10), (5, 13)])
    assert reference_price(acc, tr(1, 1)) == 10.0


@pytest.mark.parametrize("mode", MODES)
def test_single_trade_is_zero(mode):
    assert entropy_value(feed(mode, [(100, 10)])) == 0.0
    assert entropy_naive([tr(100, 10)], mode) == 0.0


def test_empty_accumulator_is_zero():
    assert entropy_value(EntropyAccumulator(ReferenceMode.MOVING_VWAP)) == 0.0
    assert entropy_naive([], ReferenceMode.MOVING_VWAP) == 0.0


def test_constant_price_prev_mode_is_zero():
    assert entropy_value(feed(ReferenceMode.PRECEDING_TRADE, [(100, 10), (100, 10)])) == 0.0


def test_two_trade_open_mode():
    acc = feed(ReferenceMode.OPEN_PRICE, [(100, 10), (100, 11)])
    assert entropy_value(acc) == pytest.approx(TWO_TRADE_H, rel=1e-12)
    assert entropy_naive([tr(100, 10), tr(100, 11)], ReferenceMode.OPEN_PRICE) == pytest.approx(TWO_TRADE_H, rel=1e-12)


def test_accumulator_fields():
    acc = feed(ReferenceMode.OPEN_PRICE, [(100, 10), (100, 11)])
    assert acc.trade_count == 2
    assert acc.total_quantity == 200
    assert acc.weighted_q_sum == pytest.approx(0.1 * 100, rel=1e-12)
    assert acc.weighted_qlq_sum == pytest.approx(0.1 * 100 * math.log(100), rel=1e-12)
    assert acc.vwap_state.vwap == pytest.approx(10.5)


@pytest.mark.parametrize("n", [2, 3, 10, 57, 100])
def test_equal_quantities_constant_weight(n):
    # Prices grow 1% per trade so every preceding-trade weight is exactly the same 0.01.
    w = 0.01
    prices = [10.0]
    for _ in range(n - 1):
        prices.append(prices[-1] * (1 + w))
    trades = [tr(7, p) for p in prices]
    acc = EntropyAccumulator(ReferenceMode.PRECEDING_TRADE)
    for t in trades:
        entropy_update(acc, t)
    weights = [0.0] + [p / q - 1 for q, p in zip(prices, prices[1:])]
    # Summation oracle: -sum w_i (1/n) ln(1/n); trade 1 carries no weight.
    oracle = -math.fsum(wi * (1 / n) * math.log(1 / n) for wi in weights)
    assert entropy_value(acc) == pytest.approx(oracle, rel=1e-12)
    assert entropy_naive(trades, ReferenceMode.PRECEDING_TRADE) == pytest.approx(oracle, rel=1e-12)


def test_shannon_examples():
    assert shannon_entropy([0.25] * 4, 2) == pytest.approx(2.0, rel=1e-15)
    assert shannon_entropy([1.0], 10) == 0.0
    assert shannon_entropy([0.5, 0.25, 0.25], 2) == pytest.approx(0.5 * 1 + 0.25 * 2 + 0.25 * 2)
    assert shannon_entropy([0.5, 0.0, 0.5], 2) == pytest.approx(1.0)


@pytest.mark.parametrize("probs", [[0.5, 0.6], [1.2, -0.2], [0.3, 0.3]])
def test_shannon_rejects_bad_distributions(probs):
    with pytest.raises(ValueError):
        shannon_entropy(probs, 2)


def test_series_single_trade():
    (pt,) = compute_series(TradingDayStream("BRD", (tr(100, 10),)))
    assert pt.h_open == pt.h_prev == pt.h_vwap == 0.0
    assert pt.vwap == 10.0 and pt.ordinal == 1


@pytest.mark.parametrize("rising", [True, False])
def test_series_monotone_sign(rising):
    stream = monotone_stream(np.random.default_rng(3), 10, rising)
    series = compute_series(stream)
    for pt in series[1:]:
        assert (pt.h_prev > 0) if rising else (pt.h_prev < 0)


def test_series_matches_accumulators():
    stream = random_stream(np.random.default_rng(11), 300)
    series = compute_series(stream)
    accs = {m: EntropyAccumulator(m) for m in MODES}
    pq = q = 0
    for pt, t in zip(series, stream):
        pq += t.price * t.quantity
        q += t.quantity
        for m, acc in accs.items():
            entropy_update(acc, t)
            assert pt.h(m) == pytest.approx(entropy_value(acc), rel=1e-12, abs=1e-15)
        assert pt.vwap == pytest.approx(pq / q, rel=1e-14)


def test_tracker_extend_matches_update():
    stream = random_stream(np.random.default_rng(5), 2000)
    one, bulk = EntropyTracker(), EntropyTracker()
    for t in stream:
        one.update(t.quantity, t.price)
    bulk.extend(((t.quantity, t.price) for t in stream.trades[:700]))
    bulk.extend(((t.quantity, t.price) for t in stream.trades[700:]))
    # The compiled kernel replays the same operations, so agreement is exact.
    assert one.values() == bulk.values()
    assert one.vwap == bulk.vwap
    assert (one.n, one.q_total) == (bulk.n, bulk.q_total)
    for mode, value in zip(MODES, bulk.values()):
        assert value == pytest.approx(entropy_naive(stream, mode), rel=1e-9, abs=1e-9)


def test_tracker_matches_accumulators_exactly():
    stream = random_stream(np.random.default_rng(8), 500)
    tracker = EntropyTracker()
    accs = [EntropyAccumulator(m) for m in MODES]
    for t in stream:
        tracker.update(t.quantity, t.price)
        for acc in accs:
            acc.update(t.quantity, t.price)
    assert tracker.values() == tuple(acc.value() for acc in accs)


def test_extend_arrays_validation():
    tracker = EntropyTracker()
    with pytest.raises(ValueError):
        tracker.extend_arrays([1, 2], [1.0])
    with pytest.raises(ValueError):
        tracker.extend_arrays([0, 2], [1.0, 2.0])
    with pytest.raises(ValueError):
        tracker.extend_arrays([1, 2], [1.0, float("nan")])
    tracker.extend_arrays([], [])
    assert tracker.n == 0
    tracker.extend_arrays([100, 100], [10.0, 11.0])
    assert tracker.values()[0] == pytest.approx(TWO_TRADE_H, rel=1e-12)


def test_extend_falls_back_near_int64_limit():
    big = 2**62
    one, bulk = EntropyTracker(), EntropyTracker()
    pairs = [(big, 10.0), (big, 10.5), (big, 9.5)]
    for q, p in pairs:
        one.update(q, p)
    bulk.extend(pairs)
    assert bulk.q_total == 3 * big
    assert one.values() == bulk.values()


@given(
    st.floats(1e-6, 1e9, allow_nan=False, allow_infinity=False),
    st.floats(1.0, 2.0**52, allow_nan=False, allow_infinity=False),
)
def test_two_prod_is_error_free(a, b):
    hi, lo = _two_prod(a, b)
    assert Fraction(hi) + Fraction(lo) == Fraction(a) * Fraction(b)


def test_small_vwap_weight_keeps_relative_accuracy():
    # Trade priced one part in 1e10 above a VWAP built from many trades.
    acc = EntropyAccumulator(ReferenceMode.MOVING_VWAP)
    pairs = [(3, 0.1), (7, 0.3), (11, 0.7)] * 50
    for q, p in pairs:
        acc.update(q, p)
    s = sum(Fraction(p) * q for q, p in pairs)
    qsum = sum(q for q, _ in pairs)
    price = float(s / qsum * (1 + Fraction(1, 10**10)))
    exact = (Fraction(price) * qsum - s) / s
    assert acc.weight(price) == pytest.approx(float(exact), rel=1e-14)


def test_series_csv_header_and_precision():
    stream = random_stream(np.random.default_rng(1), 3)
    text = dump_series(compute_series(stream))
    lines = text.splitlines()
    assert lines[0] == "ordinal,timestamp,price,vwap,h_open,h_prev,h_vwap"
    assert len(lines) == 4
    row = lines[2].split(",")
    assert float(row[3]) == compute_series(stream)[1].vwap


def test_normalization_every_prefix():
    stream = random_stream(np.random.default_rng(2), 500)
    q = 0
    for i, t in enumerate(stream, start=1):
        q += t.quantity
        assert abs(math.fsum(s.quantity / q for s in stream.trades[:i]) - 1.0) <= 1e-12


pairs_st = st.lists(
    st.tuples(st.integers(1, 10**6), st.floats(-0.05, 0.05, allow_nan=False)), min_size=1, max_size=80
)


def _stream(pairs, start=10.0, qscale=1, pscale=1.0):
    price = start
    qs, ps = [], []
    for q, move in pairs:
        price *= 1 + move
        qs.append(q * qscale)
        ps.append(price * pscale)
    return stream_from_arrays("HYP", qs, ps)


@given(pairs_st)
def test_incremental_equals_naive(pairs):
    stream = _stream(pairs)
    for mode in MODES:
        acc = EntropyAccumulator(mode)
        for t in stream:
            entropy_update(acc, t)
        naive = entropy_naive(stream, mode)
        assert abs(entropy_value(acc) - naive) <= 1e-9 * max(1.0, abs(naive))


@given(pairs_st, st.floats(0.01, 100.0), st.integers(1, 1000))
def test_scale_invariance(pairs, c, k):
    base = compute_series(_stream(pairs))[-1]
    scaled_p = compute_series(_stream(pairs, pscale=c))[-1]
    scaled_q = compute_series(_stream(pairs, qscale=k))[-1]
    for mode in MODES:
        h = base.h(mode)
        assert scaled_p.h(mode) == pytest.approx(h, rel=1e-12, abs=1e-15)
        assert scaled_q.h(mode) == pytest.approx(h, rel=1e-12, abs=1e-15)


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=50), st.floats(0.01, 500.0))
def test_prices_at_reference_give_zero(quantities, price):
    stream = stream_from_arrays("FLAT", quantities, [price] * len(quantities))
    pt = compute_series(stream)[-1]
    assert pt.h_open == 0.0 and pt.h_prev == 0.0 and pt.h_vwap == pytest.approx(0.0, abs=1e-13)
