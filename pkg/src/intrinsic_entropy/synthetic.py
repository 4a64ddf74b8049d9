"""Synthetic intraday tapes for tests, benchmarks and demo runs."""

from __future__ import annotations

from datetime import datetime, timedelta
from typing import Iterator

import numpy as np

from intrinsic_entropy.market_data import Trade, TradingDayStream

SESSION_OPEN = datetime(2018, 12, 19, 10, 0)


def random_walk_prices(
    rng: np.random.Generator, n: int, start: float = 10.0, step: float = 0.05
) -> np.ndarray:
    """Multiplicative walk, each move drawn uniformly from ±``step``."""
    moves = 1.0 + rng.uniform(-step, step, size=n)
    moves[0] = 1.0
    return start * np.cumprod(moves)


def random_stream(
    rng: np.random.Generator,
    n: int,
    symbol: str = "SYN",
    start: float = 10.0,
    step: float = 0.05,
    max_quantity: int = 10**6,
) -> TradingDayStream:
    prices = random_walk_prices(rng, n, start, step)
    quantities = rng.integers(1, max_quantity, size=n, endpoint=True)
    return stream_from_arrays(symbol, quantities, prices)


def stream_from_arrays(symbol: str, quantities, prices, start: datetime = SESSION_OPEN) -> TradingDayStream:
    # One trade every 10 s keeps the timestamps non-decreasing by construction.
    trades = tuple(
        Trade(start + timedelta(seconds=10 * i), symbol, int(q), float(p))
        for i, (q, p) in enumerate(zip(quantities, prices))
    )
    return TradingDayStream(symbol, trades)


def monotone_stream(
    rng: np.random.Generator, n: int, rising: bool, symbol: str = "MONO", max_quantity: int = 10**6
) -> TradingDayStream:
    """Prices strictly rising (or falling) at every trade."""
    steps = rng.uniform(0.0005, 0.02, size=n)
    steps[0] = 0.0
    factor = 1.0 + steps if rising else 1.0 - steps
    prices = rng.uniform(1.0, 100.0) * np.cumprod(factor)
    quantities = rng.integers(1, max_quantity, size=n, endpoint=True)
    return stream_from_arrays(symbol, quantities, prices)


def trade_pairs(
    n: int, seed: int = 0, start: float = 10.0, step: float = 0.001, chunk: int = 65536
) -> Iterator[tuple[int, float]]:
    """Lazily yield ``n`` (quantity, price) pairs, generating ``chunk`` at a time."""
    rng = np.random.default_rng(seed)
    price = start
    remaining = n
    while remaining > 0:
        m = min(chunk, remaining)
        moves = 1.0 + rng.uniform(-step, step, size=m)
        prices = price * np.cumprod(moves)
        price = float(prices[-1])
        quantities = rng.integers(1, 10**6, size=m, endpoint=True)
        yield from zip(quantities.tolist(), prices.tolist())
        remaining -= m


def synthetic_day(seed: int = 0, n_symbols: int = 29, min_trades: int = 12, max_trades: int = 400) -> list[Trade]:
    """A multi-symbol tape interleaved by timestamp, like an exchange trade feed."""
    rng = np.random.default_rng(seed)
    trades: list[Trade] = []
    for k in range(n_symbols):
        symbol = f"S{k:02d}"
        n = int(rng.integers(min_trades, max_trades, endpoint=True))
        start = float(np.round(rng.uniform(0.1, 300.0), 3))
        prices = np.round(random_walk_prices(rng, n, start, 0.01), 4)
        prices = np.maximum(prices, 0.0001)
        quantities = rng.integers(1, 5000, size=n, endpoint=True)
        offsets = np.sort(rng.integers(0, 8 * 3600, size=n))
        for off, q, p in zip(offsets, quantities, prices):
            trades.append(Trade(SESSION_OPEN + timedelta(seconds=int(off)), symbol, int(q), float(p)))
    trades.sort(key=lambda t: t.timestamp)  # stable: per-symbol order survives ties
    return trades
