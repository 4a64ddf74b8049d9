"""Streaming intrinsic entropy for intraday trade data."""

__version__ = "0.1.0"

from intrinsic_entropy.entropy import (  # noqa: E402
    EntropyAccumulator,
    EntropySeriesPoint,
    EntropyTracker,
    ReferenceMode,
    compute_series,
    entropy_naive,
    entropy_update,
    entropy_value,
    shannon_entropy,
)
from intrinsic_entropy.market_data import Trade, TradingDayStream, parse_trades, partition_by_symbol  # noqa: E402

__all__ = [
    "EntropyAccumulator",
    "EntropySeriesPoint",
    "EntropyTracker",
    "ReferenceMode",
    "Trade",
    "TradingDayStream",
    "compute_series",
    "entropy_naive",
    "entropy_update",
    "entropy_value",
    "parse_trades",
    "partition_by_symbol",
    "shannon_entropy",
]
