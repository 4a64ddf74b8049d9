"""Single round-trip intraday strategies: entropy+VWAP and VWAP only.

Both walk the day once from the warm-up ordinal, buy one unit at most once and
sell it at most once. Ordinals are 1-based, so the default warm-up of 10
leaves trades 1..9 for observation only.

Buy (VWAP only):     p[i] < VWAP[i]
Buy (entropy):       any of H_open[i], H_prev[i], H_vwap[i] > 0, and p[i] < VWAP[i]
Sell (both):         first i after the buy where the exit price test holds,
                     or i is the final trade of the day (closing at its price).
Sell (entropy only): also when H_open[i], H_prev[i], H_vwap[i] are all < 0.

The exit price test is p[i] > VWAP[i] under ``SellRule.PROSE`` and
p[i] < VWAP[i] under ``SellRule.LITERAL``.
"""

from __future__ import annotations

import enum
import io
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence, TextIO

from intrinsic_entropy.entropy import EntropySeriesPoint, compute_series
from intrinsic_entropy.market_data import TradingDayStream


class SellRule(enum.Enum):
    PROSE = "prose"  # sell above VWAP
    LITERAL = "literal"  # sell below VWAP, as the printed pseudo-code reads


@dataclass(frozen=True)
class StrategyParams:
    warmup_trades: int = 10
    order_quantity: int = 1
    sell_rule: SellRule = SellRule.PROSE

    def __post_init__(self) -> None:
        object.__setattr__(self, "sell_rule", SellRule(self.sell_rule))
        if self.warmup_trades < 1:
            raise ValueError("warmup_trades must be >= 1")
        if self.order_quantity < 1:
            raise ValueError("order_quantity must be >= 1")


def round_trip_return(buy_price: float, sell_price: float) -> float:
    """Percentage return of buying at ``buy_price`` and selling at ``sell_price``."""
    if buy_price <= 0:
        raise ValueError("buy_price must be > 0")
    return (sell_price / buy_price - 1.0) * 100.0


def cumulate_returns(returns: Iterable[float]) -> float:
    """Plain sum of percentage returns, not compounded."""
    return math.fsum(returns)


@dataclass(frozen=True)
class RoundTrip:
    symbol: str
    buy_ordinal: int
    buy_price: float
    buy_vwap: float
    sell_ordinal: int
    sell_price: float
    sell_vwap: float

    def __post_init__(self) -> None:
        if self.sell_ordinal <= self.buy_ordinal:
            raise ValueError("sell must come after buy")

    @property
    def return_pct(self) -> float:
        return round_trip_return(self.buy_price, self.sell_price)


def _exit_on_price(rule: SellRule) -> Callable[[EntropySeriesPoint], bool]:
    if rule is SellRule.PROSE:
        return lambda pt: pt.price > pt.vwap
    return lambda pt: pt.price < pt.vwap


def _walk(
    symbol: str,
    points: Sequence[EntropySeriesPoint],
    params: StrategyParams,
    buy: Callable[[EntropySeriesPoint], bool],
    sell: Callable[[EntropySeriesPoint], bool],
) -> RoundTrip | None:
    n = len(points)
    bought: EntropySeriesPoint | None = None
    for pt in points[params.warmup_trades - 1 :]:
        if bought is None:
            if buy(pt):
                bought = pt
            continue
        if sell(pt) or pt.ordinal == n:
            return RoundTrip(
                symbol, bought.ordinal, bought.price, bought.vwap, pt.ordinal, pt.price, pt.vwap
            )
    # Never bought, or bought on the closing trade with nothing left to sell into.
    return None


def _series(stream: TradingDayStream, series: Sequence[EntropySeriesPoint] | None):
    if series is None:
        return compute_series(stream)
    if len(series) != len(stream):
        raise ValueError("series does not match stream length")
    return series


def run_entropy_strategy(
    stream: TradingDayStream,
    params: StrategyParams = StrategyParams(),
    series: Sequence[EntropySeriesPoint] | None = None,
) -> RoundTrip | None:
    points = _series(stream, series)
    price_exit = _exit_on_price(params.sell_rule)

    def buy(pt: EntropySeriesPoint) -> bool:
        return (pt.h_open > 0 or pt.h_prev > 0 or pt.h_vwap > 0) and pt.price < pt.vwap

    def sell(pt: EntropySeriesPoint) -> bool:
        return (pt.h_open < 0 and pt.h_prev < 0 and pt.h_vwap < 0) or price_exit(pt)

    return _walk(stream.symbol, points, params, buy, sell)


def run_vwap_strategy(
    stream: TradingDayStream,
    params: StrategyParams = StrategyParams(),
    series: Sequence[EntropySeriesPoint] | None = None,
) -> RoundTrip | None:
    points = _series(stream, series)
    return _walk(
        stream.symbol, points, params, lambda pt: pt.price < pt.vwap, _exit_on_price(params.sell_rule)
    )


@dataclass
class BacktestReport:
    """Outcome per considered symbol, in universe order; None marks untraded."""

    strategy: str
    entries: dict[str, RoundTrip | None] = field(default_factory=dict)

    @property
    def trades(self) -> list[RoundTrip]:
        return [rt for rt in self.entries.values() if rt is not None]

    @property
    def traded_symbols(self) -> list[str]:
        return [s for s, rt in self.entries.items() if rt is not None]

    @property
    def traded_count(self) -> int:
        return len(self.trades)

    @property
    def considered_count(self) -> int:
        return len(self.entries)

    @property
    def cumulated_return(self) -> float:
        return cumulate_returns(rt.return_pct for rt in self.trades)

    def restricted(self, symbols: Iterable[str]) -> BacktestReport:
        keep = set(symbols)
        return BacktestReport(
            self.strategy, {s: rt for s, rt in self.entries.items() if s in keep}
        )


@dataclass(frozen=True)
class StrategyComparison:
    cumulated_a: float
    cumulated_b: float
    ratio: float | None
    average_a: float | None
    average_b: float | None
    traded_a: int
    traded_b: int
    considered: int

    def as_dict(self) -> dict:
        return {
            "cumulated_return_a": self.cumulated_a,
            "cumulated_return_b": self.cumulated_b,
            "ratio": self.ratio,
            "average_return_a": self.average_a,
            "average_return_b": self.average_b,
            "traded_a": self.traded_a,
            "traded_b": self.traded_b,
            "considered": self.considered,
        }


def compare_strategies(report_a: BacktestReport, report_b: BacktestReport) -> StrategyComparison:
    """Cumulated-return ratio a/b and per-traded-symbol averages.

    The ratio is None when b's cumulated return is zero.
    """
    ca, cb = report_a.cumulated_return, report_b.cumulated_return
    ta, tb = report_a.traded_count, report_b.traded_count
    return StrategyComparison(
        cumulated_a=ca,
        cumulated_b=cb,
        ratio=None if cb == 0 else ca / cb,
        average_a=ca / ta if ta else None,
        average_b=cb / tb if tb else None,
        traded_a=ta,
        traded_b=tb,
        considered=max(report_a.considered_count, report_b.considered_count),
    )


def backtest_symbol(
    stream: TradingDayStream, params: StrategyParams = StrategyParams()
) -> tuple[RoundTrip | None, RoundTrip | None]:
    """Both strategies on one symbol, sharing one entropy series."""
    series = compute_series(stream)
    return (
        run_entropy_strategy(stream, params, series),
        run_vwap_strategy(stream, params, series),
    )


def run_backtest(
    streams: Mapping[str, TradingDayStream], params: StrategyParams = StrategyParams()
) -> tuple[BacktestReport, BacktestReport]:
    entropy_report = BacktestReport("entropy")
    vwap_report = BacktestReport("vwap")
    for symbol, stream in streams.items():
        entropy_report.entries[symbol], vwap_report.entries[symbol] = backtest_symbol(stream, params)
    return entropy_report, vwap_report


REPORT_HEADER = (
    "no", "symbol", "buy_trade_no", "buy_price", "buy_vwap",
    "sell_trade_no", "sell_price", "sell_vwap", "return_pct",
)  # fmt: skip


def write_report(report: BacktestReport, sink: TextIO) -> None:
    sink.write(",".join(REPORT_HEADER) + "\n")
    for no, (symbol, rt) in enumerate(report.entries.items(), start=1):
        if rt is None:
            sink.write(f"{no},{symbol},,,,,,,\n")
            continue
        sink.write(
            f"{no},{symbol},{rt.buy_ordinal},{rt.buy_price!r},{rt.buy_vwap!r},"
            f"{rt.sell_ordinal},{rt.sell_price!r},{rt.sell_vwap!r},{rt.return_pct!r}\n"
        )
    sink.write(f"cumulated_return,,,,,,,,{report.cumulated_return!r}\n")


def dump_report(report: BacktestReport) -> str:
    buf = io.StringIO()
    write_report(report, buf)
    return buf.getvalue()
