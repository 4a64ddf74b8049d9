"""Trade records, tick CSV ingestion and per-symbol partitioning."""

from __future__ import annotations

import io
import math
import re
from dataclasses import dataclass
from datetime import datetime
from typing import Iterable, Iterator, Sequence, TextIO

HEADER = ("timestamp", "symbol", "quantity", "price")
MAX_QUANTITY = 2**63 - 1

_SYMBOL_RE = re.compile(r"^[A-Z0-9]+$")


class MarketDataError(ValueError):
    """Base class for ingestion errors; carries the offending line and field."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        self.line = line
        self.field = field
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


class TradeFormatError(MarketDataError):
    """Structurally broken input: bad header, wrong column count, unparsable value."""


class TradeValidationError(MarketDataError):
    """Well-formed input that violates a trade or stream invariant."""


@dataclass(frozen=True, slots=True)
class Trade:
    timestamp: datetime
    symbol: str
    quantity: int
    price: float

    def __post_init__(self) -> None:
        if not self.symbol:
            raise TradeValidationError("symbol must be non-empty", field="symbol")
        if not _SYMBOL_RE.match(self.symbol):
            raise TradeValidationError(
                f"symbol must be uppercase alphanumeric, got {self.symbol!r}", field="symbol"
            )
        if self.quantity < 1:
            raise TradeValidationError("quantity must be ≥ 1", field="quantity")
        if self.quantity > MAX_QUANTITY:
            raise TradeValidationError("quantity exceeds 2^63-1", field="quantity")
        if not (self.price > 0 and math.isfinite(self.price)):
            raise TradeValidationError("price must be > 0", field="price")


@dataclass(frozen=True)
class TradingDayStream:
    """One symbol's trades for a session, in execution order.

    Ordinals are 1-based: ``stream[1]`` is the first execution of the day.
    """

    symbol: str
    trades: tuple[Trade, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "trades", tuple(self.trades))
        prev = None
        for ordinal, trade in enumerate(self.trades, start=1):
            if trade.symbol != self.symbol:
                raise TradeValidationError(
                    f"trade at ordinal {ordinal} has symbol {trade.symbol}, expected {self.symbol}"
                )
            if prev is not None and trade.timestamp < prev:
                raise TradeValidationError(f"timestamp regression at ordinal {ordinal}")
            prev = trade.timestamp

    def __len__(self) -> int:
        return len(self.trades)

    def __iter__(self) -> Iterator[Trade]:
        return iter(self.trades)

    def __getitem__(self, ordinal: int) -> Trade:
        if not 1 <= ordinal <= len(self.trades):
            raise IndexError(f"ordinal {ordinal} out of range 1..{len(self.trades)}")
        return self.trades[ordinal - 1]

    def prefix(self, n: int) -> TradingDayStream:
        return TradingDayStream(self.symbol, self.trades[:n])


def _parse_row(fields: list[str], line: int) -> Trade:
    if len(fields) != len(HEADER):
        raise TradeFormatError(f"expected {len(HEADER)} fields, got {len(fields)}", line=line)
    ts_text, symbol, qty_text, price_text = (f.strip() for f in fields)
    try:
        timestamp = datetime.fromisoformat(ts_text)
    except ValueError:
        raise TradeFormatError(f"bad timestamp {ts_text!r}", line=line, field="timestamp") from None
    try:
        quantity = int(qty_text)
    except ValueError:
        raise TradeFormatError(f"bad quantity {qty_text!r}", line=line, field="quantity") from None
    try:
        price = float(price_text)
    except ValueError:
        raise TradeFormatError(f"bad price {price_text!r}", line=line, field="price") from None
    try:
        return Trade(timestamp, symbol, quantity, price)
    except TradeValidationError as exc:
        raise TradeValidationError(str(exc), line=line, field=exc.field) from None


def iter_trades(source: TextIO) -> Iterator[Trade]:
    """Lazily parse a tick CSV. Line numbers in errors count the header as line 1."""
    header = source.readline()
    if not header:
        raise TradeFormatError("empty input, missing header", line=1)
    names = tuple(h.strip() for h in header.lstrip("﻿").rstrip("\r\n").split(","))
    if names != HEADER:
        raise TradeFormatError(
            f"unknown header {','.join(names)!r}, expected {','.join(HEADER)!r}", line=1
        )
    for line_no, raw in enumerate(source, start=2):
        raw = raw.rstrip("\r\n")
        if not raw.strip():
            continue
        yield _parse_row(raw.split(","), line_no)


def parse_trades(source: TextIO | str) -> list[Trade]:
    """Parse ``timestamp,symbol,quantity,price`` CSV text into trades, in file order."""
    if isinstance(source, str):
        source = io.StringIO(source)
    return list(iter_trades(source))


def read_trades(path) -> list[Trade]:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_trades(fh)


def format_timestamp(ts: datetime) -> str:
    if ts.second == 0 and ts.microsecond == 0:
        return ts.isoformat(timespec="minutes")
    return ts.isoformat()


def write_trades(trades: Iterable[Trade], sink: TextIO) -> None:
    sink.write(",".join(HEADER) + "\n")
    for t in trades:
        sink.write(f"{format_timestamp(t.timestamp)},{t.symbol},{t.quantity},{t.price!r}\n")


def dump_trades(trades: Iterable[Trade]) -> str:
    buf = io.StringIO()
    write_trades(trades, buf)
    return buf.getvalue()


def partition_by_symbol(trades: Sequence[Trade]) -> dict[str, TradingDayStream]:
    """Split a mixed tape into per-symbol streams, keeping within-symbol order.

    Keys come out in order of first appearance. Timestamp ties keep file order.
    """
    buckets: dict[str, list[Trade]] = {}
    for t in trades:
        buckets.setdefault(t.symbol, []).append(t)
    return {sym: TradingDayStream(sym, tuple(ts)) for sym, ts in buckets.items()}
