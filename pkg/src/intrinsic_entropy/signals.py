"""Reading direction out of an entropy series: sign classes, crossings, lead time."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

DEFAULT_EPSILON = 1e-4
DEFAULT_SUSTAIN = 3


class DirectionClass(enum.Enum):
    BUY_INCLINED = "buy"
    SELL_INCLINED = "sell"
    INDETERMINATE = "indeterminate"

    def mirror(self) -> DirectionClass:
        if self is DirectionClass.BUY_INCLINED:
            return DirectionClass.SELL_INCLINED
        if self is DirectionClass.SELL_INCLINED:
            return DirectionClass.BUY_INCLINED
        return self


class CrossDirection(enum.Enum):
    INTO_NEGATIVE = "into_negative"
    INTO_POSITIVE = "into_positive"


@dataclass(frozen=True, slots=True)
class CrossingEvent:
    ordinal: int
    direction: CrossDirection
    series: str  # e.g. "entropy:prev" or "price_minus_vwap"


def classify_direction(h: float, epsilon: float = DEFAULT_EPSILON) -> DirectionClass:
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if h > epsilon:
        return DirectionClass.BUY_INCLINED
    if h < -epsilon:
        return DirectionClass.SELL_INCLINED
    return DirectionClass.INDETERMINATE


def detect_crossings(
    series: Iterable[tuple[int, float]], name: str = "entropy"
) -> list[CrossingEvent]:
    """Emit an event wherever the sign flips relative to the last nonzero value.

    Exact zeros are sign-neutral: they neither emit nor reset the comparison,
    so ``+, 0, -`` yields a single IntoNegative at the ``-`` point.
    """
    events = []
    last_sign = 0
    for ordinal, value in series:
        if value > 0:
            sign = 1
        elif value < 0:
            sign = -1
        else:
            continue
        if last_sign and sign != last_sign:
            direction = CrossDirection.INTO_NEGATIVE if sign < 0 else CrossDirection.INTO_POSITIVE
            events.append(CrossingEvent(ordinal, direction, name))
        last_sign = sign
    return events


def first_sustained_negative(values: Sequence[float], ordinals: Sequence[int], k: int) -> int | None:
    """Ordinal opening the first run of at least ``k`` strictly negative values."""
    if k < 1:
        raise ValueError("sustain window must be >= 1")
    run = 0
    for idx, v in enumerate(values):
        run = run + 1 if v < 0 else 0
        if run == k:
            return ordinals[idx - k + 1]
    return None


def lead_time(
    entropy: Sequence[float],
    prices: Sequence[float],
    vwaps: Sequence[float],
    ordinals: Sequence[int] | None = None,
    k: int = DEFAULT_SUSTAIN,
) -> int | None:
    """Trades between entropy turning (and staying) negative and price first dipping under VWAP.

    Positive means entropy moved first. None if either event never happens.
    """
    if not (len(entropy) == len(prices) == len(vwaps)):
        raise ValueError("series must be aligned")
    if ordinals is None:
        ordinals = range(1, len(entropy) + 1)
    h_start = first_sustained_negative(entropy, ordinals, k)
    if h_start is None:
        return None
    below = next((o for o, p, v in zip(ordinals, prices, vwaps) if p < v), None)
    if below is None:
        return None
    return below - h_start


SIGNALS_HEADER = ("ordinal", "series", "direction")


def write_signals(events: Iterable[CrossingEvent], sink: TextIO) -> None:
    sink.write(",".join(SIGNALS_HEADER) + "\n")
    for e in sorted(events, key=lambda e: (e.ordinal, e.series)):
        sink.write(f"{e.ordinal},{e.series},{e.direction.value}\n")


def dump_signals(events: Iterable[CrossingEvent]) -> str:
    buf = io.StringIO()
    write_signals(events, buf)
    return buf.getvalue()
