"""Entropy market map: squarified treemap tiles sized by weight, colored by entropy."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from intrinsic_entropy.market_data import TradeFormatError, TradeValidationError
from intrinsic_entropy.signals import DEFAULT_EPSILON

RGB = tuple[int, int, int]


@dataclass(frozen=True)
class TreemapNode:
    symbol: str
    weight_fraction: float
    x: float
    y: float
    w: float
    h: float
    entropy: float | None = None
    color: RGB = (0, 0, 0)

    @property
    def area(self) -> float:
        return self.w * self.h


def _worst(row_sum: float, row_max: float, row_min: float, side: float) -> float:
    # Largest aspect ratio in a row of the given areas laid along ``side``.
    s2 = row_sum * row_sum
    l2 = side * side
    return max(l2 * row_max / s2, s2 / (l2 * row_min))


def _squarify(areas: Sequence[float], x: float, y: float, w: float, h: float):
    """(x, y, w, h) per area, same order; areas must be sorted descending."""
    rects: list[tuple[float, float, float, float]] = []
    i = 0
    n = len(areas)
    while i < n:
        vertical = w >= h  # row stacks along the short side
        side = h if vertical else w
        j = i + 1
        row_sum = areas[i]
        worst = _worst(row_sum, areas[i], areas[i], side)
        while j < n:
            cand_sum = row_sum + areas[j]
            cand = _worst(cand_sum, areas[i], areas[j], side)
            if cand > worst:
                break
            row_sum, worst = cand_sum, cand
            j += 1
        last_row = j == n
        if vertical:
            thick = w if last_row else row_sum / side
            pos = y
            for k in range(i, j):
                length = (y + h - pos) if k == j - 1 else areas[k] / thick
                rects.append((x, pos, thick, length))
                pos += length
            x += thick
            w = 0.0 if last_row else w - thick
        else:
            thick = h if last_row else row_sum / side
            pos = x
            for k in range(i, j):
                length = (x + w - pos) if k == j - 1 else areas[k] / thick
                rects.append((pos, y, length, thick))
                pos += length
            y += thick
            h = 0.0 if last_row else h - thick
        i = j
    return rects


def layout_treemap(
    weights: Mapping[str, float], width: float = 1000.0, height: float = 600.0
) -> list[TreemapNode]:
    """Squarified layout; heaviest symbol first, ties broken by symbol name."""
    if not weights:
        raise ValueError("treemap needs at least one symbol")
    if not (width > 0 and height > 0):
        raise ValueError("canvas dimensions must be > 0")
    for sym, wt in weights.items():
        if not (wt > 0 and math.isfinite(wt)):
            raise ValueError(f"weight for {sym} must be > 0, got {wt!r}")
    order = sorted(weights, key=lambda s: (-weights[s], s))
    total = math.fsum(weights.values())
    fractions = [weights[s] / total for s in order]
    canvas = width * height
    rects = _squarify([f * canvas for f in fractions], 0.0, 0.0, width, height)
    return [TreemapNode(s, f, *r) for s, f, r in zip(order, fractions, rects)]


def entropy_color(h: float, epsilon: float = DEFAULT_EPSILON, saturation_scale: float = 1.0) -> RGB:
    """Black inside the ±epsilon band, otherwise a green (h > 0) or red (h < 0) ramp.

    Intensity rises linearly from the band edge and saturates at
    epsilon + saturation_scale; channel values round half up.
    """
    if epsilon < 0:
        raise ValueError("epsilon must be >= 0")
    if not saturation_scale > 0:
        raise ValueError("saturation_scale must be > 0")
    mag = abs(h)
    if mag <= epsilon:
        return (0, 0, 0)
    frac = min(1.0, (mag - epsilon) / saturation_scale)
    # The 1e-9 nudge keeps exact .5 cases from rounding down after float noise.
    level = min(255, math.floor(255.0 * frac + 0.5 + 1e-9))
    return (0, level, 0) if h > 0 else (level, 0, 0)


def default_saturation(entropies: Iterable[float]) -> float:
    """95th percentile of |H|; falls back to 1.0 when every value is zero."""
    mags = np.abs(np.asarray(list(entropies), dtype=float))
    if mags.size == 0:
        return 1.0
    scale = float(np.percentile(mags, 95))
    return scale if scale > 0 else 1.0


def build_market_map(
    weights: Mapping[str, float],
    entropies: Mapping[str, float],
    width: float = 1000.0,
    height: float = 600.0,
    epsilon: float = DEFAULT_EPSILON,
    saturation_scale: float | None = None,
) -> list[TreemapNode]:
    missing = set(weights) - set(entropies)
    if missing:
        raise ValueError(f"no entropy value for {sorted(missing)}")
    if saturation_scale is None:
        saturation_scale = default_saturation(entropies[s] for s in weights)
    out = []
    for node in layout_treemap(weights, width, height):
        h = entropies[node.symbol]
        out.append(replace(node, entropy=h, color=entropy_color(h, epsilon, saturation_scale)))
    return out


def to_json(nodes: Sequence[TreemapNode]) -> str:
    if not nodes:
        raise ValueError("no nodes to emit")
    doc = [
        {
            "symbol": n.symbol,
            "x": n.x,
            "y": n.y,
            "w": n.w,
            "h": n.h,
            "weight_fraction": n.weight_fraction,
            "entropy": n.entropy,
            "color": list(n.color),
        }
        for n in nodes
    ]
    return json.dumps(doc, indent=2) + "\n"


def from_json(text: str) -> list[TreemapNode]:
    return [
        TreemapNode(
            d["symbol"], d["weight_fraction"], d["x"], d["y"], d["w"], d["h"],
            d["entropy"], tuple(d["color"]),
        )  # fmt: skip
        for d in json.loads(text)
    ]


def _num(v: float) -> str:
    return f"{v:.3f}".rstrip("0").rstrip(".")


def to_svg(nodes: Sequence[TreemapNode], title: str = "Intrinsic entropy market map") -> str:
    if not nodes:
        raise ValueError("no nodes to emit")
    width = max(n.x + n.w for n in nodes)
    height = max(n.y + n.h for n in nodes)
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" height="{_num(height)}" '
        f'viewBox="0 0 {_num(width)} {_num(height)}">',
        f"<title>{_escape(title)}</title>",
    ]
    for n in nodes:
        r, g, b = n.color
        font = max(4.0, min(n.w / max(len(n.symbol), 1) * 1.2, n.h * 0.4, 28.0))
        label = n.symbol if n.entropy is None else f"{n.symbol} H={n.entropy:.6g}"
        out.append("<g>")
        out.append(f"<title>{_escape(label)}</title>")
        out.append(
            f'<rect x="{_num(n.x)}" y="{_num(n.y)}" width="{_num(n.w)}" height="{_num(n.h)}" '
            f'fill="rgb({r},{g},{b})" stroke="#ffffff" stroke-width="1"/>'
        )
        out.append(
            f'<text x="{_num(n.x + n.w / 2)}" y="{_num(n.y + n.h / 2)}" fill="#ffffff" '
            f'font-family="sans-serif" font-size="{_num(font)}" text-anchor="middle" '
            f'dominant-baseline="central">{_escape(n.symbol)}</text>'
        )
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_map(nodes: Sequence[TreemapNode], fmt: str = "svg") -> str:
    fmt = fmt.lower()
    if fmt == "svg":
        return to_svg(nodes)
    if fmt == "json":
        return to_json(nodes)
    raise ValueError(f"unknown map format {fmt!r}")


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def read_caps(path) -> dict[str, float]:
    """Parse a ``symbol,market_cap`` sidecar file."""
    caps: dict[str, float] = {}
    with open(path, encoding="utf-8", newline="") as fh:
        header = fh.readline().lstrip("﻿").strip()
        if tuple(h.strip() for h in header.split(",")) != ("symbol", "market_cap"):
            raise TradeFormatError(f"unknown caps header {header!r}, expected 'symbol,market_cap'", line=1)
        for line_no, raw in enumerate(fh, start=2):
            if not raw.strip():
                continue
            parts = [p.strip() for p in raw.rstrip("\r\n").split(",")]
            if len(parts) != 2:
                raise TradeFormatError(f"expected 2 fields, got {len(parts)}", line=line_no)
            sym, cap_text = parts
            try:
                cap = float(cap_text)
            except ValueError:
                raise TradeFormatError(f"bad market_cap {cap_text!r}", line=line_no, field="market_cap") from None
            if not (cap > 0 and math.isfinite(cap)):
                raise TradeValidationError(f"market_cap for {sym} must be > 0", line=line_no, field="market_cap")
            if sym in caps:
                raise TradeValidationError(f"duplicate symbol {sym}", line=line_no, field="symbol")
            caps[sym] = cap
    return caps

