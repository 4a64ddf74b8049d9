"""Recompute the reported round-trip returns and the strategy comparison.

Prints each round trip next to its reported value, then the cumulated
returns, their ratio and the per-symbol averages.
"""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))

from reported_tables import ENTROPY_ROUND_TRIPS, VWAP_ROUND_TRIPS  # noqa: E402

from intrinsic_entropy.backtest import BacktestReport, RoundTrip, compare_strategies  # noqa: E402


def as_report(name: str, rows) -> BacktestReport:
    # Only the prices matter for the arithmetic; ordinals are placeholders.
    entries = {sym: RoundTrip(sym, 1, buy, buy, 2, sell, sell) for sym, buy, sell, _ in rows}
    return BacktestReport(name, entries)


def main() -> None:
    reports = []
    for name, rows in (("entropy", ENTROPY_ROUND_TRIPS), ("vwap", VWAP_ROUND_TRIPS)):
        report = as_report(name, rows)
        reports.append(report)
        print(f"{name} strategy")
        for (sym, buy, sell, reported), rt in zip(rows, report.trades):
            print(f"  {sym:5s} {buy:>8g} -> {sell:<8g} {rt.return_pct:9.4f}%  (reported {reported:.4f}%)")
        print(f"  cumulated {report.cumulated_return:.4f}%")
    cmp = compare_strategies(*reports)
    print(f"ratio {cmp.ratio:.4f}, averages {cmp.average_a:.4f}% / {cmp.average_b:.4f}%")


if __name__ == "__main__":
    main()
