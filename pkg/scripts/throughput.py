"""Time the three-mode entropy tracker over a long synthetic single-symbol tape."""

from __future__ import annotations

import argparse
import time

from intrinsic_entropy.entropy import EntropyTracker
from intrinsic_entropy.synthetic import trade_pairs


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("-n", type=int, default=10**6, help="number of trades")
    ap.add_argument("--repeats", type=int, default=3)
    ap.add_argument("--per-trade", action="store_true", help="time update() instead of the bulk path")
    args = ap.parse_args()

    pairs = list(trade_pairs(args.n, seed=0))
    EntropyTracker().extend(pairs[:16])  # JIT warm-up
    for r in range(args.repeats):
        tracker = EntropyTracker()
        t0 = time.perf_counter()
        if args.per_trade:
            for q, p in pairs:
                tracker.update(q, p)
        else:
            tracker.extend(pairs)
        dt = time.perf_counter() - t0
        h = ", ".join(f"{v:.6g}" for v in tracker.values())
        print(f"run {r + 1}: {args.n} trades in {dt:.3f} s ({args.n / dt:,.0f}/s)  H(open, prev, vwap) = {h}")


if __name__ == "__main__":
    main()
