"""Write a synthetic multi-symbol trading day plus a market-cap sidecar.

    python scripts/make_synthetic_day.py --out data/ --seed 0
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from intrinsic_entropy.market_data import write_trades
from intrinsic_entropy.synthetic import synthetic_day


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--out", type=Path, default=Path("data"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--symbols", type=int, default=29)
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    trades = synthetic_day(seed=args.seed, n_symbols=args.symbols)
    ticks = args.out / "2018-12-19.csv"
    with open(ticks, "w", encoding="utf-8", newline="") as fh:
        write_trades(trades, fh)

    rng = np.random.default_rng(args.seed + 1)
    caps = args.out / "caps.csv"
    with open(caps, "w", encoding="utf-8", newline="") as fh:
        fh.write("symbol,market_cap\n")
        for sym in sorted({t.symbol for t in trades}):
            fh.write(f"{sym},{float(np.round(rng.lognormal(20, 1.5), 0))!r}\n")
    print(f"{len(trades)} trades -> {ticks}")
    print(f"caps -> {caps}")


if __name__ == "__main__":
    main()
