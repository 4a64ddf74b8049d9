"""Command-line entry point: ``intrinsic-entropy {entropy,backtest,map,validate}``.

Settings resolve as built-in defaults < ``--config`` TOML file < flags.
Exit codes: 0 success, 1 runtime failure, 2 input validation failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence, TypeVar

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from intrinsic_entropy import __version__
from intrinsic_entropy.backtest import (
    BacktestReport,
    SellRule,
    StrategyParams,
    backtest_symbol,
    compare_strategies,
    dump_report,
)
from intrinsic_entropy.entropy import EntropyTracker, ReferenceMode, compute_series, dump_series
from intrinsic_entropy.market_data import (
    MarketDataError,
    Trade,
    TradingDayStream,
    partition_by_symbol,
    read_trades,
)
from intrinsic_entropy.market_map import build_market_map, read_caps, to_json, to_svg
from intrinsic_entropy.signals import (
    DEFAULT_EPSILON,
    DEFAULT_SUSTAIN,
    classify_direction,
    detect_crossings,
    dump_signals,
    lead_time,
)

log = logging.getLogger("intrinsic_entropy")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2

MODE_CHOICES = ("open", "prev", "vwap", "all")

T = TypeVar("T")
R = TypeVar("R")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    inputs: list[str] = field(default_factory=list)
    symbols: list[str] | None = None
    mode: str | None = None  # per-command default: "all" for entropy, "prev" for map
    warmup: int = 10
    epsilon: float = DEFAULT_EPSILON
    window: int = DEFAULT_SUSTAIN
    sell_rule: str = SellRule.PROSE.value
    caps: str | None = None
    out: str = "out"
    jobs: int = 0  # 0 = one worker per core
    width: float = 1000.0
    height: float = 600.0

    def validate(self) -> None:
        if not self.inputs:
            raise ConfigError("no input file given (--input)")
        if self.warmup < 1:
            raise ConfigError("warmup must be >= 1")
        if self.epsilon < 0:
            raise ConfigError("epsilon must be >= 0")
        if self.window < 1:
            raise ConfigError("window must be >= 1")
        if self.mode is not None and self.mode not in MODE_CHOICES:
            raise ConfigError(f"mode must be one of {MODE_CHOICES}")
        SellRule(self.sell_rule)
        if not (self.width > 0 and self.height > 0):
            raise ConfigError("canvas width and height must be > 0")

    @property
    def params(self) -> StrategyParams:
        return StrategyParams(warmup_trades=self.warmup, sell_rule=SellRule(self.sell_rule))


def _split_symbols(value) -> list[str] | None:
    if value is None:
        return None
    if isinstance(value, str):
        value = value.split(",")
    return [s.strip().upper() for s in value if s.strip()]


def load_config(args: argparse.Namespace) -> RunConfig:
    cfg = RunConfig()
    known = set(RunConfig.__dataclass_fields__)
    if args.config:
        with open(args.config, "rb") as fh:
            data = tomllib.load(fh)
        for key, value in data.items():
            key = key.replace("-", "_")
            if key == "input":
                key = "inputs"
            if key not in known:
                raise ConfigError(f"unknown config key {key!r} in {args.config}")
            setattr(cfg, key, value)
        if isinstance(cfg.inputs, str):
            cfg.inputs = [cfg.inputs]
        cfg.symbols = _split_symbols(cfg.symbols)
    for key in known:
        value = getattr(args, key, None)
        if value is not None:
            setattr(cfg, key, value)
    cfg.symbols = _split_symbols(cfg.symbols)
    cfg.inputs = [str(p) for p in cfg.inputs]
    cfg.validate()
    return cfg


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def load_universe(cfg: RunConfig) -> dict[str, TradingDayStream]:
    trades: list[Trade] = []
    for path in cfg.inputs:
        try:
            trades.extend(read_trades(path))
        except MarketDataError as exc:
            raise MarketDataError(f"{path}: {exc}") from exc
    streams = partition_by_symbol(trades)
    streams = {s: streams[s] for s in sorted(streams)}
    if cfg.symbols is not None:
        missing = [s for s in cfg.symbols if s not in streams]
        if missing:
            log.warning("symbols not present in input: %s", ",".join(missing))
        streams = {s: streams[s] for s in cfg.symbols if s in streams}
    return streams


def fan_out(fn: Callable[[T], R], items: Sequence[T], jobs: int) -> list[R]:
    """Map ``fn`` over ``items`` in order, on a process pool when it can help."""
    workers = jobs or os.cpu_count() or 1
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def write_manifest(cfg: RunConfig, command: str, out_dir: Path, outputs: Iterable[str]) -> None:
    manifest = {
        "command": command,
        "version": __version__,
        "config": asdict(cfg),
        "inputs": [{"path": p, "sha256": _sha256(Path(p))} for p in cfg.inputs],
        "outputs": [{"file": name, "sha256": _sha256(out_dir / name)} for name in sorted(outputs)],
    }
    if cfg.caps:
        manifest["caps"] = {"path": cfg.caps, "sha256": _sha256(Path(cfg.caps))}
    (out_dir / f"{command}-manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _write(out_dir: Path, name: str, text: str) -> str:
    with open(out_dir / name, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return name


def _modes(value: str | None, default: str) -> list[ReferenceMode]:
    value = value or default
    if value == "all":
        return list(ReferenceMode)
    return [ReferenceMode(value)]


# -- entropy ----------------------------------------------------------------


@dataclass
class _EntropyJob:
    stream: TradingDayStream
    modes: list[ReferenceMode]
    epsilon: float
    window: int


def _entropy_worker(job: _EntropyJob):
    series = compute_series(job.stream)
    events = []
    summary = {}
    prices = [p.price for p in series]
    vwaps = [p.vwap for p in series]
    ordinals = [p.ordinal for p in series]
    for mode in job.modes:
        values = [p.h(mode) for p in series]
        events.extend(detect_crossings(zip(ordinals, values), name=f"entropy:{mode.value}"))
        summary[mode.value] = {
            "final": values[-1],
            "direction": classify_direction(values[-1], job.epsilon).value,
            "lead_time": lead_time(values, prices, vwaps, ordinals, k=job.window),
        }
    diff = [p.price - p.vwap for p in series]
    events.extend(detect_crossings(zip(ordinals, diff), name="price_minus_vwap"))
    return job.stream.symbol, dump_series(series), dump_signals(events), summary


def cmd_entropy(cfg: RunConfig) -> int:
    streams = load_universe(cfg)
    if not streams:
        log.warning("empty universe after filtering; nothing written")
        return EXIT_OK
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    modes = _modes(cfg.mode, "all")
    jobs = [_EntropyJob(s, modes, cfg.epsilon, cfg.window) for s in streams.values()]
    outputs = []
    for symbol, series_csv, signals_csv, summary in fan_out(_entropy_worker, jobs, cfg.jobs):
        outputs.append(_write(out_dir, f"{symbol}-series.csv", series_csv))
        outputs.append(_write(out_dir, f"{symbol}-signals.csv", signals_csv))
        parts = []
        for mode, info in summary.items():
            lt = "n/a" if info["lead_time"] is None else str(info["lead_time"])
            parts.append(f"H_{mode}={info['final']:+.6g} ({info['direction']}, lead {lt})")
        print(f"{symbol}: {len(streams[symbol])} trades; " + "; ".join(parts))
    write_manifest(cfg, "entropy", out_dir, outputs)
    return EXIT_OK


# -- backtest ---------------------------------------------------------------


def _backtest_worker(args: tuple[TradingDayStream, StrategyParams]):
    stream, params = args
    return backtest_symbol(stream, params)


def _fmt(x: float | None, spec: str = ".4f") -> str:
    return "undefined" if x is None else format(x, spec)


def cmd_backtest(cfg: RunConfig) -> int:
    streams = load_universe(cfg)
    params = cfg.params
    results = fan_out(_backtest_worker, [(s, params) for s in streams.values()], cfg.jobs)
    entropy_report = BacktestReport("entropy")
    vwap_report = BacktestReport("vwap")
    for symbol, (e_rt, v_rt) in zip(streams, results):
        entropy_report.entries[symbol] = e_rt
        vwap_report.entries[symbol] = v_rt
    overall = compare_strategies(entropy_report, vwap_report)
    # Side-by-side on the symbols the entropy strategy picked.
    common = compare_strategies(entropy_report, vwap_report.restricted(entropy_report.traded_symbols))

    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [
        _write(out_dir, "entropy-report.csv", dump_report(entropy_report)),
        _write(out_dir, "vwap-report.csv", dump_report(vwap_report)),
        _write(
            out_dir,
            "comparison.json",
            json.dumps({"all_symbols": overall.as_dict(), "entropy_traded_symbols": common.as_dict()}, indent=2)
            + "\n",
        ),
    ]
    write_manifest(cfg, "backtest", out_dir, outputs)

    print(f"symbols considered: {overall.considered}")
    print(f"entropy strategy: traded {overall.traded_a}, cumulated return {overall.cumulated_a:.4f}%, "
          f"average {_fmt(overall.average_a)}%")
    print(f"VWAP strategy:    traded {overall.traded_b}, cumulated return {overall.cumulated_b:.4f}%, "
          f"average {_fmt(overall.average_b)}%")
    print(f"ratio (all symbols): {_fmt(overall.ratio)}")
    print(f"VWAP strategy on entropy-traded symbols: cumulated {common.cumulated_b:.4f}%, "
          f"average {_fmt(common.average_b)}%, ratio {_fmt(common.ratio)}")
    return EXIT_OK


# -- map --------------------------------------------------------------------


def _map_worker(args: tuple[TradingDayStream, ReferenceMode]):
    stream, mode = args
    tracker = EntropyTracker()
    tracker.extend((t.quantity, t.price) for t in stream)
    h = dict(zip(ReferenceMode, tracker.values()))[mode]
    return stream.symbol, h, tracker.pq_sum + tracker.pq_comp


def cmd_map(cfg: RunConfig) -> int:
    streams = load_universe(cfg)
    if not streams:
        raise MarketDataError("no symbols to map")
    modes = _modes(cfg.mode, "prev")
    if len(modes) != 1:
        raise ConfigError("map needs a single entropy mode (open, prev or vwap)")
    results = fan_out(_map_worker, [(s, modes[0]) for s in streams.values()], cfg.jobs)
    entropies = {sym: h for sym, h, _ in results}
    if cfg.caps:
        caps = read_caps(cfg.caps)
        missing = [s for s in streams if s not in caps]
        if missing:
            raise MarketDataError(f"{cfg.caps}: no market_cap for {','.join(missing)}")
        weights = {s: caps[s] for s in streams}
    else:
        log.warning("no market-cap file given; weighting tiles by traded value")
        weights = {sym: value for sym, _, value in results}
    nodes = build_market_map(weights, entropies, cfg.width, cfg.height, cfg.epsilon)

    date = min(s.trades[0].timestamp for s in streams.values()).date().isoformat()
    out_dir = Path(cfg.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs = [
        _write(out_dir, f"{date}-map.svg", to_svg(nodes, f"Intrinsic entropy market map {date}")),
        _write(out_dir, f"{date}-map.json", to_json(nodes)),
    ]
    write_manifest(cfg, "map", out_dir, outputs)
    for name in outputs:
        print(out_dir / name)
    return EXIT_OK


# -- validate ---------------------------------------------------------------


def cmd_validate(cfg: RunConfig) -> int:
    streams = load_universe(cfg)
    total = sum(len(s) for s in streams.values())
    dates = sorted({t.timestamp.date() for s in streams.values() for t in s})
    print(f"ok: {total} trades, {len(streams)} symbols")
    for sym, s in streams.items():
        print(f"  {sym}: {len(s)} trades, {s.trades[0].timestamp} .. {s.trades[-1].timestamp}")
    if len(dates) > 1:
        log.warning("input spans %d calendar days; entropy is computed per symbol over the whole file", len(dates))
    return EXIT_OK


COMMANDS = {
    "entropy": cmd_entropy,
    "backtest": cmd_backtest,
    "map": cmd_map,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with default settings")
    common.add_argument("--input", dest="inputs", action="append", help="tick CSV (repeatable)")
    common.add_argument("--symbols", help="comma-separated symbol subset")
    common.add_argument("--mode", choices=MODE_CHOICES)
    common.add_argument("--warmup", type=int)
    common.add_argument("--epsilon", type=float)
    common.add_argument("--window", type=int, help="trades entropy must stay negative for a lead-time signal")
    common.add_argument("--sell-rule", dest="sell_rule", choices=[r.value for r in SellRule])
    common.add_argument("--caps", help="symbol,market_cap CSV for map weights")
    common.add_argument("--out", help="output directory")
    common.add_argument("--jobs", type=int, help="worker processes (0 = all cores)")
    common.add_argument("--width", type=float)
    common.add_argument("--height", type=float)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="intrinsic-entropy", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("entropy", parents=[common], help="per-trade entropy series and sign crossings")
    sub.add_parser("backtest", parents=[common], help="entropy vs VWAP-only round-trip strategies")
    sub.add_parser("map", parents=[common], help="entropy market map (SVG + JSON)")
    sub.add_parser("validate", parents=[common], help="check tick files without computing")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (MarketDataError, ConfigError, tomllib.TOMLDecodeError) as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_RUNTIME
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        log.exception("unexpected failure: %s", exc)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
