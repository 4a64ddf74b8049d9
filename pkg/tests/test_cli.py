import json
from pathlib import Path

import pytest

from intrinsic_entropy.cli import main
from intrinsic_entropy.market_data import dump_trades, parse_trades
from intrinsic_entropy.synthetic import stream_from_arrays, synthetic_day

HEADER = "timestamp,symbol,quantity,price\n"


@pytest.fixture
def day_csv(tmp_path):
    path = tmp_path / "day.csv"
    path.write_text(dump_trades(synthetic_day(seed=1)), encoding="utf-8")
    return path


def test_entropy_three_trades(tmp_path):
    src = tmp_path / "t.csv"
    src.write_text(
        HEADER + "2018-12-19T10:00,BRD,100,10\n2018-12-19T10:01,BRD,100,11\n2018-12-19T10:02,BRD,50,10.5\n"
    )
    out = tmp_path / "out"
    assert main(["entropy", "--input", str(src), "--out", str(out)]) == 0
    lines = (out / "BRD-series.csv").read_text().splitlines()
    assert len(lines) == 4
    assert lines[0] == "ordinal,timestamp,price,vwap,h_open,h_prev,h_vwap"
    assert float(lines[2].split(",")[4]) == pytest.approx(0.0346574, abs=1e-7)
    assert (out / "BRD-signals.csv").exists()
    assert (out / "entropy-manifest.json").exists()


def test_entropy_empty_universe(tmp_path, day_csv, caplog):
    out = tmp_path / "out"
    assert main(["entropy", "--input", str(day_csv), "--symbols", "NOPE", "--out", str(out)]) == 0
    assert not out.exists()
    assert "empty universe" in caplog.text


def test_malformed_csv_exit_2(tmp_path, caplog):
    src = tmp_path / "bad.csv"
    src.write_text(HEADER + "2018-12-19T10:00,BRD,10,1\n2018-12-19T10:00,BRD,x,1\n")
    assert main(["entropy", "--input", str(src), "--out", str(tmp_path / "o")]) == 2
    assert "line 3" in caplog.text


def test_missing_input_nonzero(tmp_path, caplog):
    code = main(["entropy", "--input", str(tmp_path / "nope.csv"), "--out", str(tmp_path / "o")])
    assert code != 0
    assert "nope.csv" in caplog.text


def test_validate(day_csv, capsys):
    assert main(["validate", "--input", str(day_csv)]) == 0
    assert "29 symbols" in capsys.readouterr().out


def test_backtest_subset_and_manifest(tmp_path, day_csv, capsys):
    out = tmp_path / "out"
    assert main(["backtest", "--input", str(day_csv), "--out", str(out)]) == 0

    def traded(name):
        rows = (out / name).read_text().splitlines()[1:-1]
        return {r.split(",")[1] for r in rows if r.split(",")[2]}

    assert traded("entropy-report.csv") <= traded("vwap-report.csv")
    manifest = json.loads((out / "backtest-manifest.json").read_text())
    assert manifest["config"]["warmup"] == 10
    assert {o["file"] for o in manifest["outputs"]} == {"entropy-report.csv", "vwap-report.csv", "comparison.json"}
    assert len(manifest["inputs"][0]["sha256"]) == 64
    assert "ratio" in capsys.readouterr().out


def test_backtest_empty_day(tmp_path, capsys):
    src = tmp_path / "empty.csv"
    src.write_text(HEADER)
    out = tmp_path / "out"
    assert main(["backtest", "--input", str(src), "--out", str(out)]) == 0
    for name in ("entropy-report.csv", "vwap-report.csv"):
        lines = (out / name).read_text().splitlines()
        assert lines[1] == "cumulated_return,,,,,,,,0.0"
    comparison = json.loads((out / "comparison.json").read_text())
    assert comparison["all_symbols"]["ratio"] is None
    assert "ratio (all symbols): undefined" in capsys.readouterr().out


def test_backtest_identical_round_trip(tmp_path):
    # Rising then a dip below VWAP with positive H_open, then back above:
    # both strategies buy the dip and sell the recovery.
    prices = [10.0 + 0.01 * i for i in range(11)] + [9.9, 10.3, 10.3]
    stream = stream_from_arrays("TWIN", [100] * len(prices), prices)
    src = tmp_path / "twin.csv"
    src.write_text(dump_trades(stream))
    out = tmp_path / "out"
    assert main(["backtest", "--input", str(src), "--out", str(out)]) == 0
    e = (out / "entropy-report.csv").read_text().splitlines()[1]
    v = (out / "vwap-report.csv").read_text().splitlines()[1]
    assert e == v
    assert e.split(",")[2] == "12" and e.split(",")[5] == "13"


def test_sell_rule_flag_changes_outcome(tmp_path, day_csv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["backtest", "--input", str(day_csv), "--out", str(a)]) == 0
    assert main(["backtest", "--input", str(day_csv), "--out", str(b), "--sell-rule", "literal"]) == 0
    assert (a / "vwap-report.csv").read_text() != (b / "vwap-report.csv").read_text()


def _three_symbol_day(tmp_path):
    rows = []
    for sym, base in (("AAA", 10.0), ("BBB", 20.0), ("CCC", 5.0)):
        for i in range(5):
            rows.append(f"2018-12-18T10:0{i},{sym},{10 + i},{base + 0.1 * i}")
    src = tmp_path / "three.csv"
    src.write_text(HEADER + "\n".join(rows) + "\n")
    return src


def test_map_with_caps(tmp_path):
    src = _three_symbol_day(tmp_path)
    caps = tmp_path / "caps.csv"
    caps.write_text("symbol,market_cap\nAAA,50\nBBB,30\nCCC,20\n")
    out = tmp_path / "out"
    assert main(["map", "--input", str(src), "--caps", str(caps), "--out", str(out)]) == 0
    doc = json.loads((out / "2018-12-18-map.json").read_text())
    assert {d["symbol"]: d["weight_fraction"] for d in doc} == pytest.approx({"AAA": 0.5, "BBB": 0.3, "CCC": 0.2})
    assert (out / "2018-12-18-map.svg").read_text().count("<rect") == 3


def test_map_without_caps_falls_back(tmp_path, caplog):
    src = _three_symbol_day(tmp_path)
    out = tmp_path / "out"
    assert main(["map", "--input", str(src), "--out", str(out)]) == 0
    assert "traded value" in caplog.text
    trades = parse_trades(src.read_text())
    value = {}
    for t in trades:
        value[t.symbol] = value.get(t.symbol, 0.0) + t.price * t.quantity
    total = sum(value.values())
    doc = json.loads((out / "2018-12-18-map.json").read_text())
    for d in doc:
        assert d["weight_fraction"] == pytest.approx(value[d["symbol"]] / total, rel=1e-12)


def test_map_zero_cap_rejected(tmp_path):
    src = _three_symbol_day(tmp_path)
    caps = tmp_path / "caps.csv"
    caps.write_text("symbol,market_cap\nAAA,50\nBBB,0\nCCC,20\n")
    assert main(["map", "--input", str(src), "--caps", str(caps), "--out", str(tmp_path / "o")]) == 2


def test_config_file_and_flag_override(tmp_path, day_csv):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'input = ["{day_csv}"]\nwarmup = 15\nsymbols = "S01,S02"\nout = "{tmp_path / "cfgout"}"\n')
    assert main(["backtest", "--config", str(cfg), "--warmup", "12"]) == 0
    manifest = json.loads((tmp_path / "cfgout" / "backtest-manifest.json").read_text())
    assert manifest["config"]["warmup"] == 12
    assert manifest["config"]["symbols"] == ["S01", "S02"]
    rows = (tmp_path / "cfgout" / "entropy-report.csv").read_text().splitlines()
    assert [r.split(",")[1] for r in rows[1:-1]] == ["S01", "S02"]


def test_bad_config_key(tmp_path, day_csv):
    cfg = tmp_path / "run.toml"
    cfg.write_text(f'input = "{day_csv}"\nbogus = 1\n')
    assert main(["validate", "--config", str(cfg)]) == 2


def test_process_pool_matches_serial(tmp_path, day_csv):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["backtest", "--input", str(day_csv), "--out", str(a), "--jobs", "1"]) == 0
    assert main(["backtest", "--input", str(day_csv), "--out", str(b), "--jobs", "3"]) == 0
    for name in ("entropy-report.csv", "vwap-report.csv", "comparison.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
