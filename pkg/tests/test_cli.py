import csv
import json
from datetime import date

import numpy as np
import pytest

from robustmvo.cli import main
from robustmvo.market_data import PriceTable, write_prices

import bank_tables as bt
from conftest import make_prices


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def read_json(path):
    return json.loads(path.read_text())


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def prices4(tmp_path):
    path = tmp_path / "prices4.csv"
    write_prices(make_prices(120, 4, seed=11), path)
    return path


@pytest.fixture
def bank_prices(tmp_path):
    """Three trading days: buy, rising-market sell, falling-market sell."""
    table = PriceTable(
        dates=tuple(date.fromisoformat(d) for d in (bt.BUY_DATE, bt.GOOD_SELL_DATE, bt.BAD_SELL_DATE)),
        codes=tuple(bt.CODES),
        prices=np.array([bt.BUY, bt.SELL_GOOD, bt.SELL_BAD]),
    )
    path = tmp_path / "banks.csv"
    write_prices(table, path)
    return path


def write_weights(tmp_path, column):
    path = tmp_path / f"weights_{column}.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["code", "weight"])
        w.writerows(zip(bt.CODES, bt.WEIGHTS[column]))
    return path


# -- estimate -----------------------------------------------------------------------


def test_estimate_shapes(capsys, prices4, tmp_path):
    code, out, _ = run(capsys, "estimate", "--input", prices4, "--out", tmp_path / "o")
    assert code == 0
    d = read_json(tmp_path / "o" / "estimate.json")
    assert len(d["mu"]) == 4 and np.array(d["sigma"]).shape == (4, 4)
    assert d["m"] == 119
    assert d["config"]["input"] == str(prices4)


def test_estimate_paper_scale_fixture(capsys, tmp_path):
    path = tmp_path / "p45.csv"
    write_prices(make_prices(248, 45, seed=3), path)
    code, _, _ = run(capsys, "estimate", "--input", path, "--out", tmp_path)
    d = read_json(tmp_path / "estimate.json")
    assert code == 0 and len(d["mu"]) == 45 and d["m"] == 247


def test_estimate_csv(capsys, prices4, tmp_path):
    code, _, _ = run(capsys, "estimate", "--input", prices4, "--out", tmp_path, "--format", "csv")
    assert code == 0
    assert read_csv(tmp_path / "mu.csv")[0] == ["code", "mu"]
    assert len(read_csv(tmp_path / "sigma.csv")) == 5


def test_missing_file(capsys, tmp_path):
    code, out, err = run(capsys, "estimate", "--input", tmp_path / "nope.csv", "--out", tmp_path)
    assert code != 0
    assert "nope.csv" in err and out == ""


def test_bad_csv_reports_error(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,A\n2023-01-02,0\n2023-01-03,1\n")
    code, _, err = run(capsys, "estimate", "--input", bad, "--out", tmp_path)
    assert code == 1 and "nonpositive" in err


def test_fill_forward_flag(capsys, tmp_path):
    f = tmp_path / "gap.csv"
    f.write_text("date,A,B\n2023-01-02,1,2\n2023-01-03,,3\n2023-01-04,2,3\n")
    assert run(capsys, "estimate", "--input", f, "--out", tmp_path)[0] == 1
    assert run(capsys, "estimate", "--input", f, "--out", tmp_path, "--fill-forward")[0] == 0


# -- uncertainty ----------------------------------------------------------------------


def test_uncertainty_outputs(capsys, prices4, tmp_path):
    code, _, _ = run(
        capsys, "uncertainty", "--input", prices4, "--out", tmp_path,
        "--method", "robust-mw,robust-boot", "--window", 30, "--nboot", 50, "--seed", 5,
    )
    assert code == 0
    mw = read_json(tmp_path / "intervals_robust-mw.json")
    boot = read_json(tmp_path / "intervals_robust-boot.json")
    assert mw["method"] == "moving_window" and mw["params"]["windows"] == 119 - 30 + 1
    assert boot["params"]["L"] == 4 and boot["params"]["B"] == 29 and boot["params"]["seed"] == 5
    for key in ("mu_lo", "mu_hi", "sigma_lo", "sigma_hi", "codes", "robust_params"):
        assert key in boot


def test_seed_env_fallback_and_precedence(capsys, prices4, tmp_path, monkeypatch):
    common = ["uncertainty", "--input", prices4, "--method", "robust-boot", "--nboot", 20]
    monkeypatch.setenv("PORTOPT_SEED", "42")
    run(capsys, *common, "--out", tmp_path / "env")
    assert read_json(tmp_path / "env" / "intervals_robust-boot.json")["params"]["seed"] == 42
    run(capsys, *common, "--out", tmp_path / "flag", "--seed", 7)
    assert read_json(tmp_path / "flag" / "intervals_robust-boot.json")["params"]["seed"] == 7
    cfg = tmp_path / "run.toml"
    cfg.write_text('seed = 9\nnboot = 30\n')
    run(capsys, *common[:-2], "--out", tmp_path / "file", "--config", cfg)
    d = read_json(tmp_path / "file" / "intervals_robust-boot.json")
    assert d["params"]["seed"] == 9 and d["params"]["n_boot"] == 30


def test_config_file_rejects_unknown_keys(capsys, prices4, tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('colour = "blue"\n')
    code, _, err = run(capsys, "estimate", "--input", prices4, "--config", cfg, "--out", tmp_path)
    assert code == 2 and "colour" in err


def test_block_rule_flags(capsys, tmp_path):
    path = tmp_path / "p.csv"
    write_prices(make_prices(248, 2, seed=1), path)
    base = ["uncertainty", "--input", path, "--method", "robust-boot", "--nboot", 10]
    run(capsys, *base, "--out", tmp_path / "a")
    run(capsys, *base, "--out", tmp_path / "b", "--block-rule", "unfloored")
    run(capsys, *base, "--out", tmp_path / "c", "--block-len", 5)
    shape = lambda d: (read_json(tmp_path / d / "intervals_robust-boot.json")["params"][k] for k in ("L", "B"))
    assert tuple(shape("a")) == (6, 41)
    assert tuple(shape("b")) == (6, 40)
    assert tuple(shape("c")) == (5, 49)


# -- optimize ---------------------------------------------------------------------------


def test_optimize_gamma_sweep(capsys, prices4, tmp_path):
    code, out, _ = run(
        capsys, "optimize", "--input", prices4, "--out", tmp_path, "--gamma", "5,50,100",
        "--method", "robust-mw", "--window", 40,
    )
    assert code == 0
    files = [tmp_path / f"solution_robust-mw_gamma{g}.json" for g in (5, 50, 100)]
    sols = [read_json(f) for f in files]
    assert [s["f_val"] for s in sols] == sorted(s["f_val"] for s in sols)
    for s in sols:
        assert len(s["weights"]) == 4 and abs(sum(s["weights"]) - 1) <= 1e-10
        assert s["kkt_residual"] <= 1e-9 and s["converged"]
        assert "psd_shift" in s and "iterations" in s


def test_full_window_robust_equals_classical(capsys, prices4, tmp_path):
    run(capsys, "optimize", "--input", prices4, "--out", tmp_path, "--gamma", 10,
        "--method", "classical,robust-mw", "--window", 119)
    a = read_json(tmp_path / "solution_classical_gamma10.json")
    b = read_json(tmp_path / "solution_robust-mw_gamma10.json")
    assert a["weights"] == b["weights"] and a["f_val"] == b["f_val"]


def test_single_asset_weight_one(capsys, tmp_path):
    path = tmp_path / "one.csv"
    write_prices(make_prices(50, 1, seed=2), path)
    run(capsys, "optimize", "--input", path, "--out", tmp_path, "--window", 10, "--nboot", 20)
    for f in tmp_path.glob("solution_*.json"):
        assert read_json(f)["weights"] == [1.0]


def test_optimize_csv_summary(capsys, prices4, tmp_path):
    run(capsys, "optimize", "--input", prices4, "--out", tmp_path, "--format", "csv",
        "--method", "classical", "--gamma", "5,50")
    rows = read_csv(tmp_path / "summary.csv")
    assert rows[0] == ["method", "gamma", "f_val", "iterations", "kkt_residual", "psd_shift"]
    assert [r[:2] for r in rows[1:]] == [["classical", "5.0"], ["classical", "50.0"]]
    assert read_csv(tmp_path / "solution_classical_gamma5.csv")[0] == ["code", "weight"]


def test_solver_failure_exit_code(capsys, prices4, tmp_path):
    code, _, err = run(capsys, "optimize", "--input", prices4, "--out", tmp_path,
                       "--method", "classical", "--max-iter", 1, "--tol", 1e-16)
    assert code == 3
    assert "kkt_residual" in err


def test_usage_errors(capsys, prices4, tmp_path):
    assert run(capsys, "optimize", "--input", prices4, "--gamma", "5,-1", "--out", tmp_path)[0] == 2
    assert run(capsys, "optimize", "--input", prices4, "--method", "bogus", "--out", tmp_path)[0] == 2
    assert run(capsys, "allocate", "--input", prices4, "--out", tmp_path)[0] == 2
    with pytest.raises(SystemExit):
        main(["nosuchcommand"])


def test_byte_identical_reruns(capsys, prices4, tmp_path):
    args = ["optimize", "--input", prices4, "--nboot", 50, "--window", 40, "--seed", 3, "--out", tmp_path / "a"]
    run(capsys, *args)
    first = {f.name: f.read_bytes() for f in (tmp_path / "a").iterdir()}
    run(capsys, *args)
    assert first == {f.name: f.read_bytes() for f in (tmp_path / "a").iterdir()}


def test_thread_count_does_not_change_results(capsys, prices4, tmp_path):
    args = ["optimize", "--input", prices4, "--nboot", 50, "--seed", 3, "--method", "robust-boot"]
    run(capsys, *args, "--out", tmp_path / "a")
    run(capsys, *args, "--out", tmp_path / "b", "--workers", 4)
    for f in (tmp_path / "a").iterdir():
        a, b = read_json(f), read_json(tmp_path / "b" / f.name)
        a.pop("config"), b.pop("config")
        assert a == b


# -- allocate / backtest / series ----------------------------------------------------


@pytest.mark.parametrize("column", [0, 1, 3, 4, 5])
def test_backtest_reproduces_table_allocations(capsys, bank_prices, tmp_path, column):
    weights = write_weights(tmp_path, column)
    code, _, _ = run(capsys, "backtest", "--input", bank_prices, "--weights", weights,
                     "--buy-date", bt.BUY_DATE, "--sell-date", bt.GOOD_SELL_DATE, "--out", tmp_path)
    assert code == 0
    alloc = read_json(tmp_path / "allocation_custom.json")
    assert [r["shares"] for r in alloc["per_asset"]] == bt.SHARES[column]
    gain = read_json(tmp_path / "gain_custom.json")
    assert [r["gain"] for r in gain["rows"]] == bt.GAINS_GOOD[column]
    assert gain["total"] == sum(bt.GAINS_GOOD[column])


def test_allocate_from_solution_json(capsys, bank_prices, tmp_path):
    sol = tmp_path / "sol.json"
    sol.write_text(json.dumps({"codes": bt.CODES, "weights": bt.WEIGHTS[3]}))
    code, _, _ = run(capsys, "allocate", "--input", bank_prices, "--weights", sol,
                     "--buy-date", bt.BUY_DATE, "--out", tmp_path, "--format", "csv")
    assert code == 0
    rows = read_csv(tmp_path / "allocation_custom.csv")
    assert rows[0] == ["code", "weight", "cash", "buy_price", "shares"]
    assert [int(r[4]) for r in rows[1:]] == bt.SHARES[3]


def test_sell_on_buy_date_gains_nothing(capsys, bank_prices, tmp_path):
    weights = write_weights(tmp_path, 0)
    run(capsys, "backtest", "--input", bank_prices, "--weights", weights,
        "--buy-date", bt.BUY_DATE, "--sell-date", bt.BUY_DATE, "--out", tmp_path)
    assert read_json(tmp_path / "gain_custom.json")["total"] == 0.0


def test_backtest_unknown_date(capsys, bank_prices, tmp_path):
    weights = write_weights(tmp_path, 0)
    code, _, err = run(capsys, "backtest", "--input", bank_prices, "--weights", weights,
                       "--buy-date", "2023-03-25", "--sell-date", bt.BAD_SELL_DATE, "--out", tmp_path)
    assert code == 1 and "2023-03-25" in err


def test_backtest_mismatched_codes(capsys, bank_prices, tmp_path):
    bad = tmp_path / "w.csv"
    bad.write_text("code,weight\nZZZZ,1.0\n")
    code, _, err = run(capsys, "backtest", "--input", bank_prices, "--weights", bad,
                       "--buy-date", bt.BUY_DATE, "--sell-date", bt.BAD_SELL_DATE, "--out", tmp_path)
    assert code == 1 and "ZZZZ" in err


def test_series_two_day_window(capsys, tmp_path):
    f = tmp_path / "p.csv"
    f.write_text("date,A,B\n2023-03-24,100,50\n2023-03-27,110,45\n2023-03-28,90,60\n")
    w = tmp_path / "w.csv"
    w.write_text("code,weight\nA,0.25\nB,0.75\n")
    code, _, _ = run(capsys, "series", "--input", f, "--weights", w, "--buy-date", "2023-03-27",
                     "--sell-date", "2023-03-28", "--out", tmp_path, "--format", "csv")
    assert code == 0
    rows = read_csv(tmp_path / "series.csv")
    assert rows[0] == ["date", "custom"]
    # oracle: 0.25*(90/110 - 1) + 0.75*(60/45 - 1)
    expected = 0.25 * (90 / 110 - 1) + 0.75 * (60 / 45 - 1)
    assert float(rows[1][1]) == 0.0
    assert float(rows[2][1]) == pytest.approx(expected, abs=1e-12)


def test_series_per_gamma_columns(capsys, prices4, tmp_path):
    table = make_prices(120, 4, seed=11)
    code, _, _ = run(capsys, "series", "--input", prices4, "--out", tmp_path, "--format", "csv",
                     "--window", 30, "--nboot", 30, "--gamma", "5,100",
                     "--buy-date", table.dates[90].isoformat())
    assert code == 0
    for g in (5, 100):
        rows = read_csv(tmp_path / f"series_gamma{g}.csv")
        assert rows[0] == ["date", "classical", "robust-mw", "robust-boot"]
        assert len(rows) == 1 + 120 - 90
        assert rows[1][1:] == ["0.0", "0.0", "0.0"]
