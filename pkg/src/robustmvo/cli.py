"""Command-line front end: ``robustmvo <subcommand> [options]``.

Settings are resolved as CLI flag > ``--config`` TOML file > defaults; the
seed additionally falls back to ``$PORTOPT_SEED`` before the default. The
effective configuration is embedded in every artifact written.

Exit status: 0 on success, 1 on bad input, 2 on usage errors, 3 when a
solve fails to reach its KKT tolerance.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from datetime import date
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .backtest import BacktestError, allocate_funds, capital_gain, portfolio_return_series
from .estimation import estimate
from .market_data import MarketDataError, PriceTable, compute_returns, load_prices
from .model import build_classical_qp, build_robust_qp
from .solver import ConvergenceError, PortfolioSolution, SolverConfig, solve_qp
from .uncertainty import (
    BootstrapConfig,
    IntervalSet,
    block_bootstrap_intervals,
    moving_window_intervals,
    robust_params,
)

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib


METHODS = ("classical", "robust-mw", "robust-boot")
EXIT_INPUT, EXIT_USAGE, EXIT_SOLVER = 1, 2, 3

DEFAULTS: dict[str, Any] = {
    "input": None,
    "fill_forward": False,
    "method": list(METHODS),
    "window": 90,
    "nboot": 1000,
    "alpha": 0.05,
    "seed": 0,
    "block_len": None,
    "block_rule": "floor",
    "gamma": [5.0, 50.0, 100.0],
    "capital": 100_000.0,
    "buy_date": None,
    "sell_date": None,
    "weights": None,
    "out": ".",
    "format": "json",
    "tol": 1e-9,
    "max_iter": 100_000,
    "workers": 1,
    "fractional": False,
}


class UsageError(Exception):
    pass


# -- output helpers ---------------------------------------------------------


def dumps(obj: Any) -> str:
    """Canonical JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write_json(path: Path, obj: Any) -> None:
    path.write_text(dumps(obj), encoding="utf-8")


def _write_csv(path: Path, rows: list[list[Any]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])


def _gamma_tag(g: float) -> str:
    return f"{g:g}"


# -- configuration ----------------------------------------------------------


def _parse_list(text: str, conv=str) -> list:
    return [conv(t.strip()) for t in str(text).split(",") if t.strip()]


def _parse_date(text: str | date | None) -> date | None:
    if text is None or isinstance(text, date):
        return text
    try:
        return date.fromisoformat(str(text))
    except ValueError:
        raise UsageError(f"bad date {text!r}; expected YYYY-MM-DD") from None


def resolve_config(args: argparse.Namespace, environ=None) -> dict[str, Any]:
    environ = os.environ if environ is None else environ
    cfg = dict(DEFAULTS)
    file_cfg: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, "rb") as fh:
                file_cfg = tomllib.load(fh)
        except OSError as exc:
            raise UsageError(f"cannot read config file: {exc}") from None
        except tomllib.TOMLDecodeError as exc:
            raise UsageError(f"bad config file: {exc}") from None
        file_cfg = {k.replace("-", "_"): v for k, v in file_cfg.items()}
        unknown = sorted(set(file_cfg) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    if "seed" not in file_cfg and environ.get("PORTOPT_SEED"):
        try:
            cfg["seed"] = int(environ["PORTOPT_SEED"])
        except ValueError:
            raise UsageError("PORTOPT_SEED must be an integer") from None
    cfg.update(file_cfg)
    for key in DEFAULTS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value

    if isinstance(cfg["method"], str):
        cfg["method"] = _parse_list(cfg["method"])
    if isinstance(cfg["gamma"], (str, int, float)):
        cfg["gamma"] = _parse_list(str(cfg["gamma"]), float)
    cfg["gamma"] = [float(g) for g in cfg["gamma"]]
    bad = [m for m in cfg["method"] if m not in METHODS]
    if bad or not cfg["method"]:
        raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    if not cfg["gamma"] or any(not g > 0 for g in cfg["gamma"]):
        raise UsageError("gamma list must be nonempty and strictly positive")
    if cfg["format"] not in ("json", "csv"):
        raise UsageError("format must be json or csv")
    if cfg["block_rule"] not in ("floor", "unfloored"):
        raise UsageError("block rule must be floor or unfloored")
    if not cfg["input"]:
        raise UsageError("--input is required")
    cfg["buy_date"] = _parse_date(cfg["buy_date"])
    cfg["sell_date"] = _parse_date(cfg["sell_date"])
    return cfg


def _echo(cfg: dict[str, Any]) -> dict[str, Any]:
    out = {}
    for k, v in cfg.items():
        out[k] = v.isoformat() if isinstance(v, date) else v
    return {k: v for k, v in out.items() if v is not None}


# -- pipeline pieces --------------------------------------------------------


def _load(cfg) -> PriceTable:
    return load_prices(cfg["input"], "forward_fill" if cfg["fill_forward"] else "reject")


def _history(cfg, table: PriceTable) -> PriceTable:
    """Prices used for estimation: everything up to and including the buy date."""
    if cfg["buy_date"] is None:
        return table
    table.row(cfg["buy_date"])
    return table.slice(end=cfg["buy_date"])


def _intervals(cfg, returns, method: str) -> IntervalSet:
    if method == "robust-mw":
        return moving_window_intervals(returns, int(cfg["window"]))
    boot = BootstrapConfig(
        n_boot=int(cfg["nboot"]),
        alpha=float(cfg["alpha"]),
        seed=int(cfg["seed"]),
        block_len_override=cfg["block_len"],
        block_rule=cfg["block_rule"],
    )
    return block_bootstrap_intervals(returns, boot, workers=int(cfg["workers"]))


def _solver_cfg(cfg) -> SolverConfig:
    return SolverConfig(tol=float(cfg["tol"]), max_iter=int(cfg["max_iter"]))


def _solve_all(cfg, table: PriceTable) -> dict[tuple[str, float], PortfolioSolution]:
    returns = compute_returns(_history(cfg, table))
    est = estimate(returns)
    sols = {}
    for method in cfg["method"]:
        rp = None if method == "classical" else robust_params(_intervals(cfg, returns, method))
        for g in cfg["gamma"]:
            qp = build_classical_qp(est, g) if rp is None else build_robust_qp(rp, g)
            sols[(method, g)] = solve_qp(qp, _solver_cfg(cfg))
    return sols


def _read_weights(path, table: PriceTable) -> np.ndarray:
    text = Path(path).read_text(encoding="utf-8")
    if str(path).endswith(".json"):
        d = json.loads(text)
        pairs = dict(zip(d["codes"], d["weights"]))
    else:
        reader = csv.DictReader(text.splitlines())
        pairs = {row["code"]: float(row["weight"]) for row in reader}
    unknown = [c for c in pairs if c not in table.codes]
    if unknown:
        raise BacktestError(f"weights reference unknown codes: {', '.join(unknown)}")
    return np.array([float(pairs.get(c, 0.0)) for c in table.codes])


# Weights read from files are often rounded for display.
FILE_WEIGHT_TOL = 0.02


def _sum_tol(cfg) -> float:
    return FILE_WEIGHT_TOL if cfg["weights"] else 1e-6


def _weight_sets(cfg, table) -> dict[tuple[str, float | None], np.ndarray]:
    if cfg["weights"]:
        return {("custom", None): _read_weights(cfg["weights"], table)}
    return {k: s.weights for k, s in _solve_all(cfg, table).items()}


def _tag(method: str, g: float | None) -> str:
    return method if g is None else f"{method}_gamma{_gamma_tag(g)}"


def _emit(out: Path, stem: str, fmt: str, payload: dict, csv_rows: list[list[Any]] | None) -> Path:
    if fmt == "csv" and csv_rows is not None:
        path = out / f"{stem}.csv"
        _write_csv(path, csv_rows)
    else:
        path = out / f"{stem}.json"
        _write_json(path, payload)
    return path


# -- subcommands ------------------------------------------------------------


def cmd_estimate(cfg) -> list[Path]:
    table = _history(cfg, _load(cfg))
    returns = compute_returns(table)
    est = estimate(returns)
    out = Path(cfg["out"])
    payload = {
        "config": _echo(cfg),
        "codes": list(est.codes),
        "m": returns.m,
        "n": returns.n,
        "mu": est.mu.tolist(),
        "sigma": est.sigma.tolist(),
    }
    if cfg["format"] == "csv":
        _write_csv(out / "mu.csv", [["code", "mu"]] + [[c, float(v)] for c, v in zip(est.codes, est.mu)])
        _write_csv(out / "sigma.csv", [["code", *est.codes]] + [[c, *map(float, row)] for c, row in zip(est.codes, est.sigma)])
        return [out / "mu.csv", out / "sigma.csv"]
    _write_json(out / "estimate.json", payload)
    return [out / "estimate.json"]


def cmd_uncertainty(cfg) -> list[Path]:
    returns = compute_returns(_history(cfg, _load(cfg)))
    out = Path(cfg["out"])
    paths = []
    for method in cfg["method"]:
        if method == "classical":
            continue
        u = _intervals(cfg, returns, method)
        rp = robust_params(u)
        payload = {**u.to_dict(), "robust_params": rp.to_dict(), "config": _echo(cfg)}
        rows = [["code", "mu_lo", "mu_hi", "mu0", "beta"]] + [
            [c, float(a), float(b), float(x), float(y)]
            for c, a, b, x, y in zip(u.codes, u.mu_lo, u.mu_hi, rp.mu0, rp.beta)
        ]
        paths.append(_emit(out, f"intervals_{method}", cfg["format"], payload, rows))
    return paths


def cmd_optimize(cfg) -> list[Path]:
    sols = _solve_all(cfg, _load(cfg))
    out = Path(cfg["out"])
    paths = []
    summary = [["method", "gamma", "f_val", "iterations", "kkt_residual", "psd_shift"]]
    for (method, g), sol in sols.items():
        payload = {**sol.to_dict(), "method": method, "config": _echo(cfg)}
        rows = [["code", "weight"]] + [[c, float(w)] for c, w in zip(sol.codes, sol.weights)]
        paths.append(_emit(out, f"solution_{_tag(method, g)}", cfg["format"], payload, rows))
        summary.append([method, g, sol.f_val, sol.iterations, sol.kkt_residual, sol.psd_shift])
    if cfg["format"] == "csv":
        _write_csv(out / "summary.csv", summary)
        paths.append(out / "summary.csv")
    return paths


def _require(cfg, *keys) -> None:
    for k in keys:
        if cfg[k] is None:
            raise UsageError(f"--{k.replace('_', '-')} is required for this command")


def cmd_allocate(cfg) -> list[Path]:
    _require(cfg, "buy_date")
    table = _load(cfg)
    buy = table.row(cfg["buy_date"])
    out = Path(cfg["out"])
    paths = []
    for (method, g), w in _weight_sets(cfg, table).items():
        alloc = allocate_funds(
            w, buy, cfg["capital"], table.codes, fractional=cfg["fractional"], sum_tol=_sum_tol(cfg)
        )
        payload = {**alloc.to_dict(), "method": method, "gamma": g, "config": _echo(cfg)}
        paths.append(_emit(out, f"allocation_{_tag(method, g)}", cfg["format"], payload, alloc.csv_rows()))
    return paths


def cmd_backtest(cfg) -> list[Path]:
    _require(cfg, "buy_date", "sell_date")
    if cfg["sell_date"] < cfg["buy_date"]:
        raise UsageError("sell date precedes buy date")
    table = _load(cfg)
    buy, sell = table.row(cfg["buy_date"]), table.row(cfg["sell_date"])
    window = table.slice(cfg["buy_date"], cfg["sell_date"])
    out = Path(cfg["out"])
    paths = []
    for (method, g), w in _weight_sets(cfg, table).items():
        alloc = allocate_funds(
            w, buy, cfg["capital"], table.codes, fractional=cfg["fractional"], sum_tol=_sum_tol(cfg)
        )
        gains = capital_gain(alloc, sell, table.codes)
        series = portfolio_return_series(w, window)
        tag = _tag(method, g)
        meta = {"method": method, "gamma": g, "config": _echo(cfg)}
        paths.append(_emit(out, f"allocation_{tag}", cfg["format"], {**alloc.to_dict(), **meta}, alloc.csv_rows()))
        paths.append(_emit(out, f"gain_{tag}", cfg["format"], {**gains.to_dict(), **meta}, gains.csv_rows()))
        paths.append(_emit(out, f"series_{tag}", "csv", {}, series.csv_rows()))
    return paths


def cmd_series(cfg) -> list[Path]:
    table = _load(cfg)
    start = cfg["buy_date"] or table.dates[0]
    end = cfg["sell_date"]
    window = table.slice(start, end)
    out = Path(cfg["out"])
    weight_sets = _weight_sets(cfg, table)
    paths = []
    by_gamma: dict[float | None, dict[str, np.ndarray]] = {}
    for (method, g), w in weight_sets.items():
        by_gamma.setdefault(g, {})[method] = portfolio_return_series(w, window).values
    for g, cols in by_gamma.items():
        names = list(cols)
        rows = [["date", *names]] + [
            [d.isoformat(), *(float(cols[m][t]) for m in names)] for t, d in enumerate(window.dates)
        ]
        stem = "series" if g is None else f"series_gamma{_gamma_tag(g)}"
        payload = {
            "dates": [d.isoformat() for d in window.dates],
            "series": {m: v.tolist() for m, v in cols.items()},
            "gamma": g,
            "config": _echo(cfg),
        }
        paths.append(_emit(out, stem, cfg["format"], payload, rows))
    return paths


COMMANDS = {
    "estimate": cmd_estimate,
    "uncertainty": cmd_uncertainty,
    "optimize": cmd_optimize,
    "allocate": cmd_allocate,
    "backtest": cmd_backtest,
    "series": cmd_series,
}


HELP = {
    "estimate": "sample mean vector and covariance matrix",
    "uncertainty": "interval uncertainty sets and their midpoints/half-widths",
    "optimize": "solve the classical and robust problems for each gamma",
    "allocate": "whole-share fund allocation on the buy date",
    "backtest": "allocation, capital gain and return series between two dates",
    "series": "plot-ready cumulative return series, one column per method",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robustmvo", description="Robust mean-variance portfolio toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML file with defaults for any option below")
    common.add_argument("--input", help="price CSV: date,<CODE1>,...")
    common.add_argument("--fill-forward", dest="fill_forward", action="store_const", const=True,
                        help="forward-fill empty cells instead of rejecting them")
    common.add_argument("--method", help=f"comma-separated subset of {','.join(METHODS)}")
    common.add_argument("--window", type=int, metavar="K", help="moving-window length in trading days")
    common.add_argument("--nboot", type=int, metavar="N", help="bootstrap replications")
    common.add_argument("--alpha", type=float, metavar="A", help="two-sided significance level")
    common.add_argument("--seed", type=int, metavar="S", help="bootstrap seed (fallback: $PORTOPT_SEED)")
    common.add_argument("--block-len", dest="block_len", type=int, metavar="L", help="override bootstrap block length")
    common.add_argument("--block-rule", dest="block_rule", choices=["floor", "unfloored"],
                        help="block count rule when --block-len is not given")
    common.add_argument("--gamma", help="comma-separated risk-aversion values")
    common.add_argument("--capital", type=float, metavar="C")
    common.add_argument("--buy-date", dest="buy_date", metavar="D")
    common.add_argument("--sell-date", dest="sell_date", metavar="D")
    common.add_argument("--weights", help="solution JSON or code,weight CSV to use instead of optimising")
    common.add_argument("--fractional", action="store_const", const=True, help="allow fractional shares")
    common.add_argument("--tol", type=float, help="KKT residual tolerance")
    common.add_argument("--max-iter", dest="max_iter", type=int)
    common.add_argument("--workers", type=int, help="threads for bootstrap replications")
    common.add_argument("--out", metavar="DIR", help="output directory (created if missing)")
    common.add_argument("--format", choices=["json", "csv"])
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=HELP[name])
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = resolve_config(args)
        Path(cfg["out"]).mkdir(parents=True, exist_ok=True)
        paths = COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(f"robustmvo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvergenceError as exc:
        diag = exc.solution.to_dict()
        print(f"robustmvo: solver failed: {exc}\n{dumps(diag)}", file=sys.stderr, end="")
        return EXIT_SOLVER
    except (MarketDataError, BacktestError, ValueError, OSError) as exc:
        print(f"robustmvo: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
