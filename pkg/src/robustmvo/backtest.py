"""Integer share allocation, capital gain and cumulative portfolio returns."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import date
from typing import Any

import numpy as np

from .market_data import PriceTable


class BacktestError(ValueError):
    pass


def round_half_away(x: float) -> int:
    """Round to the nearest integer, ties away from zero."""
    return int(math.copysign(math.floor(abs(x) + 0.5), x))


@dataclass(frozen=True)
class AllocationRow:
    code: str
    weight: float
    cash: float
    buy_price: float
    shares: float


@dataclass(frozen=True)
class FundAllocation:
    capital: float
    per_asset: tuple[AllocationRow, ...]

    @classmethod
    def from_shares(cls, codes, shares, buy_prices, capital: float) -> FundAllocation:
        """Rebuild an allocation from known holdings (e.g. a broker statement)."""
        rows = tuple(
            AllocationRow(code=c, weight=s * p / capital, cash=s * p, buy_price=float(p), shares=s)
            for c, s, p in zip(codes, shares, buy_prices)
        )
        if len(rows) != len(codes) or any(r.shares < 0 for r in rows):
            raise BacktestError("holdings must be nonnegative and aligned with codes")
        return cls(capital=float(capital), per_asset=rows)

    @property
    def codes(self) -> tuple[str, ...]:
        return tuple(r.code for r in self.per_asset)

    @property
    def invested(self) -> float:
        return float(sum(r.shares * r.buy_price for r in self.per_asset))

    @property
    def leftover(self) -> float:
        """Cash not spent on shares; negative when rounding up overspends."""
        return self.capital - self.invested

    def to_dict(self) -> dict[str, Any]:
        return {
            "capital": self.capital,
            "invested": self.invested,
            "leftover": self.leftover,
            "per_asset": [
                {"code": r.code, "weight": r.weight, "cash": r.cash, "buy_price": r.buy_price, "shares": r.shares}
                for r in self.per_asset
            ],
        }

    def csv_rows(self) -> list[list[Any]]:
        return [["code", "weight", "cash", "buy_price", "shares"]] + [
            [r.code, r.weight, r.cash, r.buy_price, r.shares] for r in self.per_asset
        ]


@dataclass(frozen=True)
class GainRow:
    code: str
    shares: float
    buy_price: float
    sell_price: float
    gain: float


@dataclass(frozen=True)
class GainReport:
    rows: tuple[GainRow, ...]

    @property
    def total(self) -> float:
        return float(math.fsum(r.gain for r in self.rows))

    def to_dict(self) -> dict[str, Any]:
        return {
            "total": self.total,
            "rows": [
                {"code": r.code, "shares": r.shares, "buy": r.buy_price, "sell": r.sell_price, "gain": r.gain}
                for r in self.rows
            ],
        }

    def csv_rows(self) -> list[list[Any]]:
        return [["code", "shares", "buy", "sell", "gain"]] + [
            [r.code, r.shares, r.buy_price, r.sell_price, r.gain] for r in self.rows
        ]


@dataclass(frozen=True)
class ReturnSeries:
    dates: tuple[date, ...]
    values: np.ndarray

    def to_dict(self) -> dict[str, Any]:
        return {"dates": [d.isoformat() for d in self.dates], "values": self.values.tolist()}

    def csv_rows(self) -> list[list[Any]]:
        return [["date", "value"]] + [[d.isoformat(), float(v)] for d, v in zip(self.dates, self.values)]


def allocate_funds(
    weights, buy_prices, capital: float, codes=None, *, fractional: bool = False, sum_tol: float = 1e-6
) -> FundAllocation:
    """Split ``capital`` by ``weights`` and buy whole shares at ``buy_prices``.

    Share counts are ``cash / price`` rounded to nearest (ties away from
    zero); leftover cash is reported on the result, never reinvested.
    ``fractional=True`` keeps the exact quotient instead. ``sum_tol`` bounds
    ``|sum(weights) - 1|``; loosen it for weights that were rounded for print.
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    prices = np.asarray(buy_prices, dtype=float).reshape(-1)
    if prices.size != w.size:
        raise BacktestError("weights and prices have different lengths")
    if not capital > 0:
        raise BacktestError("capital must be positive")
    if np.any(prices <= 0):
        raise BacktestError("nonpositive buy price")
    if np.any(w < -1e-12) or abs(w.sum() - 1.0) > sum_tol:
        raise BacktestError("weights must be nonnegative and sum to 1")
    if codes is None:
        codes = [f"A{i}" for i in range(w.size)]
    rows = []
    for code, wi, price in zip(codes, w, prices):
        wi = max(float(wi), 0.0)
        cash = wi * capital
        quotient = cash / price
        shares = quotient if fractional else round_half_away(quotient)
        rows.append(AllocationRow(code=code, weight=wi, cash=cash, buy_price=float(price), shares=shares))
    return FundAllocation(capital=float(capital), per_asset=tuple(rows))


def capital_gain(alloc: FundAllocation, sell_prices, codes=None) -> GainReport:
    """Per-asset ``shares * (sell - buy)`` and their total.

    ``sell_prices`` is either a mapping code -> price or a sequence aligned
    with the allocation (then ``codes``, if given, must match it).
    """
    if isinstance(sell_prices, dict):
        missing = [c for c in alloc.codes if c not in sell_prices]
        if missing:
            raise BacktestError(f"no sell price for {', '.join(missing)}")
        sell = [float(sell_prices[c]) for c in alloc.codes]
    else:
        sell = [float(s) for s in np.asarray(sell_prices, dtype=float).reshape(-1)]
        if len(sell) != len(alloc.per_asset):
            raise BacktestError("sell prices do not align with the allocation")
        if codes is not None and tuple(codes) != alloc.codes:
            raise BacktestError("sell price codes do not match the allocation codes")
    if any(not s > 0 for s in sell):
        raise BacktestError("nonpositive sell price")
    # "+ 0.0" turns the -0.0 of zero holdings into 0.0.
    rows = tuple(
        GainRow(code=r.code, shares=r.shares, buy_price=r.buy_price, sell_price=s, gain=r.shares * (s - r.buy_price) + 0.0)
        for r, s in zip(alloc.per_asset, sell)
    )
    return GainReport(rows=rows)


def portfolio_return_series(weights, prices: PriceTable) -> ReturnSeries:
    """Buy-and-hold cumulative return ``sum_i w_i (P[t,i] - P[0,i]) / P[0,i]``."""
    w = np.asarray(weights, dtype=float).reshape(-1)
    if prices.prices.shape[0] < 1:
        raise BacktestError("empty evaluation window")
    if w.size != prices.n_assets:
        raise BacktestError("weights do not match the number of assets")
    p0 = prices.prices[0]
    values = ((prices.prices - p0) / p0) @ w
    values[0] = 0.0
    return ReturnSeries(dates=prices.dates, values=values)
