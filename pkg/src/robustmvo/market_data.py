"""Price table ingestion and daily simple returns."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date
from os import PathLike
from typing import IO, Literal, Union

import numpy as np

FillPolicy = Literal["reject", "forward_fill"]
Source = Union[str, PathLike, bytes, IO[bytes], IO[str]]


class MarketDataError(ValueError):
    """Raised when a price file or price table violates its contract."""


@dataclass(frozen=True)
class PriceTable:
    """Closing prices, one row per trading day and one column per asset."""

    dates: tuple[date, ...]
    codes: tuple[str, ...]
    prices: np.ndarray

    def __post_init__(self) -> None:
        prices = np.array(self.prices, dtype=float)
        if prices.ndim != 2:
            raise MarketDataError("prices must be a 2-D matrix")
        if prices.shape != (len(self.dates), len(self.codes)):
            raise MarketDataError(
                f"prices shape {prices.shape} does not match "
                f"{len(self.dates)} dates x {len(self.codes)} codes"
            )
        if len(set(self.codes)) != len(self.codes):
            raise MarketDataError("duplicate asset code")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if cur <= prev:
                raise MarketDataError(
                    f"dates must be strictly increasing: {cur} follows {prev}"
                )
        if not np.all(np.isfinite(prices)):
            raise MarketDataError("non-finite price")
        if np.any(prices <= 0):
            raise MarketDataError("nonpositive price")
        prices.flags.writeable = False
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "codes", tuple(self.codes))
        object.__setattr__(self, "prices", prices)

    @property
    def n_assets(self) -> int:
        return len(self.codes)

    def row(self, day: date) -> np.ndarray:
        """Prices on ``day``; raises if the date is not in the table."""
        try:
            idx = self.dates.index(day)
        except ValueError:
            raise MarketDataError(f"date {day.isoformat()} not in price table") from None
        return self.prices[idx]

    def slice(self, start: date | None = None, end: date | None = None) -> PriceTable:
        """Rows with ``start <= date <= end`` (either bound may be open)."""
        keep = [
            i
            for i, d in enumerate(self.dates)
            if (start is None or d >= start) and (end is None or d <= end)
        ]
        if not keep:
            raise MarketDataError("empty date window")
        return PriceTable(
            dates=tuple(self.dates[i] for i in keep),
            codes=self.codes,
            prices=self.prices[keep],
        )

    def select(self, codes: list[str] | tuple[str, ...]) -> PriceTable:
        """Columns for ``codes`` in the given order."""
        missing = [c for c in codes if c not in self.codes]
        if missing:
            raise MarketDataError(f"unknown asset codes: {', '.join(missing)}")
        idx = [self.codes.index(c) for c in codes]
        return PriceTable(dates=self.dates, codes=tuple(codes), prices=self.prices[:, idx])


@dataclass(frozen=True)
class ReturnMatrix:
    """Daily simple returns; ``dates[t]`` is the date the return is realised."""

    dates: tuple[date, ...]
    codes: tuple[str, ...]
    returns: np.ndarray

    def __post_init__(self) -> None:
        returns = np.array(self.returns, dtype=float)
        if returns.ndim != 2 or returns.shape[1] != len(self.codes):
            raise MarketDataError("returns must be an m x n matrix matching codes")
        if len(self.dates) != returns.shape[0]:
            raise MarketDataError("one date per return row required")
        if not np.all(np.isfinite(returns)):
            raise MarketDataError("non-finite return")
        returns.flags.writeable = False
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "codes", tuple(self.codes))
        object.__setattr__(self, "returns", returns)

    @property
    def m(self) -> int:
        return self.returns.shape[0]

    @property
    def n(self) -> int:
        return self.returns.shape[1]

    @classmethod
    def from_array(cls, returns, codes=None) -> ReturnMatrix:
        """Wrap a bare array, synthesising ordinal dates and ``A0..`` codes."""
        returns = np.atleast_2d(np.asarray(returns, dtype=float))
        m, n = returns.shape
        if codes is None:
            codes = tuple(f"A{i}" for i in range(n))
        dates = tuple(date.fromordinal(date(2000, 1, 1).toordinal() + t) for t in range(m))
        return cls(dates=dates, codes=tuple(codes), returns=returns)


def _read_text(source: Source) -> str:
    if isinstance(source, bytes):
        return source.decode("utf-8-sig")
    if isinstance(source, (str, PathLike)):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8-sig")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8-sig")
    return data


def load_prices(source: Source, fill_policy: FillPolicy = "reject") -> PriceTable:
    """Parse a ``date,<CODE1>,...`` CSV into a validated :class:`PriceTable`.

    Parameters
    ----------
    source
        Path, raw bytes, or an open (binary or text) file object.
    fill_policy
        ``"reject"`` treats any empty cell as an error. ``"forward_fill"``
        copies the most recent prior value of the same column; an empty cell
        in the first data row is still an error.
    """
    if fill_policy not in ("reject", "forward_fill"):
        raise MarketDataError(f"unknown fill policy {fill_policy!r}")
    text = _read_text(source)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise MarketDataError("malformed CSV: empty file")
    header = [h.strip() for h in rows[0]]
    if header[0] != "date":
        raise MarketDataError("malformed CSV: first column header must be 'date'")
    codes = header[1:]
    if not codes or any(not c for c in codes):
        raise MarketDataError("malformed CSV: missing asset code in header")

    dates: list[date] = []
    values: list[list[float]] = []
    last: list[float | None] = [None] * len(codes)
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise MarketDataError(
                f"malformed CSV: line {lineno} has {len(row)} fields, expected {len(header)}"
            )
        try:
            dates.append(date.fromisoformat(row[0].strip()))
        except ValueError:
            raise MarketDataError(f"malformed CSV: bad date {row[0]!r} on line {lineno}") from None
        out = []
        for j, cell in enumerate(row[1:]):
            cell = cell.strip()
            if not cell:
                if fill_policy == "reject":
                    raise MarketDataError(
                        f"empty cell for {codes[j]} on line {lineno} (fill policy 'reject')"
                    )
                if last[j] is None:
                    raise MarketDataError(
                        f"empty leading cell for {codes[j]} on line {lineno}; nothing to forward-fill"
                    )
                out.append(last[j])
                continue
            try:
                value = float(cell)
            except ValueError:
                raise MarketDataError(
                    f"malformed CSV: bad number {cell!r} on line {lineno}"
                ) from None
            if not value > 0:
                raise MarketDataError(
                    f"nonpositive price {cell} for {codes[j]} on line {lineno}"
                )
            last[j] = value
            out.append(value)
        values.append(out)

    if not values:
        raise MarketDataError("malformed CSV: no data rows")
    seen = set()
    for d in dates:
        if d in seen:
            raise MarketDataError(f"duplicate date {d.isoformat()}")
        seen.add(d)
    return PriceTable(dates=tuple(dates), codes=tuple(codes), prices=np.array(values))


def compute_returns(p: PriceTable) -> ReturnMatrix:
    """Simple returns ``(P[t+1] - P[t]) / P[t]``; ``m`` counts return rows."""
    if p.prices.shape[0] < 2:
        raise MarketDataError("at least 2 price rows are needed to form a return")
    prices = p.prices
    returns = (prices[1:] - prices[:-1]) / prices[:-1]
    return ReturnMatrix(dates=p.dates[1:], codes=p.codes, returns=returns)


def write_prices(table: PriceTable, path) -> None:
    """Write a price table in the same CSV layout :func:`load_prices` reads."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", *table.codes])
        for d, row in zip(table.dates, table.prices):
            writer.writerow([d.isoformat(), *(repr(float(v)) for v in row)])
