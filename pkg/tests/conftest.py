from datetime import date, timedelta

import numpy as np
import pytest

from robustmvo.market_data import PriceTable


def make_prices(m, n, seed=0, codes=None, start=date(2022, 3, 25)):
    """Geometric random-walk price table with ``m`` rows and ``n`` assets."""
    rng = np.random.default_rng(seed)
    steps = rng.normal(0.0005, 0.02, size=(m - 1, n))
    prices = 1000.0 * np.vstack([np.ones(n), np.cumprod(1 + steps, axis=0)])
    codes = codes or [f"C{i:02d}" for i in range(n)]
    dates = [start + timedelta(days=i) for i in range(m)]
    return PriceTable(dates=tuple(dates), codes=tuple(codes), prices=prices)


def random_returns(rng, m, n):
    mix = np.eye(n) + 0.3 * rng.normal(size=(n, n))
    return rng.normal(0.0005, 0.02, size=(m, n)) @ mix


@pytest.fixture
def rng():
    return np.random.default_rng(20231019)
