"""Sample mean vector and population covariance matrix of daily returns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .market_data import ReturnMatrix


@dataclass(frozen=True)
class EstimatePair:
    mu: np.ndarray
    sigma: np.ndarray
    codes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float).reshape(-1)
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if sigma.shape != (mu.size, mu.size):
            raise ValueError(f"sigma shape {sigma.shape} does not match mu length {mu.size}")
        if not np.allclose(sigma, sigma.T, rtol=0.0, atol=1e-14):
            raise ValueError("sigma must be symmetric")
        if np.any(np.diag(sigma) < 0):
            raise ValueError("sigma has a negative variance")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "codes", tuple(self.codes))

    @property
    def n(self) -> int:
        return self.mu.size


def _as_array(r) -> np.ndarray:
    if isinstance(r, ReturnMatrix):
        return r.returns
    return np.atleast_2d(np.asarray(r, dtype=float))


def mean_vector(r) -> np.ndarray:
    """Column means ``(1/m) * sum_t r[t, i]``."""
    x = _as_array(r)
    if x.shape[0] < 1 or x.shape[1] < 1:
        raise ValueError("empty return matrix")
    return x.sum(axis=0) / x.shape[0]


def covariance_matrix(r, mu) -> np.ndarray:
    """Covariance with divisor ``m`` (not ``m - 1``), from a precomputed mean.

    Two-pass: the caller supplies ``mu`` from :func:`mean_vector`, the centred
    cross-products are formed here. The result is symmetrised exactly.
    """
    x = _as_array(r)
    mu = np.asarray(mu, dtype=float).reshape(-1)
    if x.shape[0] < 1:
        raise ValueError("empty return matrix")
    if mu.size != x.shape[1]:
        raise ValueError(f"mean vector length {mu.size} does not match {x.shape[1]} assets")
    centred = x - mu
    sigma = centred.T @ centred / x.shape[0]
    return (sigma + sigma.T) / 2


def estimate(r: ReturnMatrix) -> EstimatePair:
    mu = mean_vector(r)
    return EstimatePair(mu=mu, sigma=covariance_matrix(r, mu), codes=r.codes)


def window_moments(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean and divisor-``m`` covariance of a bare ``m x n`` array."""
    mu = mean_vector(x)
    return mu, covariance_matrix(x, mu)
