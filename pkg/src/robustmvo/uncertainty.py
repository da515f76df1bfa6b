"""Interval uncertainty sets for the mean vector and covariance matrix.

Two constructions are provided:

* :func:`moving_window_intervals` slides a length-``K`` window over the
  return history and takes elementwise min/max of the window moments.
* :func:`block_bootstrap_intervals` resamples rows with replacement in
  ``B`` blocks of ``L`` rows and takes two-sided percentiles of the
  replicated moments.

:func:`robust_params` turns either set into midpoints and half-widths.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np

from .estimation import window_moments
from .market_data import ReturnMatrix

log = logging.getLogger(__name__)

Method = Literal["moving_window", "bootstrap"]
BlockRule = Literal["floor", "unfloored"]


@dataclass(frozen=True)
class IntervalSet:
    mu_lo: np.ndarray
    mu_hi: np.ndarray
    sigma_lo: np.ndarray
    sigma_hi: np.ndarray
    method: Method
    meta: dict[str, Any] = field(default_factory=dict)
    codes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        arrs = {}
        for name in ("mu_lo", "mu_hi"):
            arrs[name] = np.asarray(getattr(self, name), dtype=float).reshape(-1)
        n = arrs["mu_lo"].size
        for name in ("sigma_lo", "sigma_hi"):
            arrs[name] = np.atleast_2d(np.asarray(getattr(self, name), dtype=float))
            if arrs[name].shape != (n, n):
                raise ValueError(f"{name} must be {n}x{n}")
        if arrs["mu_hi"].size != n:
            raise ValueError("mu_lo and mu_hi lengths differ")
        if np.any(arrs["mu_lo"] > arrs["mu_hi"]):
            raise ValueError("mu_lo exceeds mu_hi")
        if np.any(arrs["sigma_lo"] > arrs["sigma_hi"]):
            raise ValueError("sigma_lo exceeds sigma_hi")
        for name in ("sigma_lo", "sigma_hi"):
            if not np.array_equal(arrs[name], arrs[name].T):
                raise ValueError(f"{name} must be symmetric")
        if self.method not in ("moving_window", "bootstrap"):
            raise ValueError(f"unknown method {self.method!r}")
        for name, value in arrs.items():
            value.flags.writeable = False
            object.__setattr__(self, name, value)
        object.__setattr__(self, "codes", tuple(self.codes))

    @property
    def n(self) -> int:
        return self.mu_lo.size

    def to_dict(self) -> dict[str, Any]:
        return {
            "method": self.method,
            "params": dict(self.meta),
            "codes": list(self.codes),
            "mu_lo": self.mu_lo.tolist(),
            "mu_hi": self.mu_hi.tolist(),
            "sigma_lo": self.sigma_lo.tolist(),
            "sigma_hi": self.sigma_hi.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> IntervalSet:
        return cls(
            mu_lo=np.array(d["mu_lo"], dtype=float),
            mu_hi=np.array(d["mu_hi"], dtype=float),
            sigma_lo=np.array(d["sigma_lo"], dtype=float),
            sigma_hi=np.array(d["sigma_hi"], dtype=float),
            method=d["method"],
            meta=dict(d.get("params", {})),
            codes=tuple(d.get("codes", ())),
        )


@dataclass(frozen=True)
class RobustParams:
    """Interval midpoints (``mu0``, ``sigma0``) and half-widths (``beta``, ``delta``)."""

    mu0: np.ndarray
    beta: np.ndarray
    sigma0: np.ndarray
    delta: np.ndarray
    codes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        mu0 = np.asarray(self.mu0, dtype=float).reshape(-1)
        beta = np.asarray(self.beta, dtype=float).reshape(-1)
        sigma0 = np.atleast_2d(np.asarray(self.sigma0, dtype=float))
        delta = np.atleast_2d(np.asarray(self.delta, dtype=float))
        n = mu0.size
        if beta.size != n or sigma0.shape != (n, n) or delta.shape != (n, n):
            raise ValueError("robust parameter dimensions disagree")
        if np.any(beta < 0) or np.any(delta < 0):
            raise ValueError("half-widths must be nonnegative")
        if not (np.array_equal(sigma0, sigma0.T) and np.array_equal(delta, delta.T)):
            raise ValueError("sigma0 and delta must be symmetric")
        object.__setattr__(self, "mu0", mu0)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "sigma0", sigma0)
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "codes", tuple(self.codes))

    @property
    def n(self) -> int:
        return self.mu0.size

    def to_dict(self) -> dict[str, Any]:
        return {
            "codes": list(self.codes),
            "mu0": self.mu0.tolist(),
            "beta": self.beta.tolist(),
            "sigma0": self.sigma0.tolist(),
            "delta": self.delta.tolist(),
        }


@dataclass(frozen=True)
class BootstrapConfig:
    """Settings for :func:`block_bootstrap_intervals`.

    ``block_rule="floor"`` uses ``L = floor(m**(1/3))`` and ``B = floor(m / L)``.
    ``block_rule="unfloored"`` keeps the real cube root when counting blocks,
    ``B = ceil(m / m**(1/3))``, while each block still draws ``floor(m**(1/3))``
    rows. ``block_len_override`` fixes ``L`` and gives ``B = floor(m / L)``.
    """

    n_boot: int = 1000
    alpha: float = 0.05
    seed: int = 0
    block_len_override: int | None = None
    block_rule: BlockRule = "floor"

    def __post_init__(self) -> None:
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.n_boot < 2:
            raise ValueError("n_boot must be at least 2")
        if self.block_len_override is not None and self.block_len_override < 1:
            raise ValueError("block_len_override must be a positive integer")
        if self.block_rule not in ("floor", "unfloored"):
            raise ValueError(f"unknown block rule {self.block_rule!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def _as_returns(r) -> tuple[np.ndarray, tuple[str, ...]]:
    if isinstance(r, ReturnMatrix):
        return r.returns, r.codes
    x = np.atleast_2d(np.asarray(r, dtype=float))
    return x, tuple(f"A{i}" for i in range(x.shape[1]))


def moving_window_intervals(r, K: int) -> IntervalSet:
    x, codes = _as_returns(r)
    m = x.shape[0]
    if K < 1:
        raise ValueError("window length K must be at least 1")
    if K > m:
        raise ValueError(f"window length K={K} exceeds the {m} available return rows")
    n_windows = m - K + 1
    mu_lo = mu_hi = sig_lo = sig_hi = None
    for t in range(n_windows):
        mu, sigma = window_moments(x[t : t + K])
        if t == 0:
            mu_lo, mu_hi = mu.copy(), mu.copy()
            sig_lo, sig_hi = sigma.copy(), sigma.copy()
        else:
            np.minimum(mu_lo, mu, out=mu_lo)
            np.maximum(mu_hi, mu, out=mu_hi)
            np.minimum(sig_lo, sigma, out=sig_lo)
            np.maximum(sig_hi, sigma, out=sig_hi)
    return IntervalSet(
        mu_lo=mu_lo,
        mu_hi=mu_hi,
        sigma_lo=sig_lo,
        sigma_hi=sig_hi,
        method="moving_window",
        meta={"K": int(K), "windows": n_windows, "m": m},
        codes=codes,
    )


def integer_cube_root(m: int) -> int:
    """Largest integer ``L`` with ``L**3 <= m``."""
    if m < 0:
        raise ValueError("m must be nonnegative")
    L = int(round(m ** (1.0 / 3.0)))
    while L**3 > m:
        L -= 1
    while (L + 1) ** 3 <= m:
        L += 1
    return L


def block_shape(m: int, cfg: BootstrapConfig) -> tuple[int, int, float]:
    """Return ``(L, B, cube_root)`` for a history of ``m`` return rows."""
    root = m ** (1.0 / 3.0)
    if cfg.block_len_override is not None:
        L = cfg.block_len_override
        if L > m:
            raise ValueError(f"block length {L} exceeds the {m} available return rows")
        B = m // L
    elif cfg.block_rule == "unfloored":
        L = integer_cube_root(m)
        B = math.ceil(m / root)
    else:
        L = integer_cube_root(m)
        B = m // L
    if L < 1 or B < 1:
        raise ValueError(f"degenerate block layout L={L}, B={B} for m={m}")
    return L, B, root


def replication_rng(seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for replication ``index`` under ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _replicate(x: np.ndarray, L: int, B: int, seed: int, index: int):
    rng = replication_rng(seed, index)
    rows = rng.integers(0, x.shape[0], size=(B, L)).reshape(-1)
    return window_moments(x[rows])


def _percentile_axis0(samples: np.ndarray, p: float) -> np.ndarray:
    s = np.sort(samples, axis=0)
    N = s.shape[0]
    h = p * (N - 1)
    lo = int(math.floor(h))
    frac = h - lo
    hi = min(lo + 1, N - 1)
    return s[lo] + frac * (s[hi] - s[lo])


def percentile(samples, p: float) -> float:
    """Linear-interpolation percentile on order statistics, ``h = p * (N - 1)``."""
    s = np.asarray(samples, dtype=float).reshape(-1)
    if s.size == 0:
        raise ValueError("percentile of an empty sample")
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    return float(_percentile_axis0(s, p))


def block_bootstrap_intervals(r, cfg: BootstrapConfig | None = None, *, workers: int = 1) -> IntervalSet:
    """Bootstrap percentile intervals for the mean and covariance.

    Each replication ``i`` draws ``B`` blocks of ``L`` rows uniformly with
    replacement from its own RNG stream keyed by ``(cfg.seed, i)``, so the
    result is independent of ``workers``.
    """
    cfg = cfg or BootstrapConfig()
    x, codes = _as_returns(r)
    m, n = x.shape
    if m < 2:
        raise ValueError("block bootstrap needs at least 2 return rows")
    L, B, root = block_shape(m, cfg)
    log.info("bootstrap block layout: m=%d cube_root=%.4f L=%d B=%d", m, root, L, B)

    mus = np.empty((cfg.n_boot, n))
    sigmas = np.empty((cfg.n_boot, n, n))

    def run(indices: range) -> None:
        for i in indices:
            mus[i], sigmas[i] = _replicate(x, L, B, cfg.seed, i)

    workers = max(1, int(workers))
    if workers == 1:
        run(range(cfg.n_boot))
    else:
        step = math.ceil(cfg.n_boot / workers)
        chunks = [range(s, min(s + step, cfg.n_boot)) for s in range(0, cfg.n_boot, step)]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))

    lo_p, hi_p = cfg.alpha / 2, 1 - cfg.alpha / 2
    return IntervalSet(
        mu_lo=_percentile_axis0(mus, lo_p),
        mu_hi=_percentile_axis0(mus, hi_p),
        sigma_lo=_percentile_axis0(sigmas, lo_p),
        sigma_hi=_percentile_axis0(sigmas, hi_p),
        method="bootstrap",
        meta={
            "L": L,
            "B": B,
            "cube_root": root,
            "m": m,
            "n_boot": cfg.n_boot,
            "alpha": cfg.alpha,
            "seed": cfg.seed,
            "block_rule": "override" if cfg.block_len_override is not None else cfg.block_rule,
        },
        codes=codes,
    )


def robust_params(u: IntervalSet) -> RobustParams:
    # delta is the half-width of the covariance interval, like beta for the mean.
    return RobustParams(
        mu0=(u.mu_hi + u.mu_lo) / 2,
        beta=(u.mu_hi - u.mu_lo) / 2,
        sigma0=(u.sigma_hi + u.sigma_lo) / 2,
        delta=(u.sigma_hi - u.sigma_lo) / 2,
        codes=u.codes,
    )
