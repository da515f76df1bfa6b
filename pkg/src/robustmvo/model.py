"""Classical and worst-case mean-variance problems in minimisation form.

Both builders return ``f(x) = 0.5 * x'Qx + c'x`` over the unit simplex
``{x : sum(x) = 1, 0 <= x <= 1}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Literal

import numpy as np

from .estimation import EstimatePair
from .uncertainty import RobustParams

Label = Literal["classical", "robust"]


@dataclass(frozen=True)
class QpProblem:
    Q: np.ndarray
    c: np.ndarray
    gamma: float
    label: Label
    codes: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        c = np.asarray(self.c, dtype=float).reshape(-1)
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        if Q.shape != (c.size, c.size):
            raise ValueError(f"Q shape {Q.shape} does not match c length {c.size}")
        if c.size < 1:
            raise ValueError("empty problem")
        if not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12):
            raise ValueError("Q must be symmetric")
        object.__setattr__(self, "Q", (Q + Q.T) / 2)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "codes", tuple(self.codes))

    @property
    def n(self) -> int:
        return self.c.size

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.c @ x)

    def gradient(self, x) -> np.ndarray:
        return self.Q @ np.asarray(x, dtype=float) + self.c

    def to_dict(self) -> dict[str, Any]:
        return {"label": self.label, "gamma": self.gamma, "Q": self.Q.tolist(), "c": self.c.tolist()}


def _check_gamma(gamma: float) -> None:
    if not (np.isfinite(gamma) and gamma > 0):
        raise ValueError(f"risk aversion gamma must be positive, got {gamma}")


def build_classical_qp(est: EstimatePair, gamma: float) -> QpProblem:
    _check_gamma(gamma)
    return QpProblem(Q=gamma * est.sigma, c=-est.mu, gamma=gamma, label="classical", codes=est.codes)


def build_robust_qp(rp: RobustParams, gamma: float) -> QpProblem:
    """Worst case over the interval sets.

    With ``x >= 0`` the smallest expected return in the box is
    ``(mu0 - beta)'x`` and the largest variance term comes from the
    elementwise upper covariance ``sigma0 + delta``.
    """
    _check_gamma(gamma)
    return QpProblem(
        Q=gamma * (rp.sigma0 + rp.delta),
        c=-(rp.mu0 - rp.beta),
        gamma=gamma,
        label="robust",
        codes=rp.codes,
    )
