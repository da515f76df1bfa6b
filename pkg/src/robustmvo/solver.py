"""Projected-gradient solver for small QPs over the unit simplex."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .model import QpProblem


class ConvergenceError(RuntimeError):
    """The iteration cap was hit before the KKT residual reached ``tol``.

    The best iterate found is attached as ``solution`` for diagnostics.
    """

    def __init__(self, message: str, solution: PortfolioSolution):
        super().__init__(message)
        self.solution = solution


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-9
    max_iter: int = 100_000
    psd_eps: float = 0.0

    def __post_init__(self) -> None:
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.psd_eps < 0:
            raise ValueError("psd_eps must be nonnegative")


@dataclass(frozen=True)
class PortfolioSolution:
    weights: np.ndarray
    f_val: float
    iterations: int
    kkt_residual: float
    psd_shift: float
    converged: bool = True
    label: str = ""
    gamma: float = float("nan")
    codes: tuple[str, ...] = ()
    history: tuple[float, ...] = field(default=(), repr=False, compare=False)
    residuals: tuple[float, ...] = field(default=(), repr=False, compare=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "gamma": self.gamma,
            "codes": list(self.codes),
            "weights": self.weights.tolist(),
            "f_val": self.f_val,
            "iterations": self.iterations,
            "kkt_residual": self.kkt_residual,
            "psd_shift": self.psd_shift,
            "converged": self.converged,
        }


def nearest_psd(M, eps: float = 0.0, *, return_shift: bool = False):
    """Clip the spectrum of symmetric ``M`` from below at ``eps``.

    Matrices whose eigenvalues are already ``>= eps`` come back unchanged.
    With ``return_shift=True`` also returns the largest amount any
    eigenvalue was raised (0.0 when nothing was clipped).
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    scale = max(1.0, float(np.max(np.abs(M)))) if M.size else 1.0
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError("matrix must be symmetric")
    M = (M + M.T) / 2
    w, V = np.linalg.eigh(M)
    if w[0] >= eps:
        out, shift = M, 0.0
    else:
        shift = float(eps - w[0])
        out = (V * np.maximum(w, eps)) @ V.T
        out = (out + out.T) / 2
    return (out, shift) if return_shift else out


def project_simplex(v) -> np.ndarray:
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}`` by sort and threshold."""
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size == 0:
        raise ValueError("cannot project an empty vector")
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    k = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / k > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


def _check_feasible(x: np.ndarray, atol: float = 1e-8) -> None:
    if abs(x.sum() - 1.0) > atol or np.any(x < -atol) or np.any(x > 1 + atol):
        raise ValueError("point is not feasible for the simplex")


def kkt_residual(p: QpProblem, x) -> float:
    """``||x - P(x - (Qx + c))||_inf``; zero exactly at optima of convex ``p``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != p.n:
        raise ValueError("dimension mismatch")
    _check_feasible(x)
    return float(np.max(np.abs(x - project_simplex(x - p.gradient(x)))))


def _step_lipschitz(Q: np.ndarray, eigvals: np.ndarray) -> float:
    L = float(eigvals[-1]) if eigvals.size else 0.0
    if Q.shape[0] == 1 or L <= 0:
        L = float(np.max(np.sum(np.abs(Q), axis=1)))
    return L


def solve_qp(p: QpProblem, cfg: SolverConfig | None = None) -> PortfolioSolution:
    """Minimise ``0.5 x'Qx + c'x`` over the unit simplex.

    ``Q`` is first clipped to the PSD cone. The iteration is FISTA with a
    fixed step ``1/L`` and restart: when the momentum step would raise
    either the objective or the KKT residual, momentum is reset and a plain
    projected gradient step is taken from the current point instead. Stops once the
    KKT residual is at most ``cfg.tol``.

    Raises
    ------
    ConvergenceError
        If ``cfg.max_iter`` iterations pass without certification.
    """
    cfg = cfg or SolverConfig()
    Q, shift = nearest_psd(p.Q, cfg.psd_eps, return_shift=True)
    if shift > 0:
        p = QpProblem(Q=Q, c=p.c, gamma=p.gamma, label=p.label, codes=p.codes)
    L = _step_lipschitz(Q, np.linalg.eigvalsh(Q))
    step = 1.0 / L if L > 0 else 1.0

    def f(z):
        return 0.5 * z @ Q @ z + p.c @ z

    n = p.n
    x = np.full(n, 1.0 / n)
    fx = f(x)
    y, t = x, 1.0
    history = [fx]
    res = kkt_residual(p, x)
    residuals = [res]
    it = 0
    slack = 4 * np.finfo(float).eps
    while res > cfg.tol and it < cfg.max_iter:
        it += 1
        z = project_simplex(y - step * (Q @ y + p.c))
        fz = f(z)
        rz = kkt_residual(p, z)
        if fz > fx + slack * (abs(fx) + 1.0) or rz > res:
            # A plain step of length 1/L never raises f (up to rounding).
            t = 1.0
            z = project_simplex(x - step * (Q @ x + p.c))
            fz = f(z)
            rz = kkt_residual(p, z)
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        y = z + ((t - 1.0) / t_next) * (z - x)
        x, fx, res, t = z, fz, rz, t_next
        history.append(fx)
        residuals.append(res)

    weights = np.clip(x, 0.0, 1.0)
    sol = PortfolioSolution(
        weights=weights,
        f_val=p.objective(weights),
        iterations=it,
        kkt_residual=kkt_residual(p, weights),
        psd_shift=shift,
        converged=res <= cfg.tol,
        label=p.label,
        gamma=p.gamma,
        codes=p.codes,
        history=tuple(history),
        residuals=tuple(residuals),
    )
    if not sol.converged:
        raise ConvergenceError(
            f"no KKT certificate after {it} iterations (residual {res:.3e} > tol {cfg.tol:.1e})",
            sol,
        )
    return sol
