"""Epsilon-insensitive support vector regression solved by sequential minimal optimization.

The dual is written in ``beta = alpha - alpha*``:

    minimize   0.5 * beta' K beta - y' beta + epsilon * sum(|beta|)
    subject to sum(beta) = 0,  -C <= beta_i <= C

Each step moves one pair ``(i, j)`` along ``beta_i += t, beta_j -= t``,
which keeps the equality constraint. The pair is the maximal violating
pair of the first-order conditions, and ``t`` is the exact minimizer of
the piecewise-quadratic objective along that line.
"""
import logging
from dataclasses import dataclass
from typing import Any, Optional

import numpy as np

from houseprice.errors import DatasetError
from houseprice.models.base_types import ModelFamily, SvrParams, parse_params
from houseprice.models.interface import Regressor
from houseprice.types.types import Dataset

logger = logging.getLogger(__name__)

STALL_SLACK = 64


def kernel_matrix(
    A: np.ndarray,
    B: np.ndarray,
    kernel: str,
    gamma: float,
    degree: int = 3,
    coef0: float = 1.0,
) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        sq = np.sum(A * A, axis=1)[:, None] + np.sum(B * B, axis=1)[None, :] - 2.0 * (A @ B.T)
        return np.exp(-gamma * np.maximum(sq, 0.0))
    if kernel == "polynomial":
        return (gamma * (A @ B.T) + coef0) ** degree
    raise ValueError(f"unknown kernel '{kernel}'")


def dual_objective(K: np.ndarray, y: np.ndarray, beta: np.ndarray, epsilon: float) -> float:
    return float(0.5 * beta @ K @ beta - y @ beta + epsilon * np.sum(np.abs(beta)))


@dataclass(frozen=True)
class DualSolution:
    beta: np.ndarray
    intercept: float
    converged: bool
    iterations: int
    objective: float


def _pair_step(K: np.ndarray, beta: np.ndarray, F: np.ndarray, i: int, j: int, C: float, epsilon: float) -> float:
    """Exact minimizer over ``t`` in ``[0, hi]`` of the objective along ``(+t, -t)`` on ``(i, j)``.

    The objective along the line is convex and piecewise quadratic, with
    kinks where ``beta_i + t`` or ``beta_j - t`` crosses zero. Segments are
    walked left to right until the derivative stops being negative.
    """
    hi = min(C - beta[i], beta[j] + C)
    curvature = K[i, i] + K[j, j] - 2.0 * K[i, j]
    slope = F[i] - F[j]

    kinks = sorted(b for b in (-beta[i], beta[j]) if 0.0 < b < hi)
    edges = [0.0] + kinks + [hi]
    for start, end in zip(edges, edges[1:]):
        mid = 0.5 * (start + end)
        s_i = 1.0 if beta[i] + mid > 0 else -1.0
        s_j = 1.0 if beta[j] - mid > 0 else -1.0
        rate = slope + epsilon * (s_i - s_j)
        if curvature * start + rate >= 0.0:
            return float(start)
        if curvature > 1e-12 and -rate / curvature < end:
            return float(-rate / curvature)
    return float(hi)


def solve_svr_dual(
    K: np.ndarray,
    y: np.ndarray,
    C: float,
    epsilon: float,
    tol: float = 1e-3,
    max_iter: Optional[int] = None,
) -> DualSolution:
    """Solve the epsilon-SVR dual for a precomputed kernel matrix.

    Stops when the largest violation of the optimality conditions drops
    below ``tol`` or after ``max_iter`` pair updates (default ``100 * n``),
    in which case ``converged`` is False.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[0]
    max_iter = 100 * n if max_iter is None else max_iter
    beta = np.zeros(n)
    F = -y.copy()  # K beta - y

    converged = False
    iterations = 0
    while iterations < max_iter:
        up = beta < C
        down = beta > -C
        g_up = np.where(beta >= 0, F + epsilon, F - epsilon)
        g_down = np.where(beta <= 0, F - epsilon, F + epsilon)
        if not np.any(up) or not np.any(down):
            converged = True
            break
        i = int(np.argmin(np.where(up, g_up, np.inf)))
        j = int(np.argmax(np.where(down, g_down, -np.inf)))
        if g_down[j] - g_up[i] < tol:
            converged = True
            break
        t = _pair_step(K, beta, F, i, j, C, epsilon)
        if t <= 0.0:
            # no representable step left; accept a gap at rounding level
            slack = STALL_SLACK * np.finfo(float).eps * max(1.0, float(np.max(np.abs(F))))
            converged = bool(g_down[j] - g_up[i] < tol + slack)
            if not converged:
                logger.warning(f"SMO stalled on pair ({i}, {j}) after {iterations} iteration(s)")
            break
        beta[i] = C if t == C - beta[i] else beta[i] + t
        beta[j] = -C if t == beta[j] + C else beta[j] - t
        F += t * (K[:, i] - K[:, j])
        iterations += 1

    intercept = _intercept(beta, F, C, epsilon)
    if not converged and iterations >= max_iter:
        logger.warning(f"SMO did not converge within {max_iter} iteration(s)")
    return DualSolution(
        beta=beta,
        intercept=intercept,
        converged=converged,
        iterations=iterations,
        objective=dual_objective(K, y, beta, epsilon),
    )


def _intercept(beta: np.ndarray, F: np.ndarray, C: float, epsilon: float) -> float:
    free = (beta != 0) & (np.abs(beta) < C)
    if np.any(free):
        return float(np.mean(-F[free] - epsilon * np.sign(beta[free])))
    up = beta < C
    down = beta > -C
    g_up = np.where(beta >= 0, F + epsilon, F - epsilon)
    g_down = np.where(beta <= 0, F - epsilon, F + epsilon)
    bounds = []
    if np.any(up):
        bounds.append(float(np.min(g_up[up])))
    if np.any(down):
        bounds.append(float(np.max(g_down[down])))
    return -float(np.mean(bounds))


class SvrModel(Regressor):
    """Fitted SVR. Inputs are standardized with the training means and scales.

    ``dual_coefficients`` are in dollars and bounded by ``C`` in magnitude.
    """

    kind = ModelFamily.SVR

    def __init__(
        self,
        params: SvrParams,
        gamma: float,
        support_rows: np.ndarray,
        dual_coefficients: np.ndarray,
        intercept: float,
        x_mean: np.ndarray,
        x_scale: np.ndarray,
        y_scale: float,
        converged: bool = True,
    ):
        self.params = params
        self.gamma = float(gamma)
        self.support_rows = np.array(support_rows, dtype=float).reshape(-1, len(x_mean))
        self.dual_coefficients = np.array(dual_coefficients, dtype=float)
        self.intercept = float(intercept)
        self.x_mean = np.array(x_mean, dtype=float)
        self.x_scale = np.array(x_scale, dtype=float)
        self.y_scale = float(y_scale)
        self.converged = converged
        for arr in (self.support_rows, self.dual_coefficients, self.x_mean, self.x_scale):
            arr.setflags(write=False)
        self._support_z = self._standardize(self.support_rows)

    @property
    def n_features(self) -> int:
        return int(self.x_mean.shape[0])

    def _standardize(self, X: np.ndarray) -> np.ndarray:
        return (X - self.x_mean) / self.x_scale

    def _predict(self, X: np.ndarray) -> np.ndarray:
        if self.dual_coefficients.shape[0] == 0:
            return np.full(X.shape[0], self.intercept)
        K = kernel_matrix(
            self._support_z, self._standardize(X), self.params.kernel, self.gamma, self.params.degree, self.params.coef0
        )
        return K.T @ self.dual_coefficients + self.intercept

    def params_dict(self) -> dict[str, Any]:
        return self.params.model_dump()

    def to_payload(self) -> dict[str, Any]:
        return {
            "gamma": self.gamma,
            "support_rows": self.support_rows.tolist(),
            "dual_coefficients": self.dual_coefficients.tolist(),
            "intercept": self.intercept,
            "x_mean": self.x_mean.tolist(),
            "x_scale": self.x_scale.tolist(),
            "y_scale": self.y_scale,
            "converged": self.converged,
        }

    @classmethod
    def from_payload(cls, params: SvrParams, payload: dict[str, Any]) -> "SvrModel":
        return cls(
            params=params,
            gamma=float(payload["gamma"]),
            support_rows=np.array(payload["support_rows"], dtype=float),
            dual_coefficients=np.array(payload["dual_coefficients"], dtype=float),
            intercept=float(payload["intercept"]),
            x_mean=np.array(payload["x_mean"], dtype=float),
            x_scale=np.array(payload["x_scale"], dtype=float),
            y_scale=float(payload["y_scale"]),
            converged=bool(payload["converged"]),
        )


def fit_svr(train: Dataset, params: Optional[SvrParams | dict[str, Any]] = None) -> SvrModel:
    """Fit epsilon-SVR with SMO.

    Features and target are standardized before solving; ``C`` and
    ``epsilon`` are given in dollars and rescaled with the target scale.
    A run that hits the iteration cap returns the last iterate with
    ``converged`` False.

    Raises:
        DatasetError: the training set is empty.
        ParameterError: invalid hyperparameters (for example C <= 0).
    """
    params = parse_params(ModelFamily.SVR, params)
    if train.n_rows == 0:
        raise DatasetError("cannot fit an SVR on an empty training set")

    X, y = train.rows, train.target
    x_mean = X.mean(axis=0)
    x_scale = X.std(axis=0)
    x_scale = np.where(x_scale > 0, x_scale, 1.0)
    y_mean = float(y.mean())
    y_scale = float(y.std())
    y_scale = y_scale if y_scale > 0 else 1.0
    gamma = params.gamma if params.gamma is not None else 1.0 / train.n_features

    Z = (X - x_mean) / x_scale
    K = kernel_matrix(Z, Z, params.kernel, gamma, params.degree, params.coef0)
    solution = solve_svr_dual(
        K,
        (y - y_mean) / y_scale,
        C=params.C / y_scale,
        epsilon=params.epsilon / y_scale,
        tol=params.tol,
        max_iter=params.max_passes * train.n_rows,
    )
    support = solution.beta != 0
    logger.info(
        f"SVR fit: {int(support.sum())} support vector(s) of {train.n_rows}, "
        f"{solution.iterations} iteration(s), converged={solution.converged}"
    )
    return SvrModel(
        params=params,
        gamma=gamma,
        support_rows=X[support],
        dual_coefficients=y_scale * solution.beta[support],
        intercept=y_mean + y_scale * solution.intercept,
        x_mean=x_mean,
        x_scale=x_scale,
        y_scale=y_scale,
        converged=solution.converged,
    )
