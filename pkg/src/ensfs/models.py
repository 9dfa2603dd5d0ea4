"""Downstream models and the greedy correlation-based feature ranker.

The elastic net minimizes

    (1 / (2 m)) * ||y - X b - b0||^2  +  (1/C) * (r ||b||_1 + (1-r)/2 ||b||_2^2)

with an unpenalized intercept, by cyclic coordinate descent on the Gram
matrix.  A sweep converges when the largest coordinate update falls below
``tol``; hitting ``max_sweeps`` first returns the current iterate and warns.
The inner loop is numba-compiled when numba is importable and falls back to
the same code in plain Python otherwise.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.exceptions import NotFittedError

from .exceptions import (ConstantColumnWarning, ConvergenceWarning,
                         DimensionMismatch, RankDeficientWarning)
from .validation import check_matrix, check_X_y

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        def wrap(fn):
            return fn
        return wrap


@njit(cache=True)
def _cd_kernel(G, b, m, lam_l1, lam_l2, tol, max_sweeps, beta, gbeta):
    n = b.shape[0]
    sweeps = 0
    converged = False
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in range(n):
            gjj = G[j, j]
            old = beta[j]
            rho = (b[j] - gbeta[j] + gjj * old) / m
            denom = gjj / m + lam_l2
            if denom <= 0.0:
                new = 0.0
            elif rho > lam_l1:
                new = (rho - lam_l1) / denom
            elif rho < -lam_l1:
                new = (rho + lam_l1) / denom
            else:
                new = 0.0
            delta = new - old
            if delta != 0.0:
                beta[j] = new
                for i in range(n):
                    gbeta[i] += G[i, j] * delta
                if delta < 0.0:
                    delta = -delta
                if delta > max_delta:
                    max_delta = delta
        sweeps += 1
        if max_delta < tol:
            converged = True
            break
    return sweeps, converged


@dataclass(frozen=True)
class EnetFit:
    """Result of one elastic-net solve."""

    coef: np.ndarray
    intercept: float
    n_sweeps: int
    converged: bool


def fit_elastic_net(X, y, C: float = 1.0, l1_ratio: float = 0.5, *,
                    tol: float = 1e-7, max_sweeps: int = 10000,
                    beta_init=None, warn: bool = True) -> EnetFit:
    """Solve the penalized least-squares problem for one (C, l1_ratio)."""
    X, y = check_X_y(X, y)
    if C <= 0:
        raise ValueError(f"C must be positive, got {C}")
    if not 0.0 <= l1_ratio <= 1.0:
        raise ValueError(f"l1_ratio must be in [0, 1], got {l1_ratio}")
    m = X.shape[0]
    alpha = 1.0 / C

    x_mean = X.mean(axis=0)
    y_mean = float(y.mean())
    Xc = X - x_mean
    yc = y - y_mean
    G = np.ascontiguousarray(Xc.T @ Xc)
    b = Xc.T @ yc

    beta = (np.zeros(X.shape[1]) if beta_init is None
            else np.asarray(beta_init, dtype=np.float64).copy())
    if beta.shape[0] != X.shape[1]:
        raise DimensionMismatch("beta_init length does not match X columns")
    gbeta = G @ beta

    n_sweeps, converged = _cd_kernel(
        G, b, float(m), alpha * l1_ratio, alpha * (1.0 - l1_ratio),
        tol, max_sweeps, beta, gbeta,
    )
    if not converged and warn:
        warnings.warn(
            f"coordinate descent hit the sweep cap ({max_sweeps}); "
            "returning the current iterate",
            ConvergenceWarning,
        )
    intercept = y_mean - float(x_mean @ beta)
    return EnetFit(coef=beta, intercept=intercept,
                   n_sweeps=int(n_sweeps), converged=bool(converged))


def elastic_net_objective(X, y, coef, intercept: float,
                          C: float, l1_ratio: float) -> float:
    """Objective value; used for monotonicity checks and diagnostics."""
    X, y = check_X_y(X, y)
    coef = np.asarray(coef, dtype=np.float64)
    resid = y - X @ coef - intercept
    alpha = 1.0 / C
    penalty = alpha * (l1_ratio * np.abs(coef).sum()
                       + 0.5 * (1.0 - l1_ratio) * float(coef @ coef))
    return float(resid @ resid / (2.0 * X.shape[0]) + penalty)


class ElasticNetRegressor(RegressorMixin, BaseEstimator):
    """Elastic-net linear regression with the package's pinned objective."""

    def __init__(self, C: float = 1.0, l1_ratio: float = 0.5,
                 tol: float = 1e-7, max_sweeps: int = 10000):
        self.C = C
        self.l1_ratio = l1_ratio
        self.tol = tol
        self.max_sweeps = max_sweeps

    def fit(self, X, y):
        result = fit_elastic_net(
            X, y, C=self.C, l1_ratio=self.l1_ratio,
            tol=self.tol, max_sweeps=self.max_sweeps,
        )
        self.coef_ = result.coef
        self.intercept_ = result.intercept
        self.n_sweeps_ = result.n_sweeps
        self.converged_ = result.converged
        self.n_features_in_ = self.coef_.shape[0]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("ElasticNetRegressor is not fitted yet")
        X = check_matrix(X)
        if X.shape[1] != self.coef_.shape[0]:
            raise DimensionMismatch(
                f"X has {X.shape[1]} columns, model expects {self.coef_.shape[0]}"
            )
        return X @ self.coef_ + self.intercept_


class OLSRegressor(RegressorMixin, BaseEstimator):
    """Ordinary least squares via the minimum-norm solution.

    Rank-deficient designs are solved anyway and flagged through
    ``rank_deficient_`` plus a RankDeficientWarning.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        design = np.column_stack([np.ones(X.shape[0]), X])
        solution, _, rank, _ = np.linalg.lstsq(design, y, rcond=None)
        self.intercept_ = float(solution[0])
        self.coef_ = solution[1:]
        self.rank_ = int(rank)
        self.rank_deficient_ = rank < design.shape[1]
        if self.rank_deficient_:
            warnings.warn(
                f"design matrix rank {rank} < {design.shape[1]}; "
                "minimum-norm solution returned",
                RankDeficientWarning,
            )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "coef_"):
            raise NotFittedError("OLSRegressor is not fitted yet")
        X = check_matrix(X)
        if X.shape[1] != self.coef_.shape[0]:
            raise DimensionMismatch(
                f"X has {X.shape[1]} columns, model expects {self.coef_.shape[0]}"
            )
        return X @ self.coef_ + self.intercept_


class KNNRegressor(RegressorMixin, BaseEstimator):
    """Mean-of-k-nearest-neighbors regression, Euclidean metric.

    Ties at the k-th distance break toward the lower training row index; a
    query equal to a training row keeps that row (distance zero) as a
    neighbor.
    """

    def __init__(self, n_neighbors: int = 5):
        self.n_neighbors = n_neighbors

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        if self.n_neighbors < 1 or self.n_neighbors > X.shape[0]:
            raise ValueError(
                f"n_neighbors={self.n_neighbors} outside [1, {X.shape[0]}]"
            )
        self.X_ = X.copy()
        self.y_ = y.copy()
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        if not hasattr(self, "X_"):
            raise NotFittedError("KNNRegressor is not fitted yet")
        X = check_matrix(X)
        if X.shape[1] != self.X_.shape[1]:
            raise DimensionMismatch(
                f"X has {X.shape[1]} columns, model expects {self.X_.shape[1]}"
            )
        sq = ((X[:, None, :] - self.X_[None, :, :]) ** 2).sum(axis=2)
        # stable sort keeps lower training index first on exact ties
        order = np.argsort(sq, axis=1, kind="stable")[:, : self.n_neighbors]
        return self.y_[order].mean(axis=1)


def _abs_correlations(X: np.ndarray, y: np.ndarray,
                      warn: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """|corr| of every column with y and with every other column.

    Constant columns get zero correlation everywhere (flagged once).
    """
    m = X.shape[0]
    Xc = X - X.mean(axis=0)
    sd = Xc.std(axis=0)
    live = sd > 0.0
    if warn and not live.all():
        warnings.warn(
            f"{int((~live).sum())} constant column(s); correlations set to 0",
            ConstantColumnWarning,
        )
    Z = np.zeros_like(Xc)
    Z[:, live] = Xc[:, live] / (sd[live] * np.sqrt(m))
    yc = y - y.mean()
    y_sd = yc.std()
    if y_sd > 0.0:
        yz = yc / (y_sd * np.sqrt(m))
        rel = np.abs(Z.T @ yz)
    else:
        if warn:
            warnings.warn("target is constant; relevances set to 0",
                          ConstantColumnWarning)
        rel = np.zeros(X.shape[1])
    cross = np.abs(Z.T @ Z)
    return rel, cross


def mrmr_select(X, y, k: int) -> np.ndarray:
    """Greedy ranking maximizing |corr with y| minus mean |corr with picks|.

    Returns exactly ``k`` column indices in pick order.  Ties resolve to the
    lower column index.
    """
    X, y = check_X_y(X, y)
    n = X.shape[1]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} outside [1, {n}]")
    rel, cross = _abs_correlations(X, y)

    picked = np.empty(k, dtype=np.intp)
    in_set = np.zeros(n, dtype=bool)
    red_sum = np.zeros(n)
    for step in range(k):
        if step == 0:
            score = rel.copy()
        else:
            score = rel - red_sum / step
        score[in_set] = -np.inf
        j = int(np.argmax(score))  # argmax takes the first max: lower index wins
        picked[step] = j
        in_set[j] = True
        red_sum += cross[:, j]
    return picked
