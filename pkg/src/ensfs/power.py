"""Yeo-Johnson power transform with maximum-likelihood exponent fitting.

The transform is fitted per column by maximizing the Gaussian profile
log-likelihood of the transformed values over the exponent.  The search
scans a coarse grid on [-5, 5] to bracket the optimum and refines the
bracket by golden-section search to a 1e-4 exponent tolerance.
"""

from __future__ import annotations

import numpy as np

from .exceptions import DegenerateColumn, ZeroVariance

LAMBDA_BOUNDS = (-5.0, 5.0)
LAMBDA_TOL = 1e-4
_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def apply_yeo_johnson(x, lam: float) -> np.ndarray:
    """Transform values elementwise.

    Uses expm1/log1p forms, so small exponents do not lose precision.
    """
    x = np.asarray(x, dtype=np.float64)
    scalar = x.ndim == 0
    if scalar:
        x = x.reshape(1)
    out = np.empty_like(x)
    pos = x >= 0
    if lam == 0.0:
        out[pos] = np.log1p(x[pos])
    else:
        out[pos] = np.expm1(lam * np.log1p(x[pos])) / lam
    neg = ~pos
    if lam == 2.0:
        out[neg] = -np.log1p(-x[neg])
    else:
        out[neg] = -np.expm1((2.0 - lam) * np.log1p(-x[neg])) / (2.0 - lam)
    return float(out[0]) if scalar else out


def yeo_johnson_loglik(x: np.ndarray, lam: float) -> float:
    """Profile log-likelihood of the transformed sample under normality."""
    x = np.asarray(x, dtype=np.float64)
    m = x.shape[0]
    z = apply_yeo_johnson(x, lam)
    var = z.var()  # MLE variance, divisor m
    if var <= 0.0:
        return -np.inf
    jacobian = np.sum(np.sign(x) * np.log1p(np.abs(x)))
    return -0.5 * m * np.log(var) + (lam - 1.0) * jacobian


def fit_yeo_johnson(x, *, bounds=LAMBDA_BOUNDS, tol: float = LAMBDA_TOL) -> float:
    """Maximum-likelihood exponent for one column.

    Raises DegenerateColumn when the column has fewer than two distinct
    values (the likelihood is flat there).
    """
    x = np.asarray(x, dtype=np.float64)
    if np.unique(x).size < 2:
        raise DegenerateColumn("column needs >= 2 distinct values to fit")

    lo, hi = bounds
    # bracket the best candidate on a coarse grid, then refine inside it
    grid = np.linspace(lo, hi, 21)
    scores = np.array([yeo_johnson_loglik(x, lam) for lam in grid])
    best = int(np.argmax(scores))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, grid.size - 1)]

    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc = yeo_johnson_loglik(x, c)
    fd = yeo_johnson_loglik(x, d)
    while (b - a) > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = yeo_johnson_loglik(x, c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = yeo_johnson_loglik(x, d)
    return float(0.5 * (a + b))


def standardize(x, mean: float, stdev: float) -> np.ndarray:
    """Center and scale with previously fitted parameters."""
    if stdev <= 0.0:
        raise ZeroVariance(f"standard deviation must be positive, got {stdev}")
    return (np.asarray(x, dtype=np.float64) - mean) / stdev


def fit_standardization(x) -> tuple[float, float]:
    """Mean and population standard deviation (divisor m) of a column."""
    x = np.asarray(x, dtype=np.float64)
    mean = float(x.mean())
    stdev = float(x.std())
    if stdev <= 0.0:
        raise ZeroVariance("column is constant, cannot standardize")
    return mean, stdev
