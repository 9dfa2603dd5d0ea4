"""Repeated elastic net feature selection over seeded row subsamples.

An ensemble of elastic-net models is fitted on ``n_models`` subsamples
(drawn without replacement, fresh seed per model derived from the master
seed by counter).  Three per-feature statistics summarize the ensemble:

* nonzero fraction  -- how often the weight was away from zero,
* sign stability    -- |mean of the weight signs|,
* t statistic       -- one-sample t test of the mean weight against zero.

A feature is selected when the first two clear their thresholds and the
t test passes at the configured quantile.  Features that never received a
nonzero weight are never selected, whatever the thresholds.
"""

from __future__ import annotations

import math

import numpy as np
import pandas as pd
from scipy import stats
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.feature_selection import SelectorMixin

from .models import fit_elastic_net
from .validation import check_X_y

ZERO_TOL = 1e-8


def subsample_indices(n_rows: int, ratio: float, n_models: int,
                      seed: int) -> list[np.ndarray]:
    """Seeded without-replacement subsamples of size ceil(ratio * n_rows)."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"subsample ratio must be in (0, 1), got {ratio}")
    size = math.ceil(ratio * n_rows)
    out = []
    for t in range(n_models):
        rng = np.random.default_rng([seed, t])
        out.append(np.sort(rng.choice(n_rows, size=size, replace=False)))
    return out


def ensemble_weights(X, y, *, n_models: int = 100, subsample_ratio: float = 0.75,
                     C: float = 1.0, l1_ratio: float = 0.3, seed: int = 0,
                     solver_tol: float = 1e-7, solver_max_sweeps: int = 10000
                     ) -> tuple[np.ndarray, list[np.ndarray], int]:
    """Fit the elementary models; returns (weights, subsamples, n_skipped).

    A model whose solve raises is skipped and the effective ensemble size
    shrinks; the weight matrix only holds successful fits.
    """
    X, y = check_X_y(X, y)
    if n_models < 2:
        raise ValueError(f"need at least 2 elementary models, got {n_models}")
    subsamples = subsample_indices(X.shape[0], subsample_ratio, n_models, seed)
    if subsamples[0].size < 2:
        raise ValueError("subsample size must be at least 2 rows")

    rows = []
    kept_subsamples = []
    n_skipped = 0
    for idx in subsamples:
        try:
            fit = fit_elastic_net(
                X[idx], y[idx], C=C, l1_ratio=l1_ratio,
                tol=solver_tol, max_sweeps=solver_max_sweeps, warn=False,
            )
        except Exception:
            n_skipped += 1
            continue
        rows.append(fit.coef)
        kept_subsamples.append(idx)
    if len(rows) < 2:
        raise ValueError("fewer than 2 elementary models survived")
    return np.vstack(rows), kept_subsamples, n_skipped


def selection_criteria(weights, zero_tol: float = ZERO_TOL
                       ) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-feature (nonzero fraction, sign stability, t statistic)."""
    W = np.asarray(weights, dtype=np.float64)
    if W.ndim != 2 or W.shape[0] < 2:
        raise ValueError("weights must be (n_models >= 2, n_features)")
    n_models = W.shape[0]
    nonzero = np.abs(W) > zero_tol
    c1 = nonzero.mean(axis=0)
    signs = np.where(nonzero, np.sign(W), 0.0)
    c2 = np.abs(signs.mean(axis=0))

    mean = W.mean(axis=0)
    sd = W.std(axis=0, ddof=1)
    t = np.zeros_like(mean)
    spread = sd > 0.0
    t[spread] = mean[spread] / (sd[spread] / np.sqrt(n_models))
    degenerate = ~spread & (mean != 0.0)
    t[degenerate] = np.inf * np.sign(mean[degenerate])
    return c1, c2, t


def t_critical(t_quantile: float, n_models: int) -> float:
    """Student-t threshold for the mean-weight test (n_models - 1 df)."""
    if not 0.5 < t_quantile < 1.0:
        raise ValueError(f"t_quantile must be in (0.5, 1), got {t_quantile}")
    return float(stats.t.ppf(t_quantile, df=n_models - 1))


def select_features(c1, c2, t_stat, *, min_nonzero_frac: float,
                    min_sign_stability: float,
                    t_crit: float | None) -> np.ndarray:
    """Boolean support mask from the three criteria.

    ``t_crit=None`` bypasses the t test.  A zero nonzero fraction always
    excludes the feature.
    """
    c1 = np.asarray(c1, dtype=np.float64)
    c2 = np.asarray(c2, dtype=np.float64)
    t_stat = np.asarray(t_stat, dtype=np.float64)
    mask = (c1 > 0.0) & (c1 >= min_nonzero_frac) & (c2 >= min_sign_stability)
    if t_crit is not None:
        mask &= np.abs(t_stat) >= t_crit
    return mask


class RentSelector(SelectorMixin, BaseEstimator):
    """Ensemble elastic-net feature selector.

    Parameters
    ----------
    n_models : int
        Number of elementary elastic-net fits.
    subsample_ratio : float
        Fraction of rows drawn (without replacement) per elementary fit.
    C : float
        Inverse regularization strength of the elementary models.
    l1_ratio : float
        Mixing of the l1 vs l2 penalty.
    min_nonzero_frac, min_sign_stability : float
        Selection thresholds on the nonzero-fraction and sign-stability
        statistics, both in [0, 1].
    t_quantile : float or None
        Quantile of the Student-t distribution used by the mean-weight
        test; None disables the test.
    max_features : int or None
        When set, ``feasible_`` reports whether the selected set fits the
        budget.  The selection itself is never truncated.
    random_state : int
        Master seed; elementary model t uses seed (random_state, t).
    """

    def __init__(self, n_models: int = 100, subsample_ratio: float = 0.75,
                 C: float = 1.0, l1_ratio: float = 0.3,
                 min_nonzero_frac: float = 0.3, min_sign_stability: float = 0.3,
                 t_quantile: float | None = 0.975, max_features: int | None = None,
                 random_state: int = 0, solver_tol: float = 1e-7,
                 solver_max_sweeps: int = 10000):
        self.n_models = n_models
        self.subsample_ratio = subsample_ratio
        self.C = C
        self.l1_ratio = l1_ratio
        self.min_nonzero_frac = min_nonzero_frac
        self.min_sign_stability = min_sign_stability
        self.t_quantile = t_quantile
        self.max_features = max_features
        self.random_state = random_state
        self.solver_tol = solver_tol
        self.solver_max_sweeps = solver_max_sweeps

    def fit(self, X, y):
        for name, value in (("min_nonzero_frac", self.min_nonzero_frac),
                            ("min_sign_stability", self.min_sign_stability)):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        X, y = check_X_y(X, y)
        weights, subsamples, n_skipped = ensemble_weights(
            X, y, n_models=self.n_models, subsample_ratio=self.subsample_ratio,
            C=self.C, l1_ratio=self.l1_ratio, seed=self.random_state,
            solver_tol=self.solver_tol, solver_max_sweeps=self.solver_max_sweeps,
        )
        self.weights_ = weights
        self.subsample_indices_ = subsamples
        self.n_models_used_ = weights.shape[0]
        self.n_models_skipped_ = n_skipped
        c1, c2, t_stat = selection_criteria(weights)
        self.nonzero_frac_ = c1
        self.sign_stability_ = c2
        self.t_stat_ = t_stat
        self.t_crit_ = (None if self.t_quantile is None
                        else t_critical(self.t_quantile, self.n_models_used_))
        self.support_ = select_features(
            c1, c2, t_stat,
            min_nonzero_frac=self.min_nonzero_frac,
            min_sign_stability=self.min_sign_stability,
            t_crit=self.t_crit_,
        )
        self.n_selected_ = int(self.support_.sum())
        self.feasible_ = (None if self.max_features is None
                          else self.n_selected_ <= self.max_features)
        self.n_features_in_ = X.shape[1]
        return self

    def _get_support_mask(self) -> np.ndarray:
        if not hasattr(self, "support_"):
            raise NotFittedError("RentSelector is not fitted yet")
        return self.support_

    def diagnostics_table(self, feature_names=None) -> pd.DataFrame:
        """Per-feature criteria as a table, exportable with to_csv."""
        mask = self._get_support_mask()
        n = mask.shape[0]
        names = (list(feature_names) if feature_names is not None
                 else [f"x{j}" for j in range(n)])
        if len(names) != n:
            raise ValueError(f"expected {n} feature names, got {len(names)}")
        return pd.DataFrame({
            "feature": names,
            "nonzero_frac": self.nonzero_frac_,
            "sign_stability": self.sign_stability_,
            "t_stat": self.t_stat_,
            "selected": mask.astype(int),
        })
