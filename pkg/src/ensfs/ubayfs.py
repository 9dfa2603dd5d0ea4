"""Count-plus-prior ensemble feature selection with a size budget.

Elementary runs of the greedy correlation ranker each pick exactly
``max_features`` features on a seeded row subsample.  Per-feature selection
counts are added to user prior weights, and the final set is the top
``max_features`` posterior scores.  Because the greedy ranking is nested,
the pick order computed once at the largest budget yields the counts for
every smaller budget by prefix truncation.
"""

from __future__ import annotations

import warnings

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError
from sklearn.feature_selection import SelectorMixin

from .exceptions import ConstantColumnWarning, UnknownFeatureName
from .models import mrmr_select
from .rent import subsample_indices
from .validation import check_X_y

DEFAULT_PRIOR = 0.1


def elementary_selection_orders(X, y, *, k_max: int, n_models: int = 100,
                                subsample_ratio: float = 0.75, seed: int = 0
                                ) -> tuple[np.ndarray, list[np.ndarray]]:
    """Greedy pick order per elementary subsample, shape (n_models, k_max)."""
    X, y = check_X_y(X, y)
    if n_models < 1:
        raise ValueError(f"need at least 1 elementary model, got {n_models}")
    if not 1 <= k_max <= X.shape[1]:
        raise ValueError(f"k_max={k_max} outside [1, {X.shape[1]}]")
    subsamples = subsample_indices(X.shape[0], subsample_ratio, n_models, seed)
    orders = np.empty((n_models, k_max), dtype=np.intp)
    with warnings.catch_warnings():
        # constant encoded columns are routine on subsamples
        warnings.simplefilter("ignore", ConstantColumnWarning)
        for t, idx in enumerate(subsamples):
            orders[t] = mrmr_select(X[idx], y[idx], k_max)
    return orders, subsamples


def selection_counts(orders: np.ndarray, n_features: int,
                     k: int | None = None) -> np.ndarray:
    """How often each feature appears among the first ``k`` picks."""
    if k is None:
        k = orders.shape[1]
    if not 1 <= k <= orders.shape[1]:
        raise ValueError(f"k={k} outside [1, {orders.shape[1]}]")
    counts = np.zeros(n_features, dtype=np.int64)
    flat = orders[:, :k].ravel()
    np.add.at(counts, flat, 1)
    return counts


def posterior_scores(counts, prior_weights) -> np.ndarray:
    """Additive evidence: counts plus prior weights."""
    counts = np.asarray(counts, dtype=np.float64)
    prior = np.asarray(prior_weights, dtype=np.float64)
    if counts.shape != prior.shape:
        raise ValueError("counts and prior weights must align")
    return counts + prior


def select_top(scores, counts, max_features: int) -> np.ndarray:
    """Top-scoring mask of exactly ``max_features`` features.

    Ties break toward the higher count, then the lower column index.
    """
    scores = np.asarray(scores, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    n = scores.shape[0]
    if not 1 <= max_features <= n:
        raise ValueError(f"max_features={max_features} outside [1, {n}]")
    order = np.lexsort((np.arange(n), -counts, -scores))
    mask = np.zeros(n, dtype=bool)
    mask[order[:max_features]] = True
    return mask


def make_prior_weights(column_sources, elevated, weight: float,
                       base: float = DEFAULT_PRIOR) -> np.ndarray:
    """Per-column prior vector elevating every column of the named features.

    ``column_sources`` maps encoded columns to their source feature name;
    every name in ``elevated`` must occur there.
    """
    sources = list(column_sources)
    elevated = set(elevated)
    unknown = elevated - set(sources)
    if unknown:
        raise UnknownFeatureName(
            f"elevated feature(s) not in the encoded matrix: {sorted(unknown)}"
        )
    return np.array([weight if s in elevated else base for s in sources])


class UBaySelector(SelectorMixin, BaseEstimator):
    """Budgeted ensemble selector combining counts with prior weights.

    Parameters
    ----------
    max_features : int
        Exact size of the selected set (and of every elementary pick).
    n_models : int
        Number of elementary subsample runs.
    subsample_ratio : float
        Fraction of rows per elementary run, drawn without replacement.
    prior_weights : array-like or None
        Per-column prior evidence; None means a flat 0.1.
    random_state : int
        Master seed; elementary run t uses seed (random_state, t).
    """

    def __init__(self, max_features: int = 20, n_models: int = 100,
                 subsample_ratio: float = 0.75, prior_weights=None,
                 random_state: int = 0):
        self.max_features = max_features
        self.n_models = n_models
        self.subsample_ratio = subsample_ratio
        self.prior_weights = prior_weights
        self.random_state = random_state

    def fit(self, X, y):
        X, y = check_X_y(X, y)
        n = X.shape[1]
        if self.prior_weights is None:
            prior = np.full(n, DEFAULT_PRIOR)
        else:
            prior = np.asarray(self.prior_weights, dtype=np.float64)
            if prior.shape != (n,):
                raise ValueError(
                    f"prior_weights must have shape ({n},), got {prior.shape}"
                )
            if np.any(prior <= 0.0):
                raise ValueError("prior weights must be positive")
        orders, subsamples = elementary_selection_orders(
            X, y, k_max=self.max_features, n_models=self.n_models,
            subsample_ratio=self.subsample_ratio, seed=self.random_state,
        )
        self.orders_ = orders
        self.subsample_indices_ = subsamples
        self.counts_ = selection_counts(orders, n)
        self.prior_ = prior
        self.scores_ = posterior_scores(self.counts_, prior)
        self.support_ = select_top(self.scores_, self.counts_, self.max_features)
        self.n_features_in_ = n
        return self

    def _get_support_mask(self) -> np.ndarray:
        if not hasattr(self, "support_"):
            raise NotFittedError("UBaySelector is not fitted yet")
        return self.support_

    def posterior_table(self, feature_names=None) -> pd.DataFrame:
        """Counts, priors and scores per feature, exportable with to_csv."""
        mask = self._get_support_mask()
        n = mask.shape[0]
        names = (list(feature_names) if feature_names is not None
                 else [f"x{j}" for j in range(n)])
        if len(names) != n:
            raise ValueError(f"expected {n} feature names, got {len(names)}")
        return pd.DataFrame({
            "feature": names,
            "count": self.counts_,
            "prior": self.prior_,
            "score": self.scores_,
            "selected": mask.astype(int),
        })
