"""Evaluation metrics: error, stability, redundancy, prior overlap, signs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import (ConstantColumnWarning, DegenerateStabilityWarning,
                         EmptySelection)
from .validation import check_matrix, check_same_length, check_vector


def rmse(y_true, y_pred) -> float:
    """Root mean squared error."""
    y_true = check_vector(np.asarray(y_true, dtype=np.float64), "y_true")
    y_pred = check_vector(np.asarray(y_pred, dtype=np.float64), "y_pred")
    check_same_length(y_true, y_pred, ("y_true", "y_pred"))
    if y_true.shape[0] == 0:
        raise ValueError("rmse of zero observations is undefined")
    diff = y_true - y_pred
    return float(np.sqrt(np.mean(diff * diff)))


@dataclass(frozen=True)
class StabilityResult:
    """Clamped stability plus the raw (possibly negative) estimate."""

    value: float
    raw: float
    degenerate: bool

    def __float__(self) -> float:
        return self.value


def selection_stability(selections, n_features: int) -> StabilityResult:
    """Across-run selection stability in [0, 1].

    ``selections`` is a sequence of index collections or boolean masks, one
    per run.  The estimate is 1 minus the mean unbiased selection-indicator
    variance over a null normalizer; a mean set size of 0 or n makes the
    normalizer vanish, which is flagged and reported as 0.
    """
    sets = list(selections)
    if len(sets) < 2:
        raise ValueError("stability needs at least 2 selection runs")
    if n_features < 1:
        raise ValueError("n_features must be positive")
    d = len(sets)
    Z = np.zeros((d, n_features))
    for i, sel in enumerate(sets):
        sel = np.asarray(sel)
        if sel.dtype == bool:
            if sel.shape != (n_features,):
                raise ValueError("boolean mask length must equal n_features")
            Z[i] = sel.astype(np.float64)
        else:
            idx = sel.astype(np.intp)
            if idx.size and (idx.min() < 0 or idx.max() >= n_features):
                raise ValueError("selection index out of range")
            Z[i, idx] = 1.0

    p = Z.mean(axis=0)
    k_bar = float(p.sum())
    denom = (k_bar / n_features) * (1.0 - k_bar / n_features)
    if denom <= 0.0:
        warnings.warn(
            "mean selected-set size is 0 or n; stability undefined, using 0",
            DegenerateStabilityWarning,
        )
        return StabilityResult(value=0.0, raw=float("nan"), degenerate=True)
    var = (d / (d - 1.0)) * p * (1.0 - p)
    raw = 1.0 - float(var.mean()) / denom
    return StabilityResult(value=float(min(1.0, max(0.0, raw))), raw=raw,
                           degenerate=False)


def redundancy_rate(X, selected) -> float:
    """Mean |Pearson correlation| over unordered pairs of selected columns.

    Singleton or empty selections score 0.  Pairs involving a constant
    column are skipped (flagged); if every pair is skipped the rate is 0.
    """
    X = check_matrix(X)
    selected = np.asarray(list(selected), dtype=np.intp)
    if selected.size < 2:
        return 0.0
    sub = X[:, selected]
    centered = sub - sub.mean(axis=0)
    sd = centered.std(axis=0)
    live = sd > 0.0
    if not live.all():
        warnings.warn(
            f"{int((~live).sum())} constant selected column(s) skipped in "
            "redundancy",
            ConstantColumnWarning,
        )
    if live.sum() < 2:
        return 0.0
    Z = centered[:, live] / (sd[live] * np.sqrt(X.shape[0]))
    corr = np.abs(Z.T @ Z)
    iu = np.triu_indices(corr.shape[0], k=1)
    return float(corr[iu].mean())


def elevated_fraction(selected, elevated) -> float:
    """Share of the selected set that carries elevated prior evidence."""
    selected = set(selected)
    if not selected:
        raise EmptySelection("selected set is empty")
    return len(selected & set(elevated)) / len(selected)


SIGN_ALWAYS_POS = "++"
SIGN_MOSTLY_POS = "+"
SIGN_EVEN = "even"
SIGN_MOSTLY_NEG = "-"
SIGN_ALWAYS_NEG = "--"
SIGN_NEVER = ""


def sign_pattern(coefs) -> str:
    """Summarize coefficient signs across the runs that selected a feature."""
    values = [float(c) for c in coefs]
    if not values:
        return SIGN_NEVER
    pos = sum(1 for v in values if v > 0)
    neg = sum(1 for v in values if v < 0)
    if pos == len(values):
        return SIGN_ALWAYS_POS
    if neg == len(values):
        return SIGN_ALWAYS_NEG
    if pos > neg:
        return SIGN_MOSTLY_POS
    if neg > pos:
        return SIGN_MOSTLY_NEG
    return SIGN_EVEN


def sign_summary(per_feature_coefs) -> dict[str, str]:
    """Apply :func:`sign_pattern` to a feature -> coefficient-list mapping."""
    return {name: sign_pattern(vals) for name, vals in per_feature_coefs.items()}
