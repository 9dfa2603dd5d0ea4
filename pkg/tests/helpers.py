"""Shared builders for hand-sized test datasets."""

import numpy as np

from ensfs.dataset import Dataset, FeatureMeta

MISSING = -1  # categorical missing code used throughout ensfs


def numeric_col(values):
    return np.asarray(values, dtype=np.float64)


def cat_col(codes):
    return np.asarray(codes, dtype=np.int64)


def make_dataset(specs, months, censored=None):
    """Build a Dataset from (name, kind, block, levels, values) tuples.

    Numeric values go in as float64 (NaN = missing); categorical values are
    integer level codes (-1 = missing).
    """
    features = []
    columns = []
    for name, kind, block, levels, values in specs:
        features.append(FeatureMeta(name=name, kind=kind, block=block,
                                    levels=tuple(levels)))
        if kind == "numeric":
            columns.append(numeric_col(values))
        else:
            columns.append(cat_col(values))
    months = np.asarray(months, dtype=np.float64)
    if censored is None:
        censored = np.zeros(months.shape[0], dtype=bool)
    else:
        censored = np.asarray(censored, dtype=bool)
    return Dataset(features=tuple(features), columns=tuple(columns),
                   target_months=months, censored=censored)


def numeric_only_dataset(matrix, months, censored=None, block="p"):
    """Dataset of plain numeric features named x1..xp from a 2-D array."""
    matrix = np.asarray(matrix, dtype=np.float64)
    specs = [(f"x{j + 1}", "numeric", block, (), matrix[:, j])
             for j in range(matrix.shape[1])]
    return make_dataset(specs, months, censored)
