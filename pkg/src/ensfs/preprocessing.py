"""Cleaning, imputation and encoding pipeline for mixed-type tables.

Order of operations is fixed: drop columns (missing fraction strictly above
the threshold, then constant, then duplicated columns) -> drop rows whose
missing fraction within any block exceeds the block threshold -> impute by
k-nearest-neighbor medians -> encode -> power-transform and standardize the
numeric columns.  Every fitted quantity (drop decisions, imputation
references, exponents, means, standard deviations) is estimated on the
training rows only; test rows are mapped through the frozen state.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .dataset import MISSING_CODE, Dataset, FeatureMeta
from .encoding import (EncodedColumn, EncodedMatrix, encode_onehot,
                       encode_ordinal, encode_target_vector)
from .exceptions import AllColumnsDropped, AllRowsDropped
from .impute import impute_rows
from .power import (apply_yeo_johnson, fit_standardization, fit_yeo_johnson,
                    standardize)


@dataclass(frozen=True)
class ColumnTransform:
    """Fitted Yeo-Johnson exponent and standardization moments for one column."""

    lam: float
    mean: float
    stdev: float


@dataclass(frozen=True)
class TransformParams:
    """Per-numeric-column transform parameters, serializable to YAML."""

    per_column: dict[str, ColumnTransform]

    def to_dict(self) -> dict:
        return {
            name: {"lambda": t.lam, "mean": t.mean, "stdev": t.stdev}
            for name, t in self.per_column.items()
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TransformParams":
        return cls(per_column={
            str(name): ColumnTransform(
                lam=float(spec["lambda"]), mean=float(spec["mean"]),
                stdev=float(spec["stdev"]),
            )
            for name, spec in data.items()
        })

    def to_yaml(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            yaml.safe_dump(self.to_dict(), fh, sort_keys=False)

    @classmethod
    def from_yaml(cls, path) -> "TransformParams":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(yaml.safe_load(fh))


def _missing_mask(ds: Dataset, feat_idx: int) -> np.ndarray:
    col = ds.columns[feat_idx]
    if ds.features[feat_idx].kind == "numeric":
        return np.isnan(col)
    return col == MISSING_CODE


def _duplicate_of(ds: Dataset, i: int, j: int, rows: np.ndarray) -> bool:
    a, b = ds.features[i], ds.features[j]
    if a.kind != b.kind or a.levels != b.levels:
        return False
    ca, cb = ds.columns[i][rows], ds.columns[j][rows]
    if a.kind == "numeric":
        return bool(np.array_equal(ca, cb, equal_nan=True))
    return bool(np.array_equal(ca, cb))


def select_columns(ds: Dataset, rows, *, max_missing: float = 0.25,
                   drop_constant: bool = True,
                   drop_duplicates: bool = True) -> tuple[list[int], dict[str, str]]:
    """Decide which feature columns survive, judged on ``rows`` only.

    Returns surviving feature indices and a name -> reason drop log.
    """
    rows = np.asarray(rows, dtype=np.intp)
    dropped: dict[str, str] = {}
    kept: list[int] = []
    for idx, meta in enumerate(ds.features):
        frac = float(_missing_mask(ds, idx)[rows].mean())
        if frac > max_missing:
            dropped[meta.name] = f"missing fraction {frac:.3f} > {max_missing}"
            continue
        if drop_constant:
            col = ds.columns[idx][rows]
            observed = (col[~np.isnan(col)] if meta.kind == "numeric"
                        else col[col != MISSING_CODE])
            if np.unique(observed).size <= 1:
                dropped[meta.name] = "constant column"
                continue
        kept.append(idx)
    if drop_duplicates:
        unique: list[int] = []
        for idx in kept:
            twin = next((u for u in unique if _duplicate_of(ds, u, idx, rows)), None)
            if twin is None:
                unique.append(idx)
            else:
                dropped[ds.features[idx].name] = (
                    f"duplicate of {ds.features[twin].name!r}"
                )
        kept = unique
    if not kept:
        raise AllColumnsDropped("cleaning removed every feature column")
    return kept, dropped


def select_rows(ds: Dataset, rows, feat_indices, *,
                block_threshold: float = 0.5) -> tuple[np.ndarray, list[int]]:
    """Keep rows whose per-block missing fraction never exceeds the threshold."""
    rows = np.asarray(rows, dtype=np.intp)
    blocks: dict[str, list[int]] = {}
    for idx in feat_indices:
        blocks.setdefault(ds.features[idx].block, []).append(idx)
    keep = np.ones(rows.size, dtype=bool)
    for members in blocks.values():
        mask = np.column_stack([_missing_mask(ds, idx)[rows] for idx in members])
        keep &= mask.mean(axis=1) <= block_threshold
    dropped = [int(r) for r in rows[~keep]]
    return rows[keep], dropped


def drop_columns_by_missingness(ds: Dataset, threshold: float = 0.25,
                                *, drop_constant: bool = True,
                                drop_duplicates: bool = True
                                ) -> tuple[Dataset, dict[str, str]]:
    """Standalone column cleaning over the whole dataset."""
    kept, log = select_columns(
        ds, np.arange(ds.n_rows), max_missing=threshold,
        drop_constant=drop_constant, drop_duplicates=drop_duplicates,
    )
    out = ds.replace(
        features=tuple(ds.features[i] for i in kept),
        columns=tuple(ds.columns[i].copy() for i in kept),
    )
    return out, log


def drop_rows_by_missingness(ds: Dataset, block_threshold: float = 0.5
                             ) -> tuple[Dataset, list[int]]:
    """Standalone row cleaning over the whole dataset."""
    kept, dropped = select_rows(
        ds, np.arange(ds.n_rows), range(ds.n_features),
        block_threshold=block_threshold,
    )
    if kept.size == 0:
        raise AllRowsDropped("row cleaning removed every row")
    return ds.take_rows(kept), dropped


class TablePreprocessor(BaseEstimator):
    """Fit-on-train, transform-anywhere preprocessing for a Dataset.

    Parameters
    ----------
    max_col_missing : float
        Columns whose training missing fraction strictly exceeds this are
        dropped.
    block_row_threshold : float
        Rows whose missing fraction within any feature block exceeds this
        are dropped.
    n_neighbors : int
        Odd neighbor count for the median imputer.
    drop_constant, drop_duplicates : bool
        Extra column-cleaning rules, judged on training rows.
    """

    def __init__(self, max_col_missing: float = 0.25,
                 block_row_threshold: float = 0.5, n_neighbors: int = 5,
                 drop_constant: bool = True, drop_duplicates: bool = True):
        self.max_col_missing = max_col_missing
        self.block_row_threshold = block_row_threshold
        self.n_neighbors = n_neighbors
        self.drop_constant = drop_constant
        self.drop_duplicates = drop_duplicates

    def fit(self, ds: Dataset, rows=None) -> "TablePreprocessor":
        rows = np.arange(ds.n_rows) if rows is None else np.asarray(rows, np.intp)
        kept, col_log = select_columns(
            ds, rows, max_missing=self.max_col_missing,
            drop_constant=self.drop_constant,
            drop_duplicates=self.drop_duplicates,
        )
        train_rows, row_log = select_rows(
            ds, rows, kept, block_threshold=self.block_row_threshold
        )
        if train_rows.size == 0:
            raise AllRowsDropped("row cleaning removed every training row")

        self.kept_features_: tuple[FeatureMeta, ...] = tuple(
            ds.features[i] for i in kept
        )
        self.dropped_columns_ = col_log
        self.dropped_train_rows_ = row_log
        self.reference_rows_ = train_rows
        self._reduced = ds.replace(
            features=self.kept_features_,
            columns=tuple(ds.columns[i].copy() for i in kept),
        )
        self._signature = (ds.n_rows, ds.feature_names)

        imputed = impute_rows(
            self._reduced, train_rows, train_rows, k=self.n_neighbors
        )
        per_column: dict[str, ColumnTransform] = {}
        for meta in self.kept_features_:
            if meta.kind != "numeric":
                continue
            col = np.asarray(imputed[meta.name], dtype=np.float64)
            lam = fit_yeo_johnson(col)
            mean, stdev = fit_standardization(apply_yeo_johnson(col, lam))
            per_column[meta.name] = ColumnTransform(lam=lam, mean=mean, stdev=stdev)
        self.params_ = TransformParams(per_column=per_column)
        return self

    def _check_fitted(self, ds: Dataset) -> None:
        if not hasattr(self, "params_"):
            raise NotFittedError("TablePreprocessor is not fitted yet")
        if (ds.n_rows, ds.feature_names) != self._signature:
            raise ValueError("transform called with a different dataset")

    def transform(self, ds: Dataset, rows=None) -> EncodedMatrix:
        """Encode ``rows`` using the state fitted on the training rows."""
        self._check_fitted(ds)
        rows = np.arange(ds.n_rows) if rows is None else np.asarray(rows, np.intp)
        kept_idx = [i for i, _ in enumerate(self.kept_features_)]
        surviving, _ = select_rows(
            self._reduced, rows, kept_idx,
            block_threshold=self.block_row_threshold,
        )
        if surviving.size == 0:
            raise AllRowsDropped("every requested row failed the block threshold")
        imputed = impute_rows(
            self._reduced, surviving, self.reference_rows_, k=self.n_neighbors
        )

        parts: list[np.ndarray] = []
        columns: list[EncodedColumn] = []
        for meta in self.kept_features_:
            values = imputed[meta.name]
            if meta.kind == "numeric":
                t = self.params_.per_column[meta.name]
                z = standardize(apply_yeo_johnson(values, t.lam), t.mean, t.stdev)
                parts.append(z.reshape(-1, 1))
                columns.append(EncodedColumn(name=meta.name, source=meta.name,
                                             kind="numeric"))
            elif meta.kind == "nominal":
                block, cols = encode_onehot(values, meta)
                parts.append(block)
                columns.extend(cols)
            else:
                block, cols = encode_ordinal(values, meta)
                parts.append(block)
                columns.extend(cols)

        target = encode_target_vector(
            ds.target_months[surviving], ds.censored[surviving]
        )
        return EncodedMatrix(
            values=np.hstack(parts),
            columns=tuple(columns),
            target=target,
            row_indices=tuple(int(r) for r in surviving),
        )

    def fit_transform(self, ds: Dataset, rows=None) -> EncodedMatrix:
        return self.fit(ds, rows=rows).transform(ds, rows=rows)


def run_pipeline(ds: Dataset, train_rows, test_rows=None, *,
                 max_col_missing: float = 0.25, block_row_threshold: float = 0.5,
                 n_neighbors: int = 5
                 ) -> tuple[EncodedMatrix, EncodedMatrix | None, TransformParams]:
    """One-call train/test preprocessing with train-only fitting."""
    prep = TablePreprocessor(
        max_col_missing=max_col_missing,
        block_row_threshold=block_row_threshold,
        n_neighbors=n_neighbors,
    )
    prep.fit(ds, rows=train_rows)
    train_em = prep.transform(ds, rows=train_rows)
    test_em = prep.transform(ds, rows=test_rows) if test_rows is not None else None
    return train_em, test_em, prep.params_
