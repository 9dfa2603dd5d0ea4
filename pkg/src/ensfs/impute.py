"""k-nearest-neighbor median imputation for mixed-type tables.

Distances are computed on the columns that are fully observed across the
reference rows: numeric columns are standardized (reference mean, population
standard deviation), ordinal columns enter as raw integer codes, nominal
columns contribute a 0/1 mismatch term.  A query row restricts the metric to
the columns it actually observes; ranks are per-query, so no rescaling is
needed.  Each missing cell is filled with the median of the values its k
nearest reference rows observed there; categorical medians are taken on the
integer codes (lower median on even counts) so the result stays a declared
level.
"""

from __future__ import annotations

import warnings

import numpy as np

from .dataset import MISSING_CODE, Dataset
from .exceptions import ImputationFallbackWarning


def _check_k(k: int, n_reference: int) -> None:
    if k < 1 or k % 2 == 0:
        raise ValueError(f"k must be a positive odd integer, got {k}")
    if k >= n_reference:
        raise ValueError(
            f"k={k} needs at least {k + 1} reference rows, have {n_reference}"
        )


def _lower_median_code(codes: np.ndarray) -> int:
    ordered = np.sort(codes)
    return int(ordered[(ordered.size - 1) // 2])


def _column_fallback(ds: Dataset, feat_idx: int, reference_rows: np.ndarray):
    meta = ds.features[feat_idx]
    col = ds.columns[feat_idx][reference_rows]
    if meta.kind == "numeric":
        observed = col[~np.isnan(col)]
        if observed.size == 0:
            raise ValueError(
                f"feature {meta.name!r} has no observed reference value at all"
            )
        return float(np.median(observed))
    observed = col[col != MISSING_CODE]
    if observed.size == 0:
        raise ValueError(
            f"feature {meta.name!r} has no observed reference value at all"
        )
    return _lower_median_code(observed)


def impute_rows(ds: Dataset, query_rows, reference_rows, k: int = 5) -> dict:
    """Impute the missing cells of ``query_rows`` from ``reference_rows``.

    Returns a mapping feature name -> imputed column values aligned with
    ``query_rows``.  A query row that is itself a reference row never uses
    itself as a neighbor.  Ties at the k-th distance break toward the lower
    dataset row index.
    """
    query_rows = np.asarray(query_rows, dtype=np.intp)
    reference_rows = np.asarray(reference_rows, dtype=np.intp)
    _check_k(k, reference_rows.size)

    # columns fully observed across the reference rows form the metric
    numeric_parts: list[np.ndarray] = []
    nominal_parts: list[np.ndarray] = []
    metric_cols: list[int] = []
    nominal_cols: list[int] = []
    for idx, meta in enumerate(ds.features):
        ref_col = ds.columns[idx][reference_rows]
        if meta.kind == "numeric":
            if np.any(np.isnan(ref_col)):
                continue
            sd = float(ref_col.std())
            if sd <= 0.0:
                continue
            numeric_parts.append((ref_col - ref_col.mean()) / sd)
            metric_cols.append(idx)
        elif meta.kind == "ordinal":
            if np.any(ref_col == MISSING_CODE):
                continue
            numeric_parts.append(ref_col.astype(np.float64))
            metric_cols.append(idx)
        else:
            if np.any(ref_col == MISSING_CODE):
                continue
            nominal_parts.append(ref_col.astype(np.int64))
            nominal_cols.append(idx)
    if not metric_cols and not nominal_cols:
        raise ValueError("no fully observed column to compute distances on")

    ref_metric = (np.column_stack(numeric_parts) if numeric_parts
                  else np.empty((reference_rows.size, 0)))
    ref_nominal = (np.column_stack(nominal_parts) if nominal_parts
                   else np.empty((reference_rows.size, 0), dtype=np.int64))

    # per-metric-column standardization parameters, to map query values
    num_mean, num_sd = [], []
    for idx in metric_cols:
        meta = ds.features[idx]
        ref_col = ds.columns[idx][reference_rows]
        if meta.kind == "numeric":
            num_mean.append(float(ref_col.mean()))
            num_sd.append(float(ref_col.std()))
        else:
            num_mean.append(0.0)
            num_sd.append(1.0)
    num_mean = np.asarray(num_mean)
    num_sd = np.asarray(num_sd)

    out = {
        meta.name: ds.columns[idx][query_rows].copy()
        for idx, meta in enumerate(ds.features)
    }

    for q_pos, q_row in enumerate(query_rows):
        missing_feats = [
            idx for idx, meta in enumerate(ds.features)
            if (np.isnan(ds.columns[idx][q_row]) if meta.kind == "numeric"
                else ds.columns[idx][q_row] == MISSING_CODE)
        ]
        if not missing_feats:
            continue

        q_metric = np.array(
            [float(ds.columns[idx][q_row]) for idx in metric_cols]
        ) if metric_cols else np.empty(0)
        q_nominal = np.array(
            [int(ds.columns[idx][q_row]) for idx in nominal_cols], dtype=np.int64
        ) if nominal_cols else np.empty(0, dtype=np.int64)
        obs_metric = (~np.isnan(q_metric)) if metric_cols else np.empty(0, dtype=bool)
        # ordinal codes are never NaN; mark their observedness explicitly
        for pos, idx in enumerate(metric_cols):
            if ds.features[idx].kind == "ordinal":
                obs_metric[pos] = ds.columns[idx][q_row] != MISSING_CODE
        obs_nominal = q_nominal != MISSING_CODE

        if not obs_metric.any() and not obs_nominal.any():
            warnings.warn(
                f"row {int(q_row)} observes no distance column; using the "
                "first rows by index as neighbors",
                ImputationFallbackWarning,
            )
            dist = np.zeros(reference_rows.size)
        else:
            dist = np.zeros(reference_rows.size)
            if obs_metric.any():
                qz = (q_metric[obs_metric] - num_mean[obs_metric]) / num_sd[obs_metric]
                diff = ref_metric[:, obs_metric] - qz
                dist += np.einsum("ij,ij->i", diff, diff)
            if obs_nominal.any():
                dist += (ref_nominal[:, obs_nominal]
                         != q_nominal[obs_nominal]).sum(axis=1)

        eligible = reference_rows != q_row
        # sort by (distance, dataset row index); both keys via lexsort
        cand = np.flatnonzero(eligible)
        ranking = cand[np.lexsort((reference_rows[cand], dist[cand]))]
        neighbors = ranking[:k]

        for idx in missing_feats:
            meta = ds.features[idx]
            neigh_vals = ds.columns[idx][reference_rows[neighbors]]
            if meta.kind == "numeric":
                observed = neigh_vals[~np.isnan(neigh_vals)]
                if observed.size == 0:
                    warnings.warn(
                        f"feature {meta.name!r}, row {int(q_row)}: no neighbor "
                        "observed a value; falling back to the column median",
                        ImputationFallbackWarning,
                    )
                    out[meta.name][q_pos] = _column_fallback(ds, idx, reference_rows)
                else:
                    out[meta.name][q_pos] = float(np.median(observed))
            else:
                observed = neigh_vals[neigh_vals != MISSING_CODE]
                if observed.size == 0:
                    warnings.warn(
                        f"feature {meta.name!r}, row {int(q_row)}: no neighbor "
                        "observed a value; falling back to the column median",
                        ImputationFallbackWarning,
                    )
                    out[meta.name][q_pos] = _column_fallback(ds, idx, reference_rows)
                else:
                    out[meta.name][q_pos] = _lower_median_code(observed)
    return out


def knn_impute(ds: Dataset, k: int = 5) -> Dataset:
    """Impute every missing cell of ``ds`` using all rows as references."""
    all_rows = np.arange(ds.n_rows)
    imputed = impute_rows(ds, all_rows, all_rows, k=k)
    return ds.replace(columns=tuple(imputed[f.name] for f in ds.features))
