"""Cleaning thresholds, train-only fitting, and the end-to-end pipeline."""

import numpy as np
import pytest

from ensfs.exceptions import AllColumnsDropped
from ensfs.preprocessing import (
    TablePreprocessor,
    TransformParams,
    drop_columns_by_missingness,
    drop_rows_by_missingness,
    run_pipeline,
)
from helpers import make_dataset, numeric_only_dataset


def _col(n_missing, m=100, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=m)
    v[:n_missing] = np.nan
    return v


def test_column_over_threshold_dropped_at_threshold_kept():
    m = 100
    ds = make_dataset(
        [("keep25", "numeric", "p", (), _col(25, m, seed=1)),
         ("drop26", "numeric", "p", (), _col(26, m, seed=2)),
         ("anchor", "numeric", "p", (), _col(0, m, seed=3))],
        months=np.linspace(1, 70, m),
    )
    kept, dropped = drop_columns_by_missingness(ds, threshold=0.25)
    assert "keep25" in kept.feature_names
    assert "drop26" not in kept.feature_names
    assert "drop26" in dropped


def test_constant_column_dropped():
    ds = make_dataset(
        [("c", "numeric", "p", (), [3.0, 3.0, 3.0, 3.0]),
         ("v", "numeric", "p", (), [1.0, 2.0, 3.0, 4.0])],
        months=[10, 20, 30, 40],
    )
    kept, dropped = drop_columns_by_missingness(ds)
    assert kept.feature_names == ("v",)
    assert "constant" in dropped["c"]


def test_duplicate_column_dropped_keeps_first():
    ds = make_dataset(
        [("a", "numeric", "p", (), [1.0, 2.0, 3.0]),
         ("b", "numeric", "b", (), [1.0, 2.0, 3.0]),
         ("c", "numeric", "p", (), [5.0, 6.0, 9.0])],
        months=[10, 20, 30],
    )
    kept, dropped = drop_columns_by_missingness(ds)
    assert kept.feature_names == ("a", "c")
    assert "duplicate" in dropped["b"]


def test_all_columns_dropped_raises():
    ds = make_dataset([("c", "numeric", "p", (), [1.0, 1.0])], months=[10, 20])
    with pytest.raises(AllColumnsDropped):
        drop_columns_by_missingness(ds)


def test_row_drop_by_block_missingness():
    # block b has 5 columns; row 0 misses 3 of them (60%), row 1 misses 2 (40%)
    cols = []
    for j in range(5):
        v = np.ones(4) * (j + 1)
        v[2] = j + 2.0  # keep columns non-constant
        cols.append((f"b{j}", "numeric", "b", (), v.copy()))
    cols.append(("p1", "numeric", "p", (), [1.0, 2.0, 3.0, 4.0]))
    ds = make_dataset(cols, months=[10, 20, 30, 40])
    arr = list(ds.columns)
    for j in range(3):
        c = arr[j].copy()
        c[0] = np.nan
        arr[j] = c
    for j in range(2):
        c = arr[j].copy()
        c[1] = np.nan
        arr[j] = c
    ds = ds.replace(columns=arr)
    kept, dropped_rows = drop_rows_by_missingness(ds, block_threshold=0.5)
    assert dropped_rows == [0]
    assert kept.n_rows == 3


def test_row_at_exactly_half_missing_retained():
    ds = make_dataset(
        [("b1", "numeric", "b", (), [np.nan, 1.0, 3.0]),
         ("b2", "numeric", "b", (), [2.0, 5.0, 4.0])],
        months=[10, 20, 30],
    )
    kept, dropped_rows = drop_rows_by_missingness(ds, block_threshold=0.5)
    assert dropped_rows == []
    assert kept.n_rows == 3


def test_pipeline_numeric_only_identity_shape():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(20, 3))
    ds = numeric_only_dataset(X, months=np.linspace(2, 69, 20))
    train = np.arange(20)
    em, te, params = run_pipeline(ds, train)
    assert te is None
    assert em.values.shape == (20, 3)
    assert [c.kind for c in em.columns] == ["numeric"] * 3
    # standardized output: zero mean, unit population variance
    np.testing.assert_allclose(em.values.mean(axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(em.values.std(axis=0), 1.0, atol=1e-10)


def test_pipeline_encodes_categoricals():
    ds = make_dataset(
        [("n1", "numeric", "p", (), [0.1, 1.2, 2.3, 3.1, 4.9, 5.2]),
         ("nom", "nominal", "p", ("A", "B", "C"), [0, 1, 2, 0, 1, 2]),
         ("oq", "ordinal", "h", ("1", "2"), [0, 1, 0, 1, 0, 1])],
        months=[5, 15, 30, 45, 55, 65],
    )
    em, _, _ = run_pipeline(ds, np.arange(6))
    kinds = [c.kind for c in em.columns]
    assert kinds.count("numeric") == 1
    assert kinds.count("onehot") == 2
    assert kinds.count("ordinal") == 1
    assert em.target.tolist() == [1, 2, 3, 4, 5, 6]


def test_transform_params_fitted_on_train_only():
    rng = np.random.default_rng(9)
    X = rng.normal(size=(30, 2))
    months = np.linspace(2, 69, 30)
    ds = numeric_only_dataset(X, months)
    train, test = np.arange(20), np.arange(20, 30)

    _, _, p_with = run_pipeline(ds, train, test)
    # wildly distorting the test rows must not move any fitted parameter
    X2 = X.copy()
    X2[20:] = X2[20:] * 50 + 7
    ds2 = numeric_only_dataset(X2, months)
    _, _, p_without = run_pipeline(ds2, train, test)
    assert p_with.to_dict() == p_without.to_dict()


def test_test_rows_mapped_through_frozen_state():
    rng = np.random.default_rng(10)
    X = rng.normal(size=(24, 2))
    ds = numeric_only_dataset(X, np.linspace(2, 69, 24))
    train, test = np.arange(16), np.arange(16, 24)
    em_tr, em_te, params = run_pipeline(ds, train, test)
    assert em_te.values.shape == (8, 2)
    # reapply the stored transform by hand to one test cell
    name = em_tr.columns[0].name
    t = params.per_column[name]
    from ensfs.power import apply_yeo_johnson
    want = (apply_yeo_johnson(np.array([X[16, 0]]), t.lam)[0] - t.mean) / t.stdev
    np.testing.assert_allclose(em_te.values[0, 0], want, atol=1e-12)


def test_preprocessor_estimator_round_trip(tmp_path):
    rng = np.random.default_rng(11)
    X = rng.normal(size=(18, 2))
    ds = numeric_only_dataset(X, np.linspace(2, 69, 18))
    prep = TablePreprocessor(n_neighbors=3)
    em = prep.fit_transform(ds, np.arange(18))
    assert prep.get_params()["n_neighbors"] == 3
    path = tmp_path / "params.yaml"
    prep.params_.to_yaml(path)
    back = TransformParams.from_yaml(path)
    assert back.to_dict() == prep.params_.to_dict()
    assert em.n_columns == 2


def test_imputation_references_are_train_rows_only():
    # the lone missing cell sits in a test row; its neighbors must come from
    # the training rows even though a closer test row exists
    d = np.array([0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 0.1, 0.2])
    x = np.array([1.0, 2.0, 2.0, 3.0, 5.0, 6.0, np.nan, 500.0])
    ds = make_dataset(
        [("d", "numeric", "p", (), d), ("x", "numeric", "p", (), x)],
        months=[5, 15, 25, 35, 45, 55, 65, 70],
    )
    train, test = np.arange(6), np.array([6, 7])
    em_tr, em_te, params = run_pipeline(ds, train, test, n_neighbors=5)
    # median of train values {1,2,2,3,5} = 2, then transformed; the corrupt
    # 500.0 in the other test row can never enter the neighborhood
    t = params.per_column["x"]
    from ensfs.power import apply_yeo_johnson
    want = (apply_yeo_johnson(np.array([2.0]), t.lam)[0] - t.mean) / t.stdev
    np.testing.assert_allclose(em_te.values[0, 1], want, atol=1e-12)
