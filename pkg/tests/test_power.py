"""Power transform and standardization."""

import numpy as np
import pytest
import scipy.stats

from ensfs.exceptions import DegenerateColumn, ZeroVariance
from ensfs.power import (
    apply_yeo_johnson,
    fit_standardization,
    fit_yeo_johnson,
    standardize,
    yeo_johnson_loglik,
)


def test_identity_at_unit_lambda():
    x = np.array([-3.0, -0.5, 0.0, 1.0, 2.5, 100.0])
    np.testing.assert_allclose(apply_yeo_johnson(x, 1.0), x, atol=1e-12)


def test_log_branch_at_zero_lambda():
    assert apply_yeo_johnson(np.array([0.0]), 0.0)[0] == 0.0
    np.testing.assert_allclose(apply_yeo_johnson(np.array([1.0]), 0.0)[0],
                               np.log(2.0), atol=1e-12)


def test_negative_branch_at_lambda_two():
    got = apply_yeo_johnson(np.array([-1.0]), 2.0)[0]
    np.testing.assert_allclose(got, -np.log(2.0), atol=1e-12)


@pytest.mark.parametrize("lam,x", [(0.0, 0.7), (0.0, 3.2), (2.0, -0.4), (2.0, -2.0)])
def test_continuity_at_branch_points(lam, x):
    eps = 1e-6
    at = apply_yeo_johnson(np.array([x]), lam)[0]
    near = apply_yeo_johnson(np.array([x]), lam + eps)[0]
    assert abs(near - at) < 1e-4


def test_monotone_in_x():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        lam = rng.uniform(-3, 3)
        a, b = np.sort(rng.normal(scale=3, size=2))
        if a == b:
            continue
        fa, fb = apply_yeo_johnson(np.array([a, b]), lam)
        assert fa < fb


def test_fitted_lambda_matches_grid_oracle():
    rng = np.random.default_rng(3)
    lam_grid = np.linspace(-5, 5, 2001)
    for _ in range(20):
        x = rng.gamma(shape=rng.uniform(0.5, 4.0), scale=1.0, size=120)
        x = x - x.mean() * rng.uniform(0, 1)
        lam_hat = fit_yeo_johnson(x)
        ll = np.array([yeo_johnson_loglik(x, l) for l in lam_grid])
        lam_star = lam_grid[int(np.argmax(ll))]
        assert abs(lam_hat - lam_star) <= 0.25


def test_fit_near_one_on_normal_sample():
    rng = np.random.default_rng(5)
    x = rng.normal(size=200)
    assert abs(fit_yeo_johnson(x) - 1.0) <= 0.25


def test_fit_matches_scipy_mle_on_skewed_samples():
    rng = np.random.default_rng(6)
    for x in (np.exp(rng.normal(size=200)),
              rng.gamma(2.0, 1.5, size=200),
              -rng.gamma(3.0, 1.0, size=200) + 1.0):
        assert abs(fit_yeo_johnson(x) - scipy.stats.yeojohnson(x)[1]) <= 0.05


def test_two_point_column_is_well_posed():
    lam = fit_yeo_johnson(np.array([0.0, 1.0] * 10))
    assert np.isfinite(lam)
    assert -5.0 <= lam <= 5.0


def test_constant_column_rejected():
    with pytest.raises(DegenerateColumn):
        fit_yeo_johnson(np.full(10, 3.3))


def test_standardize_worked_example():
    mean, sd = fit_standardization(np.array([1.0, 2.0, 3.0]))
    got = standardize(np.array([1.0, 2.0, 3.0]), mean, sd)
    np.testing.assert_allclose(got, [-1.2247, 0.0, 1.2247], atol=5e-5)


def test_standardize_shift_invariance():
    rng = np.random.default_rng(2)
    x = rng.normal(size=30)
    m0, s0 = fit_standardization(x)
    m1, s1 = fit_standardization(x + 17.0)
    np.testing.assert_allclose(standardize(x, m0, s0),
                               standardize(x + 17.0, m1, s1), atol=1e-12)


def test_value_at_mean_maps_to_zero():
    m, s = fit_standardization(np.array([2.0, 4.0, 6.0]))
    assert standardize(np.array([4.0]), m, s)[0] == 0.0


def test_zero_variance_rejected():
    with pytest.raises(ZeroVariance):
        fit_standardization(np.full(5, 1.0))
