"""Error, stability, redundancy, prior-overlap and sign metrics."""

import numpy as np
import pytest

from ensfs.exceptions import (
    ConstantColumnWarning,
    DegenerateStabilityWarning,
    EmptySelection,
    LengthMismatch,
)
from ensfs.metrics import (
    elevated_fraction,
    redundancy_rate,
    rmse,
    selection_stability,
    sign_pattern,
    sign_summary,
)


class TestRmse:
    def test_perfect_fit(self):
        assert rmse([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0

    def test_unit_offset(self):
        assert rmse([0.0, 0.0], [1.0, 1.0]) == 1.0

    def test_hand_value(self):
        np.testing.assert_allclose(rmse([1.0, 5.0], [2.0, 3.0]),
                                   np.sqrt(2.5), atol=1e-12)

    def test_symmetry_and_scaling(self, rng):
        y = rng.normal(size=20)
        z = rng.normal(size=20)
        np.testing.assert_allclose(rmse(y, z), rmse(z, y), atol=1e-15)
        np.testing.assert_allclose(rmse(3 * y, 3 * z), 3 * rmse(y, z),
                                   atol=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            rmse([1.0, 2.0], [1.0])


class TestStability:
    def test_identical_sets_are_perfectly_stable(self):
        sets = [[0, 3, 4]] * 5
        res = selection_stability(sets, n_features=10)
        assert res.value == 1.0
        assert not res.degenerate

    def test_disjoint_singletons_clamp_to_zero(self):
        res = selection_stability([[0], [1]], n_features=2)
        assert res.value == 0.0
        np.testing.assert_allclose(res.raw, -1.0, atol=1e-12)

    def test_random_fixed_size_sets_score_near_zero(self):
        rng = np.random.default_rng(12)
        sets = [rng.permutation(20)[:5] for _ in range(1000)]
        res = selection_stability(sets, n_features=20)
        assert abs(res.raw) <= 0.1

    def test_boolean_mask_input(self):
        masks = [np.array([True, False, True]),
                 np.array([True, False, True])]
        assert selection_stability(masks, n_features=3).value == 1.0

    def test_degenerate_all_empty(self):
        with pytest.warns(DegenerateStabilityWarning):
            res = selection_stability([[], []], n_features=4)
        assert res.value == 0.0
        assert res.degenerate
        assert np.isnan(res.raw)

    def test_degenerate_all_full(self):
        with pytest.warns(DegenerateStabilityWarning):
            res = selection_stability([[0, 1], [0, 1]], n_features=2)
        assert res.degenerate

    def test_needs_two_runs(self):
        with pytest.raises(ValueError):
            selection_stability([[0]], n_features=3)

    def test_permutation_invariance(self, rng):
        sets = [rng.permutation(12)[:4] for _ in range(6)]
        a = selection_stability(sets, 12).value
        b = selection_stability(list(reversed(sets)), 12).value
        relabel = rng.permutation(12)
        c = selection_stability([relabel[s] for s in sets], 12).value
        np.testing.assert_allclose([a, b], [a, c], atol=1e-12)


class TestRedundancy:
    def test_singleton_is_zero(self, rng):
        X = rng.normal(size=(30, 4))
        assert redundancy_rate(X, [2]) == 0.0

    def test_perfectly_correlated_pair(self, rng):
        x = rng.normal(size=50)
        X = np.column_stack([x, 2 * x + 5, rng.normal(size=50)])
        np.testing.assert_allclose(redundancy_rate(X, [0, 1]), 1.0,
                                   atol=1e-12)

    def test_independent_columns_low(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(1000, 2))
        assert redundancy_rate(X, [0, 1]) < 0.1

    def test_affine_rescale_invariance(self, rng):
        X = rng.normal(size=(40, 3))
        before = redundancy_rate(X, [0, 1, 2])
        X2 = X.copy()
        X2[:, 1] = -7.0 * X2[:, 1] + 3.0
        np.testing.assert_allclose(redundancy_rate(X2, [0, 1, 2]), before,
                                   atol=1e-12)

    def test_constant_column_skipped(self, rng):
        x = rng.normal(size=30)
        X = np.column_stack([x, np.full(30, 2.0), x * 3])
        with pytest.warns(ConstantColumnWarning):
            rate = redundancy_rate(X, [0, 1, 2])
        np.testing.assert_allclose(rate, 1.0, atol=1e-12)

    def test_all_pairs_skipped_gives_zero(self, rng):
        X = np.column_stack([np.full(10, 1.0), np.full(10, 2.0)])
        with pytest.warns(ConstantColumnWarning):
            assert redundancy_rate(X, [0, 1]) == 0.0


class TestElevatedFraction:
    def test_thirty_percent_case(self):
        selected = set(range(20))
        elevated = set(range(6)) | {100, 101}
        assert elevated_fraction(selected, elevated) == 0.30

    def test_subset_is_one(self):
        assert elevated_fraction({1, 2}, {0, 1, 2, 3}) == 1.0

    def test_disjoint_is_zero(self):
        assert elevated_fraction({1, 2}, {5, 6}) == 0.0

    def test_empty_selection_rejected(self):
        with pytest.raises(EmptySelection):
            elevated_fraction(set(), {1})


class TestSigns:
    @pytest.mark.parametrize("coefs,want", [
        ((0.2, 0.5), "++"),
        ((0.2, -0.1, 0.3), "+"),
        ((0.2, -0.2), "even"),
        ((-0.4, -0.1, -0.9), "--"),
        ((-0.4, 0.1, -0.9), "-"),
        ((), ""),
    ])
    def test_patterns(self, coefs, want):
        assert sign_pattern(coefs) == want

    def test_summary_maps_names(self):
        got = sign_summary({"a": [0.1, 0.2], "b": [], "c": [-1.0, 1.0]})
        assert got == {"a": "++", "b": "", "c": "even"}
