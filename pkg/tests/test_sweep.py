"""Tests for the (k, alpha) stability sweep."""

import numpy as np
import pytest

from tests.conftest import PointMassFactory
from trimbary.exceptions import InvalidConfigError
from trimbary.models import WeightedDistributionSet
from trimbary.sweep import trim_sweep


class TestTrimSweep:
    """Tests for trim_sweep."""

    @pytest.fixture
    def with_outlier(self, point_masses: PointMassFactory) -> WeightedDistributionSet:
        return point_masses([0.0, 0.1, 10.0, 10.1, 100.0])

    def test_rows_and_counts(self, with_outlier: WeightedDistributionSet) -> None:
        result = trim_sweep(with_outlier, [2], [0.0, 0.2])
        assert [(row.k, row.alpha) for row in result.rows] == [(2, 0.0), (2, 0.2)]
        first, second = result.rows
        assert first.n_trimmed == 0
        assert first.center_displacement is None
        assert second.trimmed_items == (4,)
        assert second.trimmed_mass == pytest.approx(0.2)
        assert second.center_displacement is not None
        assert second.center_displacement > 0
        assert result.trim_counts.tolist() == [0, 0, 0, 0, 1]
        assert result.most_trimmed(1) == [4]

    def test_objective_falls_with_alpha(
        self, with_outlier: WeightedDistributionSet
    ) -> None:
        result = trim_sweep(with_outlier, [1, 2], [0.0, 0.2, 0.4], n_starts=20)
        for k in (1, 2):
            objectives = [row.objective for row in result.rows if row.k == k]
            assert objectives == sorted(objectives, reverse=True)

    def test_most_trimmed_ties_in_item_order(
        self, with_outlier: WeightedDistributionSet
    ) -> None:
        result = trim_sweep(with_outlier, [2], [0.0])
        assert result.most_trimmed(2) == [0, 1]
        np.testing.assert_array_equal(result.trim_counts, np.zeros(5))

    def test_empty_range(self, with_outlier: WeightedDistributionSet) -> None:
        with pytest.raises(InvalidConfigError):
            trim_sweep(with_outlier, [], [0.1])
