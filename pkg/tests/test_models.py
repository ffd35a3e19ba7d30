"""Tests for trimbary value types and the worker-pool helpers."""

import math

import numpy as np
import pytest
from pytest_django.fixtures import SettingsWrapper

from tests.factories import point_mass, unit_report, univariate
from trimbary.exceptions import (
    DimensionMismatchError,
    GridMismatchError,
    InputError,
    MixedGeometryError,
)
from trimbary.models import (
    NOISE_LABEL,
    BoundParams,
    GaussianDistribution,
    MixtureSpec,
    QuantileFunction,
    SampleMatrix,
    Space,
    UnitReport,
    WeightedDistributionSet,
    check_compatible,
    midpoint_levels,
)
from trimbary.parallel import derived_rng, ordered_map, worker_count


class TestGaussianDistribution:
    """Tests for GaussianDistribution."""

    def test_from_arrays(self) -> None:
        dist = GaussianDistribution.from_arrays([1.0, 2.0], [[2.0, 0.5], [0.5, 1.0]])
        assert dist.dim == 2
        assert not dist.mean.flags.writeable

    def test_equality(self) -> None:
        assert univariate(1.0, 2.0) == univariate(1.0, 2.0)
        assert univariate(1.0, 2.0) != univariate(1.0, 3.0)

    def test_rejects_non_finite_mean(self) -> None:
        with pytest.raises(InputError, match="finite"):
            GaussianDistribution.from_arrays([math.nan], [[1.0]])

    def test_rejects_shape_mismatch(self) -> None:
        with pytest.raises(DimensionMismatchError):
            GaussianDistribution.from_arrays([0.0, 0.0], [[1.0]])


class TestQuantileFunction:
    """Tests for QuantileFunction."""

    def test_levels(self) -> None:
        grid = QuantileFunction(np.array([0.0, 1.0, 2.0, 3.0]))
        np.testing.assert_allclose(grid.levels, [0.125, 0.375, 0.625, 0.875])
        np.testing.assert_allclose(midpoint_levels(2), [0.25, 0.75])

    def test_rounding_noise_is_repaired(self) -> None:
        grid = QuantileFunction(np.array([0.0, 1.0, 1.0 - 1e-15, 2.0]))
        assert np.all(np.diff(grid.values) >= 0)

    def test_rejects_empty(self) -> None:
        with pytest.raises(InputError):
            QuantileFunction(np.array([]))


class TestCheckCompatible:
    """Tests for check_compatible."""

    def test_shared_space(self) -> None:
        assert check_compatible([point_mass(0.0), point_mass(1.0)]) == Space.QUANTILE1D
        assert check_compatible([univariate(0.0)]) == Space.GAUSSIAN

    def test_mixed(self) -> None:
        with pytest.raises(MixedGeometryError):
            check_compatible([univariate(0.0), point_mass(0.0)])

    def test_grid_sizes(self) -> None:
        with pytest.raises(GridMismatchError):
            check_compatible([point_mass(0.0), QuantileFunction(np.zeros(2))])

    def test_empty(self) -> None:
        with pytest.raises(InputError, match="at least one"):
            check_compatible([])


class TestWeightedDistributionSet:
    """Tests for WeightedDistributionSet."""

    def test_normalizes_weights(self) -> None:
        dset = WeightedDistributionSet(
            (point_mass(0.0), point_mass(1.0)), np.array([1.0, 3.0])
        )
        np.testing.assert_allclose(dset.weights, [0.25, 0.75])
        assert dset.space == Space.QUANTILE1D

    def test_positive_indices(self) -> None:
        dset = WeightedDistributionSet(
            (point_mass(0.0), point_mass(1.0), point_mass(2.0)),
            np.array([0.5, 0.0, 0.5]),
        )
        assert dset.positive_indices() == [0, 2]
        sub = dset.restricted([0, 2], [1.0, 1.0])
        assert len(sub) == 2
        np.testing.assert_allclose(sub.weights, [0.5, 0.5])

    @pytest.mark.parametrize(
        "weights", [[1.0], [-1.0, 2.0], [0.0, 0.0], [math.inf, 1.0]]
    )
    def test_rejects_bad_weights(self, weights: list[float]) -> None:
        with pytest.raises(InputError):
            WeightedDistributionSet((point_mass(0.0), point_mass(1.0)), weights)


class TestUnitReport:
    """Tests for UnitReport."""

    def test_properties(self) -> None:
        report = unit_report("a", [0.0, 5.0])
        assert report.k == 2
        assert report.dim == 1

    def test_rejects_weight_sum(self) -> None:
        with pytest.raises(InputError, match="sum to 1"):
            UnitReport("a", (univariate(0.0),), np.array([0.5]), 10)

    def test_rejects_sample_size(self) -> None:
        with pytest.raises(InputError, match="sample size"):
            UnitReport("a", (univariate(0.0),), np.array([1.0]), 0)

    def test_rejects_no_features(self) -> None:
        with pytest.raises(InputError, match="no features"):
            UnitReport("a", (), np.array([]), 10)


class TestBoundParams:
    """Tests for the H constant of BoundParams."""

    def test_value(self) -> None:
        params = BoundParams(3, 0.1, 200, 0.05, 1.0, 10.0)
        assert params.H == pytest.approx(2 * (1 + 3 * math.sqrt(0.9 / 0.6)))

    def test_infinite_without_slack(self) -> None:
        assert BoundParams(3, 0.25, 200, 0.05, 1.0, 10.0).H == math.inf


class TestMixtureSpec:
    """Tests for MixtureSpec and SampleMatrix."""

    def test_proportions(self) -> None:
        spec = MixtureSpec(((univariate(0.0), 0.9),), (univariate(0.0, 100.0), 0.1))
        np.testing.assert_allclose(spec.proportions, [0.9, 0.1])
        assert spec.dim == 1

    def test_rejects_proportions(self) -> None:
        with pytest.raises(InputError, match="sum to 1"):
            MixtureSpec(((univariate(0.0), 0.5),))

    def test_sample_defaults_to_noise_labels(self) -> None:
        sample = SampleMatrix(np.zeros(3))
        assert sample.dim == 1
        assert sample.labels.tolist() == [NOISE_LABEL] * 3
        assert sample.take([2, 0]).n == 2


class TestParallel:
    """Tests for the worker-pool helpers."""

    def test_worker_count_from_settings(self, settings: SettingsWrapper) -> None:
        settings.TRIMBARY_THREADS = 3
        assert worker_count() == 3
        assert worker_count(5) == 5

    def test_worker_count_defaults_to_cpus(self, settings: SettingsWrapper) -> None:
        settings.TRIMBARY_THREADS = 0
        assert worker_count() >= 1

    def test_ordered_map_keeps_order(self) -> None:
        assert ordered_map(lambda x: x * x, list(range(20)), max_workers=4) == [
            x * x for x in range(20)
        ]

    def test_derived_rng_streams(self) -> None:
        a = derived_rng(7, 1).random(3)
        np.testing.assert_array_equal(a, derived_rng(7, 1).random(3))
        assert not np.array_equal(a, derived_rng(7, 2).random(3))
