"""Tests for the failure-bound experiment."""

import numpy as np

from trimbary.aggregation import hausdorff_distance
from trimbary.experiments import (
    BoundExperiment,
    bound_experiment,
    planted_bound_params,
    planted_features,
    planted_reports,
)
from trimbary.models import FailureBound


class TestPlantedReports:
    """Tests for the synthetic unit reports."""

    def test_planted_features(self) -> None:
        truth = planted_features(3, separation=5.0)
        assert [float(g.mean[0]) for g in truth] == [0.0, 5.0, 10.0]

    def test_clean_units_stay_close(self) -> None:
        truth = planted_features(3)
        rng = np.random.default_rng(0)
        reports, corrupted = planted_reports(truth, 50, 1.0, 0.0, rng)
        assert not any(corrupted)
        for report in reports:
            assert hausdorff_distance(report.features, truth) <= 1.0

    def test_corrupted_units_are_far(self) -> None:
        truth = planted_features(2)
        rng = np.random.default_rng(1)
        reports, corrupted = planted_reports(truth, 20, 1.0, 1.0, rng)
        assert all(corrupted)
        for report in reports:
            assert hausdorff_distance(report.features, truth) > 10.0


class TestBoundExperiment:
    """Tests for bound_experiment."""

    def test_frequency_against_bound(self) -> None:
        bound = FailureBound(0.01, 1.0, True)
        assert BoundExperiment(100, 5, bound).within_bound
        assert not BoundExperiment(100, 20, bound).within_bound
        assert BoundExperiment(100, 5, bound).frequency == 0.05

    def test_small_run(self) -> None:
        experiment = bound_experiment(2, 0.25, 20, 4, seed=3)
        assert experiment.replicas == 4
        assert experiment.bound.probability == 1.0
        assert experiment.within_bound

    def test_independent_of_worker_count(self) -> None:
        serial = bound_experiment(2, 0.2, 30, 3, seed=5, max_workers=1)
        threaded = bound_experiment(2, 0.2, 30, 3, seed=5, max_workers=3)
        assert serial == threaded

    def test_bound_params_use_radius_as_distance(self) -> None:
        params = planted_bound_params(3, 0.1, 200, 10.0, 1.5)
        assert params.eta == 1.5
        assert params.r_eta == 1.5
        assert params.min_separation == 10.0
        assert (params.k, params.alpha, params.m) == (3, 0.1, 200)
