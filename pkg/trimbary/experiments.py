"""Seeded Monte Carlo check of the aggregation failure bound."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .aggregation import aggregate, failure_bound, hausdorff_distance
from .models import BoundParams, FailureBound, GaussianDistribution, UnitReport
from .parallel import derived_rng, ordered_map

logger = logging.getLogger(__name__)


def planted_features(
    k: int, separation: float = 10.0
) -> tuple[GaussianDistribution, ...]:
    """k unit-variance univariate Gaussians with means 0, s, 2s, ..."""
    return tuple(
        GaussianDistribution.from_arrays([separation * i], [[1.0]]) for i in range(k)
    )


def planted_reports(
    truth: Sequence[GaussianDistribution],
    m: int,
    radius: float,
    corruption: float,
    rng: np.random.Generator,
) -> tuple[list[UnitReport], list[bool]]:
    """m unit reports around univariate planted features.

    A clean unit shifts every mean by an independent U(-radius, radius) draw,
    so its features stay within W2 ``radius`` of the truth. With probability
    ``corruption`` a unit is replaced by features with means far outside the
    planted range.
    """
    k = len(truth)
    means = np.array([float(g.mean[0]) for g in truth])
    span = float(means.max() - means.min()) + 1.0
    reports: list[UnitReport] = []
    corrupted: list[bool] = []
    for unit in range(m):
        bad = bool(rng.random() < corruption)
        if bad:
            shifted = means.max() + span * rng.uniform(5.0, 10.0, size=k)
        else:
            shifted = means + rng.uniform(-radius, radius, size=k)
        features = tuple(
            GaussianDistribution.from_arrays([mu], g.cov.entries)
            for mu, g in zip(shifted, truth, strict=True)
        )
        reports.append(UnitReport(f"unit-{unit}", features, np.full(k, 1.0 / k), 1))
        corrupted.append(bad)
    return reports, corrupted


def planted_bound_params(
    k: int, alpha: float, m: int, separation: float, radius: float
) -> BoundParams:
    """Bound inputs for planted reports whose clean units stay within ``radius``.

    A unit misses the truth by more than ``radius`` only when corrupted, so the
    radius function is the identity and η is the radius itself.
    """
    return BoundParams(k, alpha, m, radius, radius, separation)


@dataclass(frozen=True)
class BoundExperiment:
    """Observed failure frequency next to the theoretical bound."""

    replicas: int
    failures: int
    bound: FailureBound

    @property
    def frequency(self) -> float:
        return self.failures / self.replicas

    @property
    def standard_error(self) -> float:
        p = self.frequency
        return math.sqrt(max(p * (1.0 - p), 0.0) / self.replicas)

    @property
    def within_bound(self) -> bool:
        """Frequency at most the bound plus three Monte Carlo standard errors."""
        return self.frequency <= self.bound.probability + 3.0 * self.standard_error


def bound_experiment(
    k: int,
    alpha: float,
    m: int,
    replicas: int,
    *,
    separation: float = 10.0,
    radius: float = 1.0,
    seed: int = 0,
    unit_starts: int = 5,
    max_workers: int | None = None,
) -> BoundExperiment:
    """Count replicas whose consensus lands farther than r·H/2 from the truth.

    Units are corrupted with probability α/4, so each unit misses the truth
    by more than ``radius`` with probability below α/2.
    """
    truth = planted_features(k, separation)
    bound = failure_bound(planted_bound_params(k, alpha, m, separation, radius))

    def replicate(replica: int) -> bool:
        rng = derived_rng(seed, replica)
        reports, _ = planted_reports(truth, m, radius, alpha / 4.0, rng)
        result = aggregate(reports, k, alpha, unit_starts=unit_starts, max_workers=1)
        return hausdorff_distance(result.consensus, truth) > bound.radius

    outcomes = ordered_map(replicate, list(range(replicas)), max_workers)
    failures = sum(outcomes)
    logger.info(
        "Bound experiment: %d of %d replicas failed, bound %.6g",
        failures,
        replicas,
        bound.probability,
    )
    return BoundExperiment(replicas, failures, bound)
