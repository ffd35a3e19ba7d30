"""Shared test fixtures for trimbary tests."""

from collections.abc import Callable, Sequence

import numpy as np
import pytest

from tests.factories import gaussian, point_mass, unit_report, univariate
from trimbary.datagen import gaussian_quantiles
from trimbary.models import (
    GaussianDistribution,
    QuantileFunction,
    UnitReport,
    WeightedDistributionSet,
)

PointMassFactory = Callable[..., WeightedDistributionSet]
GaussianSampler = Callable[[np.random.Generator, int, int], list[GaussianDistribution]]


@pytest.fixture
def point_masses() -> PointMassFactory:
    """Build a weighted set of 1D point masses (uniform weights by default)."""

    def build(
        xs: Sequence[float], weights: Sequence[float] | None = None
    ) -> WeightedDistributionSet:
        items = tuple(point_mass(x) for x in xs)
        if weights is None:
            return WeightedDistributionSet.uniform(items)
        return WeightedDistributionSet(items, np.array(weights, dtype=float))

    return build


@pytest.fixture
def three_points(point_masses: PointMassFactory) -> WeightedDistributionSet:
    """Point masses at 0, 1 and 10 with equal weights."""
    return point_masses([0.0, 1.0, 10.0])


@pytest.fixture
def gaussian_pair() -> tuple[GaussianDistribution, GaussianDistribution]:
    """N(0, I) and N((3, 4), 4I): commuting covariances, W2 = √27."""
    return (
        gaussian([0.0, 0.0], [[1.0, 0.0], [0.0, 1.0]]),
        gaussian([3.0, 4.0], [[4.0, 0.0], [0.0, 4.0]]),
    )


@pytest.fixture
def random_gaussians() -> GaussianSampler:
    """Draw r Gaussians of dimension d with well-conditioned random covariances."""

    def draw(rng: np.random.Generator, r: int, d: int) -> list[GaussianDistribution]:
        items = []
        for _ in range(r):
            factor = rng.normal(size=(d, d))
            cov = factor @ factor.T + 0.5 * np.eye(d)
            mean = 3.0 * rng.normal(size=d)
            items.append(GaussianDistribution.from_arrays(mean, cov))
        return items

    return draw


@pytest.fixture
def clean_reports() -> list[UnitReport]:
    """Ten units reporting the same three well-separated 1D features."""
    return [unit_report(f"unit-{j}", [0.0, 10.0, 20.0]) for j in range(10)]


@pytest.fixture
def corrupted_reports(clean_reports: list[UnitReport]) -> list[UnitReport]:
    """The clean reports with the last unit replaced by far-away features."""
    return [*clean_reports[:-1], unit_report("unit-9", [200.0, 300.0, 400.0])]


@pytest.fixture
def sector_profiles() -> WeightedDistributionSet:
    """36 quantile functions: four planted groups of profiles and two outliers.

    Groups sit at means 0, 10, 20 and 30 with small jitter and spreads between
    1 and 1.3; item 34 sits at -60 and item 35 at 80.
    """
    rng = np.random.default_rng(7)
    items: list[QuantileFunction] = []
    for group, size in enumerate((9, 9, 8, 8)):
        for _ in range(size):
            mean = 10.0 * group + rng.uniform(-0.5, 0.5)
            std = rng.uniform(1.0, 1.3)
            items.append(gaussian_quantiles(univariate(mean, std**2), 200))
    items.append(gaussian_quantiles(univariate(-60.0), 200))
    items.append(gaussian_quantiles(univariate(80.0), 200))
    return WeightedDistributionSet.uniform(items)
