"""Domain types for clustering distributions in Wasserstein space.

Nothing here is persisted; the module keeps the name because it holds the
choices enums and value objects every other module is written against.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from django.db import models
from numpy.typing import ArrayLike, NDArray

from .exceptions import (
    DimensionMismatchError,
    GridMismatchError,
    InputError,
    InvalidConfigError,
    MixedGeometryError,
)
from .linalg import FloatArray, SpdMatrix

# Tolerance on Σ w = 1 for caller-supplied probability vectors.
WEIGHT_SUM_TOL = 1e-9
# Quantile values may dip by this much (relative) before the grid is rejected.
_MONOTONE_TOL = 1e-12
IntArray = NDArray[np.int64]

NOISE_LABEL = -1
MAX_SEED = 2**64 - 1


class Space(models.TextChoices):
    """The two supported W2 geometries."""

    GAUSSIAN = "gaussian", "Gaussian / location-scatter"
    QUANTILE1D = "quantile1d", "Univariate quantile grid"


class Weighting(models.TextChoices):
    """How unit reports are weighted in the meta-sample."""

    EQUAL = "equal", "Equal"
    SAMPLE_SIZE = "sample_size", "Proportional to sample size"


class SplitMode(models.TextChoices):
    """How a sample is divided among processing units."""

    PARTITION = "partition", "Partition"
    SUBSAMPLE = "subsample", "Subsample without replacement"
    BOOTSTRAP = "bootstrap", "Resample with replacement"


def _readonly(values: ArrayLike) -> FloatArray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GaussianDistribution:
    """A point (mean, covariance) of a location-scatter family."""

    mean: FloatArray
    cov: SpdMatrix
    family_tag: str | None = None

    def __post_init__(self) -> None:
        mean = _readonly(self.mean)
        if mean.ndim != 1 or mean.size < 1:
            raise InputError(f"mean must be a non-empty vector, got shape {mean.shape}")
        if not np.all(np.isfinite(mean)):
            raise InputError("mean entries must be finite")
        if mean.size != self.cov.dim:
            raise DimensionMismatchError(
                f"mean has length {mean.size} but covariance is "
                f"{self.cov.dim}x{self.cov.dim}"
            )
        object.__setattr__(self, "mean", mean)

    @classmethod
    def from_arrays(
        cls, mean: ArrayLike, cov: ArrayLike, family_tag: str | None = None
    ) -> GaussianDistribution:
        return cls(_readonly(mean), SpdMatrix.from_array(cov), family_tag)

    @property
    def dim(self) -> int:
        return int(self.mean.size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaussianDistribution):
            return NotImplemented
        return bool(np.array_equal(self.mean, other.mean)) and self.cov == other.cov

    def __repr__(self) -> str:
        return (
            f"GaussianDistribution(mean={self.mean.tolist()}, "
            f"cov={self.cov.entries.tolist()})"
        )


@dataclass(frozen=True, eq=False)
class QuantileFunction:
    """A univariate law sampled at the midpoint levels t_j = (j + 0.5) / G."""

    values: FloatArray

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise InputError("quantile values must be a non-empty vector")
        if not np.all(np.isfinite(values)):
            raise InputError("quantile values must be finite")
        steps = np.diff(values)
        scale = 1.0 + float(np.max(np.abs(values)))
        if steps.size and float(steps.min()) < -_MONOTONE_TOL * scale:
            raise InputError("quantile values must be non-decreasing")
        values = np.maximum.accumulate(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def grid_size(self) -> int:
        return int(self.values.size)

    @property
    def levels(self) -> FloatArray:
        return midpoint_levels(self.grid_size)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, QuantileFunction):
            return NotImplemented
        return bool(np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"QuantileFunction(grid_size={self.grid_size})"


Distribution = GaussianDistribution | QuantileFunction


def midpoint_levels(grid_size: int) -> FloatArray:
    return (np.arange(grid_size, dtype=np.float64) + 0.5) / grid_size


def space_of(dist: Distribution) -> Space:
    if isinstance(dist, GaussianDistribution):
        return Space.GAUSSIAN
    if isinstance(dist, QuantileFunction):
        return Space.QUANTILE1D
    raise MixedGeometryError(f"unsupported distribution type {type(dist).__name__}")


def shape_of(dist: Distribution) -> int:
    """Dimension of a Gaussian or grid size of a quantile function."""
    return dist.dim if isinstance(dist, GaussianDistribution) else dist.grid_size


def check_compatible(items: Iterable[Distribution]) -> Space:
    """Return the shared space of ``items``; raise if geometries or shapes mix."""
    space: Space | None = None
    size = 0
    for dist in items:
        current = space_of(dist)
        if space is None:
            space, size = current, shape_of(dist)
            continue
        if current != space:
            raise MixedGeometryError(f"cannot mix {space} and {current} distributions")
        if shape_of(dist) != size:
            if space == Space.GAUSSIAN:
                raise DimensionMismatchError(
                    f"dimension {shape_of(dist)} does not match {size}"
                )
            raise GridMismatchError(f"grid size {shape_of(dist)} does not match {size}")
    if space is None:
        raise InputError("at least one distribution is required")
    return space


@dataclass(frozen=True, eq=False)
class WeightedDistributionSet:
    """A finitely supported μ: distributions P_i with probabilities w_i."""

    items: tuple[Distribution, ...]
    weights: FloatArray
    space: Space = field(init=False)

    def __post_init__(self) -> None:
        items = tuple(self.items)
        space = check_compatible(items)
        weights = np.array(self.weights, dtype=np.float64)
        if weights.shape != (len(items),):
            raise InputError(
                f"expected {len(items)} weights, got shape {weights.shape}"
            )
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InputError("weights must be finite and non-negative")
        total = float(weights.sum())
        if total <= 0:
            raise InputError("weights must have a positive sum")
        weights = weights / total
        weights.setflags(write=False)
        object.__setattr__(self, "items", items)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "space", space)

    @classmethod
    def uniform(cls, items: Sequence[Distribution]) -> WeightedDistributionSet:
        return cls(tuple(items), np.full(len(items), 1.0 / max(len(items), 1)))

    def __len__(self) -> int:
        return len(self.items)

    def positive_indices(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w > 0]

    def restricted(
        self, indices: Sequence[int], weights: ArrayLike
    ) -> WeightedDistributionSet:
        """The sub-measure on ``indices`` with the given (renormalized) weights."""
        return WeightedDistributionSet(tuple(self.items[i] for i in indices), weights)


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of the trimmed k-barycenter solver."""

    k: int
    alpha: float
    n_starts: int = 10
    max_iterations: int = 200
    seed: int = 0
    explicit_starts: tuple[tuple[Distribution, ...], ...] = ()

    def __post_init__(self) -> None:
        if self.k < 1:
            raise InvalidConfigError(f"k must be positive, got {self.k}")
        if not 0.0 <= self.alpha < 1.0:
            raise InvalidConfigError(f"alpha must lie in [0, 1), got {self.alpha}")
        if self.n_starts < 0 or (self.n_starts == 0 and not self.explicit_starts):
            raise InvalidConfigError("at least one start is required")
        if self.max_iterations < 1:
            raise InvalidConfigError("max_iterations must be positive")
        if not 0 <= self.seed <= MAX_SEED:
            raise InvalidConfigError("seed must be a 64-bit unsigned integer")
        for start in self.explicit_starts:
            if len(start) != self.k:
                raise InvalidConfigError(
                    f"explicit start has {len(start)} centers, expected {self.k}"
                )


@dataclass(frozen=True)
class StartSummary:
    """How one initialization of the solver ended."""

    start_index: int
    iterations: int
    objective: float
    converged: bool
    explicit: bool


@dataclass(frozen=True, eq=False)
class TrimSolution:
    """A trimmed k-barycenter with its trimming function and diagnostics.

    ``kept_mass[i]`` is δ_i ∈ [0, w_i]; ``assignments[i]`` is the 0-based
    cluster of item i, or None when it is fully trimmed.
    """

    centers: tuple[Distribution, ...]
    kept_mass: FloatArray
    assignments: tuple[int | None, ...]
    distances_sq: FloatArray
    objective: float
    trim_radius: float
    alpha: float
    iterations: int
    start_index: int
    trace: tuple[float, ...] = ()
    converged: bool = True
    starts: tuple[StartSummary, ...] = ()

    @property
    def k(self) -> int:
        return len(self.centers)

    @property
    def normalized_weights(self) -> FloatArray:
        result: FloatArray = self.kept_mass / (1.0 - self.alpha)
        return result

    def trimmed_indices(self, weights: FloatArray) -> list[int]:
        """Items that lost more than half of their weight."""
        return [
            i for i, w in enumerate(weights) if w > 0 and self.kept_mass[i] <= w / 2
        ]


@dataclass(frozen=True)
class VariationBreakdown:
    """Trimmed k-variation and its split over clusters."""

    total: float
    per_cluster: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class UnitReport:
    """The k-feature (Gaussians and weights) produced by one processing unit."""

    unit_id: str
    features: tuple[GaussianDistribution, ...]
    weights: FloatArray
    sample_size: int

    def __post_init__(self) -> None:
        features = tuple(self.features)
        if not features:
            raise InputError(f"unit {self.unit_id!r} reports no features")
        check_compatible(features)
        weights = _readonly(self.weights)
        if weights.shape != (len(features),):
            raise InputError(
                f"unit {self.unit_id!r} reports {weights.size} weights "
                f"for {len(features)} features"
            )
        if np.any(weights < 0) or abs(float(weights.sum()) - 1.0) > WEIGHT_SUM_TOL:
            raise InputError(
                f"unit {self.unit_id!r} weights must be non-negative and sum to 1"
            )
        if self.sample_size < 1:
            raise InputError(f"unit {self.unit_id!r} sample size must be positive")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "weights", weights)

    @property
    def k(self) -> int:
        return len(self.features)

    @property
    def dim(self) -> int:
        return self.features[0].dim


@dataclass(frozen=True)
class TrimmedFeature:
    """A meta-sample item that lost weight in the aggregation."""

    unit_id: str
    feature_index: int
    weight: float
    kept_mass: float


@dataclass(frozen=True, eq=False)
class ConsensusRecord:
    """The part of an aggregation that is written to file."""

    consensus: tuple[GaussianDistribution, ...]
    agg_weights: FloatArray
    trim_report: tuple[TrimmedFeature, ...]
    objective: float
    alpha: float


@dataclass(frozen=True, eq=False)
class AggregationResult:
    """Consensus k-feature of several unit reports."""

    consensus: tuple[GaussianDistribution, ...]
    agg_weights: FloatArray
    trim_report: tuple[TrimmedFeature, ...]
    objective: float
    solution: TrimSolution
    meta_sample: WeightedDistributionSet

    @property
    def record(self) -> ConsensusRecord:
        return ConsensusRecord(
            self.consensus,
            self.agg_weights,
            self.trim_report,
            self.objective,
            self.solution.alpha,
        )


@dataclass(frozen=True)
class BoundParams:
    """Inputs of the aggregation failure bound."""

    k: int
    alpha: float
    m: int
    eta: float
    r_eta: float
    min_separation: float

    @property
    def H(self) -> float:  # noqa: N802
        slack = 1.0 - (self.k + 1) * self.alpha
        if slack <= 0:
            return math.inf
        return 2.0 * (1.0 + self.k * math.sqrt((1.0 - self.alpha) / slack))


@dataclass(frozen=True)
class FailureBound:
    """Probability bound, guaranteed radius and separation check."""

    probability: float
    radius: float
    separated: bool


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """Gaussian mixture with optional noise component and padding coordinates."""

    components: tuple[tuple[GaussianDistribution, float], ...]
    noise: tuple[GaussianDistribution, float] | None = None
    extra_noise_dims: int = 0

    def __post_init__(self) -> None:
        parts = [dist for dist, _ in self.components]
        if self.noise is not None:
            parts.append(self.noise[0])
        check_compatible(parts)
        proportions = self.proportions
        total = float(proportions.sum())
        if np.any(proportions < 0) or abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise InputError("mixture proportions must be non-negative and sum to 1")
        if self.extra_noise_dims < 0:
            raise InputError("extra_noise_dims cannot be negative")

    @property
    def proportions(self) -> FloatArray:
        values = [p for _, p in self.components]
        if self.noise is not None:
            values.append(self.noise[1])
        return np.array(values, dtype=np.float64)

    @property
    def dim(self) -> int:
        if self.components:
            return self.components[0][0].dim + self.extra_noise_dims
        assert self.noise is not None
        return self.noise[0].dim + self.extra_noise_dims


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    """Observations in rows; ``labels`` record provenance for evaluation only."""

    data: FloatArray
    labels: IntArray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self) -> None:
        data = np.array(self.data, dtype=np.float64)
        if data.ndim == 1:
            data = data[:, None]
        if data.ndim != 2:
            raise InputError(f"sample must be a 2-D array, got shape {data.shape}")
        labels = np.array(self.labels, dtype=np.int64)
        if labels.size == 0:
            labels = np.full(data.shape[0], NOISE_LABEL, dtype=np.int64)
        if labels.shape != (data.shape[0],):
            raise InputError("labels must match the number of rows")
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return int(self.data.shape[0])

    @property
    def dim(self) -> int:
        return int(self.data.shape[1])

    def take(self, rows: ArrayLike) -> SampleMatrix:
        index = np.asarray(rows, dtype=np.int64)
        return SampleMatrix(self.data[index], self.labels[index])
