"""Sample simulation, the per-unit clustering engine and quantile extraction.

The engine is a trimmed k-means with k-means++ seeding and several starts,
optionally followed by a few trimmed EM steps on the Gaussian log-density.
It has no eigenvalue-ratio constraints.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from numpy.typing import ArrayLike, NDArray
from scipy.special import logsumexp
from scipy.stats import multivariate_normal, norm

from .exceptions import (
    EmptySampleError,
    FitError,
    InfeasibleSplitError,
    InputError,
    InvalidConfigError,
)
from .linalg import FloatArray, sqrtm_psd
from .models import (
    NOISE_LABEL,
    GaussianDistribution,
    IntArray,
    MixtureSpec,
    QuantileFunction,
    SampleMatrix,
    SplitMode,
    UnitReport,
    midpoint_levels,
)
from .parallel import derived_rng, ordered_map

logger = logging.getLogger(__name__)

BoolArray = NDArray[np.bool_]

# Added to covariances before evaluating Gaussian log-densities.
DENSITY_RIDGE = 1e-6
DEFAULT_GRID_SIZE = 1000


def simulate_mixture(spec: MixtureSpec, n: int, seed: int = 0) -> SampleMatrix:
    """Draw n rows: multinomial component counts, then each component's rows.

    Rows are shuffled so that labels carry no ordering. Padding coordinates
    are independent standard normals appended after the component draws.
    """
    if n < 0:
        raise InputError(f"sample size cannot be negative, got {n}")
    rng = np.random.default_rng(seed)
    parts = [dist for dist, _ in spec.components]
    labels = list(range(len(parts)))
    if spec.noise is not None:
        parts.append(spec.noise[0])
        labels.append(NOISE_LABEL)
    proportions = spec.proportions / spec.proportions.sum()
    counts = rng.multinomial(n, proportions)
    base_dim = parts[0].dim
    blocks: list[FloatArray] = []
    for dist, count in zip(parts, counts, strict=True):
        root = sqrtm_psd(dist.cov.entries)
        blocks.append(dist.mean + rng.standard_normal((int(count), base_dim)) @ root)
    data = np.concatenate(blocks) if blocks else np.empty((0, base_dim))
    if spec.extra_noise_dims:
        padding = rng.standard_normal((n, spec.extra_noise_dims))
        data = np.hstack([data, padding])
    provenance = np.repeat(np.array(labels, dtype=np.int64), counts)
    order = rng.permutation(n)
    return SampleMatrix(data[order], provenance[order])


def benchmark_mixture(extra_noise_dims: int = 0) -> MixtureSpec:
    """Five overlapping bivariate Gaussians plus 2% noise bridging them."""
    parameters = [
        ([0.0, 0.0], [[4.0, 2.0], [2.0, 4.0]], 0.15),
        ([-3.0, 4.0], [[2.0, -1.0], [-1.0, 4.0]], 0.15),
        ([6.0, 6.0], [[2.0, 0.0], [0.0, 3.0]], 0.15),
        ([5.0, 0.0], [[2.0, 0.0], [0.0, 2.0]], 0.20),
        ([1.0, 5.0], [[2.0, -1.0], [-1.0, 1.0]], 0.33),
    ]
    components = tuple(
        (GaussianDistribution.from_arrays(mean, cov), proportion)
        for mean, cov, proportion in parameters
    )
    noise = (GaussianDistribution.from_arrays([2.0, 2.5], 4.0 * np.eye(2)), 0.02)
    return MixtureSpec(components, noise, extra_noise_dims)


def grid_size_setting() -> int:
    """``TRIMBARY_QUANTILE_GRID``, or 1000 outside a configured project."""
    if settings.configured:
        return int(getattr(settings, "TRIMBARY_QUANTILE_GRID", DEFAULT_GRID_SIZE))
    return DEFAULT_GRID_SIZE


def empirical_quantiles(
    values: ArrayLike, grid_size: int | None = None
) -> QuantileFunction:
    """Sample quantiles at the midpoint levels, as order statistics.

    Level t maps to the smallest observation whose empirical CDF reaches t.
    """
    sample = np.asarray(values, dtype=np.float64).ravel()
    if sample.size == 0:
        raise EmptySampleError("cannot take quantiles of an empty sample")
    grid_size = grid_size_setting() if grid_size is None else grid_size
    if grid_size < 1:
        raise InvalidConfigError(f"grid size must be positive, got {grid_size}")
    levels = midpoint_levels(grid_size)
    return QuantileFunction(np.quantile(sample, levels, method="inverted_cdf"))


def gaussian_quantiles(
    dist: GaussianDistribution, grid_size: int | None = None
) -> QuantileFunction:
    """Quantile grid of a univariate Gaussian."""
    if dist.dim != 1:
        raise InputError(f"expected a univariate Gaussian, got dimension {dist.dim}")
    grid_size = grid_size_setting() if grid_size is None else grid_size
    if grid_size < 1:
        raise InvalidConfigError(f"grid size must be positive, got {grid_size}")
    scale = math.sqrt(float(dist.cov.entries[0, 0]))
    levels = midpoint_levels(grid_size)
    return QuantileFunction(norm.ppf(levels, loc=float(dist.mean[0]), scale=scale))


@dataclass(frozen=True, eq=False)
class GaussianFit:
    """A unit report together with the partition behind it."""

    report: UnitReport
    labels: IntArray
    trimmed: BoolArray
    objective: float


class _StartFailed(Exception):
    pass


def _kmeans_plus_plus(
    points: FloatArray, k: int, rng: np.random.Generator
) -> FloatArray:
    n = points.shape[0]
    centers = [points[rng.integers(n)]]
    for _ in range(1, k):
        gaps = ((points[:, None, :] - np.array(centers)[None]) ** 2).sum(axis=2)
        nearest = gaps.min(axis=1)
        total = float(nearest.sum())
        if total <= 0:
            centers.append(points[rng.integers(n)])
        else:
            centers.append(points[rng.choice(n, p=nearest / total)])
    return np.array(centers)


def _trim_mask(scores: FloatArray, n_trim: int) -> BoolArray:
    """True for the rows to keep: all but the ``n_trim`` highest scores."""
    keep = np.ones(scores.size, dtype=bool)
    if n_trim:
        order = np.argsort(scores, kind="stable")
        keep[order[scores.size - n_trim :]] = False
    return keep


def _cluster_moments(
    points: FloatArray, labels: IntArray, keep: BoolArray, k: int
) -> tuple[FloatArray, FloatArray, FloatArray]:
    dim = points.shape[1]
    means = np.empty((k, dim))
    covs = np.empty((k, dim, dim))
    counts = np.empty(k)
    for j in range(k):
        members = points[keep & (labels == j)]
        if members.shape[0] < dim + 1:
            raise _StartFailed(f"cluster {j} kept {members.shape[0]} points")
        means[j] = members.mean(axis=0)
        covs[j] = np.atleast_2d(np.cov(members, rowvar=False, bias=True))
        counts[j] = members.shape[0]
    return means, covs, counts


def _trimmed_lloyd(
    points: FloatArray,
    k: int,
    n_trim: int,
    rng: np.random.Generator,
    max_iterations: int,
) -> tuple[IntArray, BoolArray, float]:
    centers = _kmeans_plus_plus(points, k, rng)
    labels = np.full(points.shape[0], -1, dtype=np.int64)
    keep = np.ones(points.shape[0], dtype=bool)
    objective = math.inf
    for _ in range(max_iterations):
        gaps = ((points[:, None, :] - centers[None]) ** 2).sum(axis=2)
        new_labels = np.argmin(gaps, axis=1)
        nearest = gaps[np.arange(points.shape[0]), new_labels]
        new_keep = _trim_mask(nearest, n_trim)
        objective = float(nearest[new_keep].sum())
        if np.array_equal(new_labels, labels) and np.array_equal(new_keep, keep):
            break
        labels, keep = new_labels, new_keep
        for j in range(k):
            members = points[keep & (labels == j)]
            if members.shape[0] == 0:
                raise _StartFailed(f"cluster {j} lost every point")
            centers[j] = members.mean(axis=0)
    return labels, keep, objective


def _trimmed_em(
    points: FloatArray,
    labels: IntArray,
    keep: BoolArray,
    k: int,
    n_trim: int,
    iterations: int,
) -> tuple[IntArray, BoolArray, FloatArray, FloatArray, FloatArray]:
    means, covs, counts = _cluster_moments(points, labels, keep, k)
    proportions = counts / counts.sum()
    ridge = DENSITY_RIDGE * np.eye(points.shape[1])
    for _ in range(iterations):
        log_density = np.column_stack(
            [
                np.log(proportions[j])
                + multivariate_normal.logpdf(points, means[j], covs[j] + ridge)
                for j in range(k)
            ]
        )
        score = logsumexp(log_density, axis=1)
        keep = _trim_mask(-score, n_trim)
        resp = np.exp(log_density[keep] - score[keep, None])
        mass = resp.sum(axis=0)
        if np.any(mass <= points.shape[1]):
            logger.warning("trimmed EM emptied a component; keeping the last estimate")
            break
        kept = points[keep]
        means = (resp.T @ kept) / mass[:, None]
        for j in range(k):
            centered = kept - means[j]
            covs[j] = (resp[:, j, None] * centered).T @ centered / mass[j]
        proportions = mass / mass.sum()
        labels = np.argmax(log_density, axis=1)
    return labels, keep, means, covs, proportions


def fit_trimmed_gaussians(
    sample: SampleMatrix,
    k: int,
    gamma: float,
    *,
    seed: int = 0,
    stream: Sequence[int] = (),
    n_starts: int = 10,
    max_iterations: int = 100,
    refine_iterations: int = 0,
    unit_id: str = "unit",
) -> GaussianFit:
    """Fit k Gaussians to a sample after trimming a γ fraction of it.

    Trimmed k-means picks the partition (best of ``n_starts`` seeded starts).
    Cluster moments of the kept points give the Gaussians and the kept counts
    give the weights. ``refine_iterations`` > 0 adds trimmed EM steps on the
    mixture log-density before the report is formed.
    """
    points = sample.data
    n, dim = points.shape
    if n == 0:
        raise EmptySampleError(f"unit {unit_id!r} has no rows")
    if k < 1 or n_starts < 1:
        raise InvalidConfigError("k and the number of starts must be positive")
    if not 0.0 <= gamma < 1.0:
        raise InvalidConfigError(f"trim level must lie in [0, 1), got {gamma}")
    n_trim = math.ceil(gamma * n - 1e-9)
    if n - n_trim < k * (dim + 1):
        raise InputError(
            f"unit {unit_id!r} keeps {n - n_trim} rows, "
            f"fewer than k*(d+1) = {k * (dim + 1)}"
        )
    best: tuple[float, IntArray, BoolArray] | None = None
    for start in range(n_starts):
        rng = derived_rng(seed, *stream, start)
        try:
            labels, keep, objective = _trimmed_lloyd(
                points, k, n_trim, rng, max_iterations
            )
            _cluster_moments(points, labels, keep, k)
        except _StartFailed as exc:
            logger.warning("unit %s start %d discarded: %s", unit_id, start, exc)
            continue
        if best is None or objective < best[0]:
            best = (objective, labels, keep)
    if best is None:
        raise FitError(f"every start failed for unit {unit_id!r}")
    objective, labels, keep = best
    if refine_iterations:
        labels, keep, means, covs, weights = _trimmed_em(
            points, labels, keep, k, n_trim, refine_iterations
        )
    else:
        means, covs, counts = _cluster_moments(points, labels, keep, k)
        weights = counts / counts.sum()
    features = tuple(
        GaussianDistribution.from_arrays(means[j], covs[j]) for j in range(k)
    )
    report = UnitReport(unit_id, features, weights / weights.sum(), n)
    logger.info(
        "Fitted %d Gaussians to unit %s (%d rows, %d trimmed)", k, unit_id, n, n_trim
    )
    return GaussianFit(report, labels, ~keep, objective)


def fit_gaussian_clusters(
    sample: SampleMatrix, k: int, gamma: float, seed: int = 0
) -> UnitReport:
    return fit_trimmed_gaussians(sample, k, gamma, seed=seed).report


def split_into_units(
    sample: SampleMatrix,
    m: int,
    mode: SplitMode = SplitMode.PARTITION,
    *,
    size: int | None = None,
    seed: int = 0,
    min_rows: int = 1,
) -> list[SampleMatrix]:
    """Divide a sample among m units.

    PARTITION shuffles the rows and cuts them into near-equal disjoint shards.
    SUBSAMPLE draws ``size`` rows without replacement per unit (default n // m),
    BOOTSTRAP draws ``size`` rows with replacement (default n).
    """
    n = sample.n
    if m < 1:
        raise InvalidConfigError(f"number of units must be positive, got {m}")
    if mode == SplitMode.PARTITION:
        order = derived_rng(seed).permutation(n)
        shards = np.array_split(order, m)
    elif mode == SplitMode.SUBSAMPLE:
        size = n // m if size is None else size
        if size > n:
            raise InfeasibleSplitError(
                f"cannot subsample {size} rows without replacement from {n}"
            )
        shards = [
            derived_rng(seed, unit).choice(n, size=size, replace=False)
            for unit in range(m)
        ]
    else:
        size = n if size is None else size
        if n == 0:
            raise InfeasibleSplitError("cannot resample an empty sample")
        shards = [derived_rng(seed, unit).integers(0, n, size) for unit in range(m)]
    smallest = min(len(shard) for shard in shards)
    if smallest < min_rows:
        raise InfeasibleSplitError(
            f"{mode} split into {m} units leaves {smallest} rows in a unit, "
            f"at least {min_rows} are needed"
        )
    return [sample.take(shard) for shard in shards]


def fit_units(
    sample: SampleMatrix,
    m: int,
    k: int,
    gamma: float,
    *,
    mode: SplitMode = SplitMode.PARTITION,
    size: int | None = None,
    seed: int = 0,
    n_starts: int = 10,
    refine_iterations: int = 0,
    max_workers: int | None = None,
) -> list[UnitReport]:
    """Split a sample and fit every unit in parallel, each on its own seed stream."""
    shards = split_into_units(
        sample, m, mode, size=size, seed=seed, min_rows=k * (sample.dim + 1)
    )
    width = len(str(m - 1))

    def fit(item: tuple[int, SampleMatrix]) -> UnitReport:
        unit, shard = item
        return fit_trimmed_gaussians(
            shard,
            k,
            gamma,
            seed=seed,
            stream=(1, unit),
            n_starts=n_starts,
            refine_iterations=refine_iterations,
            unit_id=f"unit-{unit:0{width}d}",
        ).report

    return ordered_map(fit, list(enumerate(shards)), max_workers)
