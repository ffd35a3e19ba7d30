"""W2 distances, barycenters and variances in the two supported geometries.

Gaussian (location-scatter) laws use the closed-form Bures-Wasserstein
formulas; univariate laws are compared through their quantile grids.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .exceptions import (
    BarycenterConvergenceError,
    DegenerateBarycenterError,
    DimensionMismatchError,
    GridMismatchError,
    MixedGeometryError,
)
from .linalg import (
    FloatArray,
    SpdMatrix,
    sqrtm_and_inverse,
    sqrtm_psd,
    trace_sqrtm_psd,
)
from .models import (
    Distribution,
    GaussianDistribution,
    QuantileFunction,
    Space,
    WeightedDistributionSet,
    space_of,
)

logger = logging.getLogger(__name__)

BARYCENTER_TOL = 1e-10
BARYCENTER_MAX_ITERATIONS = 500
RESIDUAL_TOL = 1e-7
START_RIDGE = 1e-10


def _bures_squared(a: FloatArray, b: FloatArray) -> float:
    # Both evaluation orders are averaged so the value is exactly symmetric.
    root_a = sqrtm_psd(a)
    root_b = sqrtm_psd(b)
    cross = 0.5 * (
        float(trace_sqrtm_psd(root_a @ b @ root_a))
        + float(trace_sqrtm_psd(root_b @ a @ root_b))
    )
    return max(float(np.trace(a)) + float(np.trace(b)) - 2.0 * cross, 0.0)


def w2_gaussian_squared(p: GaussianDistribution, q: GaussianDistribution) -> float:
    if p.dim != q.dim:
        raise DimensionMismatchError(
            f"cannot compare Gaussians of dimension {p.dim} and {q.dim}"
        )
    if p == q:
        return 0.0
    mean_term = float(np.sum((p.mean - q.mean) ** 2))
    return mean_term + _bures_squared(p.cov.entries, q.cov.entries)


def w2_gaussian(p: GaussianDistribution, q: GaussianDistribution) -> float:
    """Closed-form W2 between two members of a location-scatter family."""
    return math.sqrt(w2_gaussian_squared(p, q))


def w2_quantile_squared(p: QuantileFunction, q: QuantileFunction) -> float:
    if p.grid_size != q.grid_size:
        raise GridMismatchError(
            f"cannot compare quantile grids of size {p.grid_size} and {q.grid_size}"
        )
    return float(np.mean((p.values - q.values) ** 2))


def w2_quantile(p: QuantileFunction, q: QuantileFunction) -> float:
    """Midpoint-rule L2 distance between quantile functions."""
    return math.sqrt(w2_quantile_squared(p, q))


def squared_distance(p: Distribution, q: Distribution) -> float:
    if isinstance(p, GaussianDistribution) and isinstance(q, GaussianDistribution):
        return w2_gaussian_squared(p, q)
    if isinstance(p, QuantileFunction) and isinstance(q, QuantileFunction):
        return w2_quantile_squared(p, q)
    raise MixedGeometryError(
        f"cannot measure W2 between {space_of(p)} and {space_of(q)} distributions"
    )


def w2_distance(p: Distribution, q: Distribution) -> float:
    return math.sqrt(squared_distance(p, q))


def _gaussian_stack(
    items: Sequence[Distribution],
) -> tuple[FloatArray, FloatArray]:
    gaussians = [_as_gaussian(item) for item in items]
    means = np.stack([g.mean for g in gaussians])
    covs = np.stack([g.cov.entries for g in gaussians])
    return means, covs


def _as_gaussian(dist: Distribution) -> GaussianDistribution:
    if not isinstance(dist, GaussianDistribution):
        raise MixedGeometryError(f"expected a Gaussian, got {space_of(dist)}")
    return dist


def _as_quantile(dist: Distribution) -> QuantileFunction:
    if not isinstance(dist, QuantileFunction):
        raise MixedGeometryError(f"expected a quantile function, got {space_of(dist)}")
    return dist


def pairwise_squared_distances(
    items: Sequence[Distribution], centers: Sequence[Distribution]
) -> FloatArray:
    """Matrix of W2²(items[i], centers[j]), evaluated one center at a time."""
    result = np.empty((len(items), len(centers)), dtype=np.float64)
    if space_of(items[0]) == Space.GAUSSIAN:
        means, covs = _gaussian_stack(items)
        roots = sqrtm_psd(covs)
        traces = np.trace(covs, axis1=1, axis2=2)
        for j, center in enumerate(centers):
            g = _as_gaussian(center)
            if g.dim != means.shape[1]:
                raise DimensionMismatchError(
                    f"center dimension {g.dim} does not match items ({means.shape[1]})"
                )
            c = g.cov.entries
            root_c = sqrtm_psd(c)
            cross = 0.5 * (
                trace_sqrtm_psd(root_c @ covs @ root_c)
                + trace_sqrtm_psd(roots @ c @ roots)
            )
            bures = np.maximum(traces + np.trace(c) - 2.0 * cross, 0.0)
            dist = np.sum((means - g.mean) ** 2, axis=1) + bures
            same = np.all(means == g.mean, axis=1) & np.all(covs == c, axis=(1, 2))
            dist[same] = 0.0
            result[:, j] = dist
        return result
    values = np.stack([_as_quantile(item).values for item in items])
    for j, center in enumerate(centers):
        q = _as_quantile(center)
        if q.grid_size != values.shape[1]:
            raise GridMismatchError(
                f"center grid size {q.grid_size} does not match items "
                f"({values.shape[1]})"
            )
        result[:, j] = np.mean((values - q.values) ** 2, axis=1)
    return result


@dataclass(frozen=True)
class FixedPointReport:
    """A Gaussian barycenter with the diagnostics of its covariance iteration."""

    barycenter: GaussianDistribution
    iterations: int
    residual: float


def fixed_point_residual(
    cov: FloatArray, covs: FloatArray, weights: FloatArray
) -> float:
    """‖Σ w_i (S^{1/2} Σ_i S^{1/2})^{1/2} − S‖_F for a candidate S."""
    root = sqrtm_psd(cov)
    image = np.einsum("i,ijk->jk", weights, sqrtm_psd(root @ covs @ root))
    return float(np.linalg.norm(image - cov, "fro"))


def _shared_tag(items: Sequence[GaussianDistribution]) -> str | None:
    tags = {item.family_tag for item in items}
    return tags.pop() if len(tags) == 1 else None


def gaussian_barycenter_fixed_point(
    dset: WeightedDistributionSet,
    *,
    tol: float = BARYCENTER_TOL,
    max_iterations: int = BARYCENTER_MAX_ITERATIONS,
    residual_tol: float = RESIDUAL_TOL,
) -> FixedPointReport:
    """Barycenter of Gaussians by the covariance fixed-point iteration.

    The mean is the weighted mean. The covariance iterates
    S ← S^{-1/2} (Σ w_i (S^{1/2} Σ_i S^{1/2})^{1/2})² S^{-1/2} from the
    Euclidean mean of the covariances plus a small ridge, and stops once the
    Frobenius change drops below ``tol · (1 + ‖S‖_F)``.
    """
    positive = np.flatnonzero(dset.weights > 0)
    items = [_as_gaussian(dset.items[i]) for i in positive]
    if len(items) == 1:
        return FixedPointReport(items[0], 0, 0.0)
    if all(item.cov.is_singular for item in items):
        raise DegenerateBarycenterError(
            "every weighted covariance is singular; the barycenter is degenerate"
        )
    weights = dset.weights[positive] / dset.weights[positive].sum()
    means, covs = _gaussian_stack(items)
    dim = means.shape[1]
    mean = weights @ means
    cov = np.einsum("i,ijk->jk", weights, covs) + START_RIDGE * np.eye(dim)
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        root, inv_root = sqrtm_and_inverse(cov)
        inner = np.einsum("i,ijk->jk", weights, sqrtm_psd(root @ covs @ root))
        update = inv_root @ inner @ inner @ inv_root
        update = (update + update.T) / 2.0
        change = float(np.linalg.norm(update - cov, "fro"))
        cov = update
        if change <= tol * (1.0 + float(np.linalg.norm(cov, "fro"))):
            break
    residual = fixed_point_residual(cov, covs, weights)
    scale = 1.0 + float(np.linalg.norm(cov, "fro"))
    if residual > residual_tol * scale:
        raise BarycenterConvergenceError(
            f"covariance iteration stopped after {iterations} steps with "
            f"residual {residual:.3e}",
            residual=residual,
            iterations=iterations,
        )
    logger.debug(
        "Gaussian barycenter of %d items: %d iterations, residual %.3e",
        len(items),
        iterations,
        residual,
    )
    barycenter = GaussianDistribution(
        mean, SpdMatrix.from_array(cov), _shared_tag(items)
    )
    return FixedPointReport(barycenter, iterations, residual)


def barycenter_gaussian(dset: WeightedDistributionSet) -> GaussianDistribution:
    return gaussian_barycenter_fixed_point(dset).barycenter


def barycenter_quantile(dset: WeightedDistributionSet) -> QuantileFunction:
    """Pointwise weighted mean of the quantile functions."""
    positive = np.flatnonzero(dset.weights > 0)
    if positive.size == 1:
        return _as_quantile(dset.items[positive[0]])
    values = np.stack([_as_quantile(item).values for item in dset.items])
    return QuantileFunction(dset.weights @ values)


def barycenter(dset: WeightedDistributionSet) -> Distribution:
    if dset.space == Space.GAUSSIAN:
        return barycenter_gaussian(dset)
    return barycenter_quantile(dset)


def generalized_variance(
    dset: WeightedDistributionSet, bary: GaussianDistribution
) -> float:
    """Σ w_i (‖m_i‖² + tr Σ_i) − (‖m̄‖² + tr Σ̄), evaluated in centered form."""
    means, covs = _gaussian_stack(dset.items)
    if means.shape[1] != bary.dim:
        raise DimensionMismatchError(
            f"barycenter dimension {bary.dim} does not match items ({means.shape[1]})"
        )
    spread = float(dset.weights @ np.sum((means - bary.mean) ** 2, axis=1))
    traces = float(dset.weights @ np.trace(covs, axis1=1, axis2=2))
    return max(spread + traces - bary.cov.trace(), 0.0)


def frechet_value(dset: WeightedDistributionSet, candidate: Distribution) -> float:
    """Σ w_i W2²(P_i, candidate)."""
    distances = pairwise_squared_distances(dset.items, [candidate])[:, 0]
    return float(dset.weights @ distances)
