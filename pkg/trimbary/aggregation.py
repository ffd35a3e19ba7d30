"""Robust consensus of k-features reported by independent processing units."""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import linear_sum_assignment

from .exceptions import InputError, InvalidConfigError, UndefinedWeightError
from .linalg import FloatArray
from .models import (
    AggregationResult,
    BoundParams,
    Distribution,
    FailureBound,
    GaussianDistribution,
    SolverConfig,
    TrimmedFeature,
    UnitReport,
    WeightedDistributionSet,
    Weighting,
    check_compatible,
)
from .solver import solve_trimmed_kbarycenter
from .wasserstein import pairwise_squared_distances

logger = logging.getLogger(__name__)

# Above this k the label matching switches from enumeration to assignment.
EXACT_MATCHING_MAX_K = 8


def _check_reports(reports: Sequence[UnitReport]) -> None:
    if not reports:
        raise InputError("at least one unit report is required")
    sizes = {report.k for report in reports}
    if len(sizes) != 1:
        raise InputError(f"unit reports disagree on k: {sorted(sizes)}")
    ids = [report.unit_id for report in reports]
    if len(set(ids)) != len(ids):
        raise InputError("unit ids must be unique")
    check_compatible([f for report in reports for f in report.features])


def feature_origins(reports: Sequence[UnitReport]) -> list[tuple[str, int]]:
    """(unit id, feature index) of every meta-sample item, in item order."""
    return [(r.unit_id, i) for r in reports for i in range(r.k)]


def build_meta_sample(
    reports: Sequence[UnitReport], weighting: Weighting = Weighting.EQUAL
) -> WeightedDistributionSet:
    """Stack the m·k unit features into one weighted set.

    EQUAL gives every feature 1/(mk); SAMPLE_SIZE gives the features of unit j
    n_j / (k Σ n).
    """
    _check_reports(reports)
    k = reports[0].k
    items = tuple(f for report in reports for f in report.features)
    if weighting == Weighting.SAMPLE_SIZE:
        sizes = np.array([report.sample_size for report in reports], dtype=np.float64)
        weights = np.repeat(sizes / (k * sizes.sum()), k)
    else:
        weights = np.full(len(items), 1.0 / len(items))
    return WeightedDistributionSet(items, weights)


def _as_gaussians(centers: Sequence[Distribution]) -> tuple[GaussianDistribution, ...]:
    gaussians = tuple(c for c in centers if isinstance(c, GaussianDistribution))
    if len(gaussians) != len(centers):
        raise InputError("consensus centers must be Gaussian")
    return gaussians


def aggregate_weights(
    reports: Sequence[UnitReport],
    consensus: Sequence[GaussianDistribution],
    trim_report: Sequence[TrimmedFeature] = (),
) -> FloatArray:
    """Consensus cluster weights from the untrimmed unit weights.

    Every untrimmed feature votes for its nearest consensus center with the
    weight its unit gave it; π*_i is the mean vote of center i and the result
    is π* renormalized. A feature keeping at most half its meta-weight counts
    as trimmed.
    """
    _check_reports(reports)
    dropped = {
        (t.unit_id, t.feature_index) for t in trim_report if t.kept_mass <= t.weight / 2
    }
    features: list[GaussianDistribution] = []
    votes: list[float] = []
    for report in reports:
        for index, (feature, weight) in enumerate(
            zip(report.features, report.weights, strict=True)
        ):
            if (report.unit_id, index) not in dropped:
                features.append(feature)
                votes.append(float(weight))
    if not features:
        raise UndefinedWeightError("every unit feature was trimmed")
    nearest = np.argmin(pairwise_squared_distances(features, consensus), axis=1)
    means = np.empty(len(consensus))
    for center in range(len(consensus)):
        assigned = [v for v, g in zip(votes, nearest, strict=True) if g == center]
        if not assigned:
            raise UndefinedWeightError(
                f"consensus center {center} has no untrimmed feature assigned"
            )
        means[center] = np.mean(assigned)
    result: FloatArray = means / means.sum()
    return result


def aggregate(
    reports: Sequence[UnitReport],
    k: int,
    alpha: float,
    *,
    weighting: Weighting = Weighting.EQUAL,
    n_starts: int = 0,
    unit_starts: int | None = None,
    seed: int = 0,
    max_iterations: int = 200,
    max_workers: int | None = None,
) -> AggregationResult:
    """Trimmed k-barycenter of the meta-sample, started from every unit's k-set.

    ``unit_starts`` limits the unit k-sets used as starts to the first few
    units. Random starts are added on top of them when ``n_starts`` > 0.
    When k differs from the units' k the unit k-sets cannot serve as starts and
    at least one random start is needed.
    """
    meta = build_meta_sample(reports, weighting)
    explicit: tuple[tuple[GaussianDistribution, ...], ...] = ()
    if reports[0].k == k:
        explicit = tuple(r.features for r in reports[:unit_starts])
    config = SolverConfig(
        k=k,
        alpha=alpha,
        n_starts=n_starts,
        max_iterations=max_iterations,
        seed=seed,
        explicit_starts=explicit,
    )
    solution = solve_trimmed_kbarycenter(meta, config, max_workers=max_workers)
    consensus = _as_gaussians(solution.centers)
    trim_report = tuple(
        TrimmedFeature(unit_id, index, float(weight), float(kept))
        for (unit_id, index), weight, kept in zip(
            feature_origins(reports), meta.weights, solution.kept_mass, strict=True
        )
        if kept < weight
    )
    weights = aggregate_weights(reports, consensus, trim_report)
    logger.info(
        "Aggregated %d units into %d centers (objective %.6g, %d features trimmed)",
        len(reports),
        k,
        solution.objective,
        sum(1 for t in trim_report if t.kept_mass <= t.weight / 2),
    )
    return AggregationResult(
        consensus=consensus,
        agg_weights=weights,
        trim_report=trim_report,
        objective=solution.objective,
        solution=solution,
        meta_sample=meta,
    )


def best_matching(
    a: Sequence[Distribution], b: Sequence[Distribution]
) -> tuple[tuple[int, ...], float]:
    """Relabeling σ minimizing (1/k) Σ_j W2²(a_j, b_σ(j)), and that minimum.

    All k! permutations are scanned up to ``EXACT_MATCHING_MAX_K``; larger
    sets use an optimal assignment solver.
    """
    if len(a) != len(b):
        raise InputError(f"cannot match sets of sizes {len(a)} and {len(b)}")
    if not a:
        raise InputError("cannot match empty sets")
    check_compatible([*a, *b])
    k = len(a)
    cost = pairwise_squared_distances(a, b)
    if k <= EXACT_MATCHING_MAX_K:
        perms = np.array(list(itertools.permutations(range(k))), dtype=np.int64)
        totals = cost[np.arange(k), perms].sum(axis=1)
        best = int(np.argmin(totals))
        return tuple(int(j) for j in perms[best]), float(totals[best]) / k
    rows, cols = linear_sum_assignment(cost)
    perm = tuple(int(j) for j in cols[np.argsort(rows)])
    return perm, float(cost[rows, cols].sum()) / k


def matching_distance_sq(a: Sequence[Distribution], b: Sequence[Distribution]) -> float:
    """Deviation between two k-sets up to relabeling."""
    return best_matching(a, b)[1]


def hausdorff_distance(a: Sequence[Distribution], b: Sequence[Distribution]) -> float:
    if not a or not b:
        raise InputError("Hausdorff distance needs two non-empty sets")
    check_compatible([*a, *b])
    dist = np.sqrt(pairwise_squared_distances(a, b))
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def max_weight_deviation(
    centers: Sequence[Distribution],
    weights: ArrayLike,
    reference: Sequence[Distribution],
    reference_weights: ArrayLike,
) -> float:
    """Largest |π_j − π^ref_σ(j)| after optimally matching the centers."""
    perm, _ = best_matching(centers, reference)
    ours = np.asarray(weights, dtype=np.float64)
    theirs = np.asarray(reference_weights, dtype=np.float64)
    if ours.shape != (len(centers),) or theirs.shape != (len(reference),):
        raise InputError("weight vectors must match their center sets")
    return float(np.max(np.abs(ours - theirs[list(perm)])))


def failure_bound(params: BoundParams) -> FailureBound:
    """Probability that the consensus misses the truth by more than r(η)·H/2.

    The probability is k·exp(−α²m/2) capped at 1; ``separated`` reports
    whether r(η) < min_separation / H, the condition under which the bound
    applies.
    """
    if not 0.0 < params.alpha <= 1.0 / (2 * params.k):
        raise InvalidConfigError(
            f"alpha must lie in (0, 1/(2k)] = (0, {1.0 / (2 * params.k):.6g}], "
            f"got {params.alpha}"
        )
    if params.m < 0 or params.r_eta < 0 or params.min_separation < 0:
        raise InvalidConfigError("m, r_eta and min_separation must be non-negative")
    probability = min(1.0, params.k * math.exp(-(params.alpha**2) * params.m / 2.0))
    h = params.H
    radius = params.r_eta * h / 2.0 if math.isfinite(h) else math.inf
    return FailureBound(probability, radius, params.r_eta < params.min_separation / h)

