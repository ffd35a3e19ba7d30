"""Weighted trimmed k-barycenters by concentration steps with multiple starts."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from .exceptions import InconsistentSolutionError, InputError, InvalidConfigError
from .linalg import FloatArray
from .models import (
    Distribution,
    GaussianDistribution,
    IntArray,
    SolverConfig,
    StartSummary,
    TrimSolution,
    VariationBreakdown,
    WeightedDistributionSet,
    check_compatible,
)
from .parallel import derived_rng, ordered_map
from .wasserstein import barycenter, pairwise_squared_distances

logger = logging.getLogger(__name__)

# Cumulative kept weight within this of 1 - α counts as having reached it.
MASS_TOL = 1e-12
NEAREST_TOL = 1e-9


def trimming_weights(
    distances: ArrayLike, weights: ArrayLike, alpha: float
) -> tuple[FloatArray, FloatArray]:
    """Kept mass δ_i and normalized weights δ_i / (1 - α).

    Items are visited by increasing distance, ties in input order. Each keeps
    its full weight until the kept total reaches 1 - α; the item that crosses
    the threshold keeps only the remainder 1 - α - Σ_{before} w, the rest keep 0.
    """
    d = np.asarray(distances, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    if d.shape != w.shape or d.ndim != 1:
        raise InputError("distances and weights must be vectors of equal length")
    if not 0.0 <= alpha < 1.0:
        raise InvalidConfigError(f"alpha must lie in [0, 1), got {alpha}")
    if np.any(d < 0) or np.any(w < 0):
        raise InputError("distances and weights must be non-negative")
    if alpha == 0.0:
        kept = w.copy()
    else:
        order = np.lexsort((np.arange(d.size), d))
        target = 1.0 - alpha
        cumulative = np.cumsum(w[order])
        boundary = min(
            int(np.searchsorted(cumulative, target - MASS_TOL, side="left")),
            d.size - 1,
        )
        kept = np.zeros_like(w)
        kept[order[:boundary]] = w[order[:boundary]]
        before = float(cumulative[boundary - 1]) if boundary > 0 else 0.0
        last = order[boundary]
        kept[last] = min(max(target - before, 0.0), float(w[last]))
    return kept, kept / (1.0 - alpha)


@dataclass(frozen=True, eq=False)
class ConcentrationStep:
    """Distances, nearest centers and trimming for one set of centers."""

    distances_sq: FloatArray
    assignments: IntArray
    kept_mass: FloatArray
    normalized: FloatArray
    alpha: float

    @property
    def objective(self) -> float:
        return float(self.kept_mass @ self.distances_sq) / (1.0 - self.alpha)

    def state(self) -> bytes:
        """Assignments of kept items plus kept masses, as a comparable key."""
        labels = np.where(self.kept_mass > 0, self.assignments, -1).astype(np.int64)
        return labels.tobytes() + self.kept_mass.tobytes()


def concentration_step(
    dset: WeightedDistributionSet, centers: Sequence[Distribution], alpha: float
) -> ConcentrationStep:
    """Assign every item to its nearest center and trim the farthest mass."""
    all_distances = pairwise_squared_distances(dset.items, centers)
    assignments = np.argmin(all_distances, axis=1)
    distances = all_distances[np.arange(len(dset)), assignments]
    kept, normalized = trimming_weights(distances, dset.weights, alpha)
    return ConcentrationStep(distances, assignments, kept, normalized, alpha)


def update_centers(
    dset: WeightedDistributionSet,
    assignments: ArrayLike,
    normalized: ArrayLike,
    distances_sq: ArrayLike,
    k: int,
) -> tuple[Distribution, ...]:
    """Barycenter of each cluster under its kept weights.

    A cluster without kept mass is reseeded to the untrimmed item farthest from
    its center, taking the next farthest for each further empty cluster.
    """
    labels = np.asarray(assignments)
    mass = np.asarray(normalized, dtype=np.float64)
    distances = np.asarray(distances_sq, dtype=np.float64)
    centers: list[Distribution | None] = [None] * k
    empty: list[int] = []
    for j in range(k):
        members = np.flatnonzero((labels == j) & (mass > 0))
        if members.size == 0:
            empty.append(j)
            continue
        centers[j] = barycenter(dset.restricted(members.tolist(), mass[members]))
    if empty:
        untrimmed = np.flatnonzero(mass > 0)
        ranked = untrimmed[np.lexsort((untrimmed, -distances[untrimmed]))]
        for position, j in enumerate(empty):
            item = int(ranked[position % ranked.size])
            logger.debug("Cluster %d is empty; reseeding it at item %d", j, item)
            centers[j] = dset.items[item]
    return tuple(c for c in centers if c is not None)


@dataclass(frozen=True, eq=False)
class _StartOutcome:
    start_index: int
    explicit: bool
    centers: tuple[Distribution, ...]
    step: ConcentrationStep
    trace: tuple[float, ...]
    iterations: int
    converged: bool

    @property
    def objective(self) -> float:
        return self.trace[-1]

    @property
    def summary(self) -> StartSummary:
        return StartSummary(
            self.start_index,
            self.iterations,
            self.objective,
            self.converged,
            self.explicit,
        )


def _identity_key(dist: Distribution) -> bytes:
    if isinstance(dist, GaussianDistribution):
        return dist.mean.tobytes() + dist.cov.entries.tobytes()
    return dist.values.tobytes()


def distinct_support(dset: WeightedDistributionSet) -> int:
    """Number of distinct distributions carrying positive weight."""
    return len({_identity_key(dset.items[i]) for i in dset.positive_indices()})


def _initial_centers(
    dset: WeightedDistributionSet, config: SolverConfig
) -> list[tuple[int, bool, tuple[Distribution, ...]]]:
    starts: list[tuple[int, bool, tuple[Distribution, ...]]] = []
    for start in config.explicit_starts:
        check_compatible([dset.items[0], *start])
        starts.append((len(starts), True, tuple(start)))
    for _ in range(config.n_starts):
        index = len(starts)
        rng = derived_rng(config.seed, index)
        chosen = rng.choice(len(dset), size=config.k, replace=False, p=dset.weights)
        starts.append((index, False, tuple(dset.items[int(i)] for i in chosen)))
    return starts


def _run_start(
    dset: WeightedDistributionSet,
    alpha: float,
    max_iterations: int,
    start: tuple[int, bool, tuple[Distribution, ...]],
) -> _StartOutcome:
    start_index, explicit, centers = start
    step = concentration_step(dset, centers, alpha)
    trace = [step.objective]
    seen = {step.state()}
    converged = False
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        centers = update_centers(
            dset, step.assignments, step.normalized, step.distances_sq, len(centers)
        )
        previous = step.state()
        step = concentration_step(dset, centers, alpha)
        trace.append(step.objective)
        logger.debug(
            "start %d iteration %d: objective %.12g", start_index, iterations, trace[-1]
        )
        state = step.state()
        if state == previous:
            converged = True
            break
        if state in seen:
            logger.warning(
                "start %d revisited an earlier partition at iteration %d",
                start_index,
                iterations,
            )
            break
        seen.add(state)
    if not converged:
        logger.warning(
            "start %d stopped after %d iterations without a stationary partition",
            start_index,
            iterations,
        )
    return _StartOutcome(
        start_index, explicit, centers, step, tuple(trace), iterations, converged
    )


def solve_trimmed_kbarycenter(
    dset: WeightedDistributionSet,
    config: SolverConfig,
    *,
    max_workers: int | None = None,
) -> TrimSolution:
    """Best trimmed k-barycenter over explicit and seeded random starts.

    Explicit starts come first, then ``config.n_starts`` random starts drawing
    k distinct items with probability proportional to weight. Start i draws
    from its own stream of ``config.seed``, so the result does not depend on
    the number of worker threads. Ties on the objective go to the lower start
    index.
    """
    distinct = distinct_support(dset)
    if config.k > distinct:
        raise InvalidConfigError(
            f"k={config.k} exceeds the {distinct} distinct distributions "
            "with positive weight"
        )
    starts = _initial_centers(dset, config)
    logger.info(
        "Solving trimmed %d-barycenter of %d %s items (alpha=%.6g, %d starts)",
        config.k,
        len(dset),
        dset.space,
        config.alpha,
        len(starts),
    )
    outcomes = ordered_map(
        lambda start: _run_start(dset, config.alpha, config.max_iterations, start),
        starts,
        max_workers,
    )
    best = min(outcomes, key=lambda outcome: (outcome.objective, outcome.start_index))
    logger.info(
        "Best objective %.12g from start %d after %d iterations",
        best.objective,
        best.start_index,
        best.iterations,
    )
    step = best.step
    kept = step.kept_mass
    radius = 0.0
    if np.any(kept > 0):
        radius = math.sqrt(float(step.distances_sq[kept > 0].max()))
    assignments = tuple(
        int(a) if m > 0 else None
        for a, m in zip(step.assignments, kept, strict=True)
    )
    return TrimSolution(
        centers=best.centers,
        kept_mass=kept,
        assignments=assignments,
        distances_sq=step.distances_sq,
        objective=best.objective,
        trim_radius=radius,
        alpha=config.alpha,
        iterations=best.iterations,
        start_index=best.start_index,
        trace=best.trace,
        converged=best.converged,
        starts=tuple(outcome.summary for outcome in outcomes),
    )


def trimmed_variation(
    dset: WeightedDistributionSet, solution: TrimSolution
) -> VariationBreakdown:
    """Recompute the trimmed k-variation and its per-cluster decomposition."""
    size = len(dset)
    if len(solution.kept_mass) != size or len(solution.assignments) != size:
        raise InconsistentSolutionError(
            f"solution covers {len(solution.assignments)} items, the set has {size}"
        )
    distances = pairwise_squared_distances(dset.items, solution.centers)
    per_cluster = np.zeros(solution.k)
    for i, (mass, cluster) in enumerate(
        zip(solution.kept_mass, solution.assignments, strict=True)
    ):
        if mass > dset.weights[i] + MASS_TOL:
            raise InconsistentSolutionError(f"item {i} keeps more than its weight")
        if mass <= 0:
            continue
        if cluster is None or not 0 <= cluster < solution.k:
            raise InconsistentSolutionError(f"kept item {i} has no valid cluster")
        nearest = distances[i].min()
        if distances[i, cluster] > nearest + NEAREST_TOL * (1.0 + nearest):
            raise InconsistentSolutionError(
                f"kept item {i} is not assigned to its nearest center"
            )
        per_cluster[cluster] += mass * distances[i, cluster]
    per_cluster /= 1.0 - solution.alpha
    return VariationBreakdown(float(per_cluster.sum()), tuple(per_cluster.tolist()))
