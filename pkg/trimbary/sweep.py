"""Stability of trimmed k-barycenters over a grid of k and α."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from .aggregation import matching_distance_sq
from .exceptions import InvalidConfigError
from .models import Distribution, IntArray, SolverConfig, WeightedDistributionSet
from .solver import solve_trimmed_kbarycenter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SweepRow:
    """One (k, α) grid point.

    ``center_displacement`` is the matching deviation D² between these centers
    and those of the previous α at the same k, None for the first α.
    """

    k: int
    alpha: float
    objective: float
    trimmed_mass: float
    trimmed_items: tuple[int, ...]
    center_displacement: float | None

    @property
    def n_trimmed(self) -> int:
        return len(self.trimmed_items)


@dataclass(frozen=True, eq=False)
class SweepResult:
    rows: tuple[SweepRow, ...]
    trim_counts: IntArray

    def most_trimmed(self, count: int) -> list[int]:
        """Items with the highest trim counts, ties in item order."""
        order = np.lexsort((np.arange(self.trim_counts.size), -self.trim_counts))
        return [int(i) for i in order[:count]]


def trim_sweep(
    dset: WeightedDistributionSet,
    ks: Sequence[int],
    alphas: Sequence[float],
    *,
    n_starts: int = 10,
    seed: int = 0,
    max_iterations: int = 200,
    max_workers: int | None = None,
) -> SweepResult:
    """Solve every (k, α) pair and count how often each item gets trimmed.

    An item counts as trimmed at a grid point when it keeps at most half of
    its weight. α values are visited in the order given.
    """
    if not ks or not alphas:
        raise InvalidConfigError("the k and alpha ranges must not be empty")
    counts = np.zeros(len(dset), dtype=np.int64)
    rows: list[SweepRow] = []
    for k in ks:
        previous: tuple[Distribution, ...] | None = None
        for alpha in alphas:
            config = SolverConfig(k, alpha, n_starts, max_iterations, seed)
            solution = solve_trimmed_kbarycenter(dset, config, max_workers=max_workers)
            trimmed = tuple(solution.trimmed_indices(dset.weights))
            counts[list(trimmed)] += 1
            displacement = None
            if previous is not None:
                displacement = matching_distance_sq(previous, solution.centers)
            rows.append(
                SweepRow(
                    k=k,
                    alpha=alpha,
                    objective=solution.objective,
                    trimmed_mass=float(np.sum(dset.weights - solution.kept_mass)),
                    trimmed_items=trimmed,
                    center_displacement=displacement,
                )
            )
            previous = solution.centers
            logger.info(
                "k=%d alpha=%.6g: objective %.6g, %d items trimmed",
                k,
                alpha,
                solution.objective,
                len(trimmed),
            )
    return SweepResult(tuple(rows), counts)
