"""Solve a trimmed k-barycenter problem."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from trimbary.models import SolverConfig
from trimbary.serialization import dumps, read_problem, solution_document
from trimbary.solver import solve_trimmed_kbarycenter, trimmed_variation

from ._base import TrimbaryCommand


class Command(TrimbaryCommand):
    help = "Compute a trimmed k-barycenter of a weighted set of distributions."

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("input", help="Problem file (JSON).")
        parser.add_argument("--k", type=int, required=True, help="Number of centers.")
        parser.add_argument(
            "--alpha", type=float, default=0.0, help="Trimmed mass in [0, 1)."
        )
        self.add_solver_arguments(parser)
        self.add_output_argument(parser)

    def handle(self, *args: Any, **options: Any) -> None:
        dset = read_problem(options["input"])
        config = SolverConfig(
            k=options["k"],
            alpha=options["alpha"],
            n_starts=self.starts(options),
            max_iterations=self.max_iterations(options),
            seed=self.seed(options),
        )
        solution = solve_trimmed_kbarycenter(dset, config)
        variation = trimmed_variation(dset, solution)
        self.emit(dumps(solution_document(dset, solution, variation)), options["out"])
