"""Robust consensus of unit reports."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from trimbary.aggregation import aggregate
from trimbary.models import Weighting
from trimbary.serialization import aggregation_document, dumps, read_reports

from ._base import TrimbaryCommand


class Command(TrimbaryCommand):
    help = "Aggregate k-feature unit reports by a trimmed k-barycenter."

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("reports", help="Report file (JSON).")
        parser.add_argument(
            "--k", type=int, default=None, help="Consensus size (default: units' k)."
        )
        parser.add_argument(
            "--alpha", type=float, required=True, help="Trimmed mass in [0, 1)."
        )
        parser.add_argument(
            "--weighting",
            choices=Weighting.values,
            default=Weighting.EQUAL,
            help="Meta-sample weights.",
        )
        parser.add_argument(
            "--starts",
            type=int,
            default=0,
            help="Random starts added to the unit starts.",
        )
        parser.add_argument("--max-iterations", type=int, default=None)
        self.add_seed_argument(parser)
        self.add_output_argument(parser)

    def handle(self, *args: Any, **options: Any) -> None:
        reports = read_reports(options["reports"])
        k = reports[0].k if options["k"] is None else options["k"]
        result = aggregate(
            reports,
            k,
            options["alpha"],
            weighting=Weighting(options["weighting"]),
            n_starts=options["starts"],
            seed=self.seed(options),
            max_iterations=self.max_iterations(options),
        )
        self.emit(dumps(aggregation_document(result)), options["out"])
