"""Split a sample among units and fit k Gaussians in each."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from trimbary.datagen import fit_units
from trimbary.models import SplitMode
from trimbary.serialization import dumps, read_sample_csv, reports_document

from ._base import TrimbaryCommand


class Command(TrimbaryCommand):
    help = "Fit per-unit trimmed Gaussian clusterings and write a report file."

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("sample", help="Sample CSV (x1..xd[,label]).")
        parser.add_argument("--m", type=int, required=True, help="Number of units.")
        parser.add_argument("--k", type=int, required=True, help="Clusters per unit.")
        parser.add_argument(
            "--gamma", type=float, default=0.0, help="Trimmed fraction per unit."
        )
        parser.add_argument(
            "--mode",
            choices=SplitMode.values,
            default=SplitMode.PARTITION,
            help="How rows are divided among units.",
        )
        parser.add_argument(
            "--size", type=int, default=None, help="Rows per unit for resampling."
        )
        parser.add_argument(
            "--refine-iterations",
            type=int,
            default=0,
            help="Trimmed EM steps after the k-means fit.",
        )
        parser.add_argument("--starts", type=int, default=None)
        self.add_seed_argument(parser)
        self.add_output_argument(parser)

    def handle(self, *args: Any, **options: Any) -> None:
        sample = read_sample_csv(options["sample"])
        reports = fit_units(
            sample,
            options["m"],
            options["k"],
            options["gamma"],
            mode=SplitMode(options["mode"]),
            size=options["size"],
            seed=self.seed(options),
            n_starts=self.starts(options),
            refine_iterations=options["refine_iterations"],
        )
        self.emit(dumps(reports_document(reports)), options["out"])
