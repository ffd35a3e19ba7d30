"""Objective, trimming and center stability over a (k, alpha) grid."""

from __future__ import annotations

from argparse import ArgumentParser
from pathlib import Path
from typing import Any

from trimbary.forms import parse_float_range, parse_int_range
from trimbary.serialization import read_problem, sweep_csv, trim_counts_csv
from trimbary.sweep import trim_sweep

from ._base import TrimbaryCommand


class Command(TrimbaryCommand):
    help = (
        "Sweep k and alpha; write k,alpha,objective,trimmed_mass,n_trimmed,"
        "trimmed_items,center_displacement as CSV."
    )

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("input", help="Problem file (JSON).")
        parser.add_argument("--k-range", required=True, help="e.g. 2:6 or 2,3,4.")
        parser.add_argument(
            "--alpha-range", required=True, help="e.g. 0:6/36:1/36 or 0,0.05,0.1."
        )
        parser.add_argument(
            "--counts-out", default=None, help="CSV of per-item trim counts."
        )
        self.add_solver_arguments(parser)
        self.add_output_argument(parser)

    def handle(self, *args: Any, **options: Any) -> None:
        ks = parse_int_range(options["k_range"])
        alphas = parse_float_range(options["alpha_range"])
        dset = read_problem(options["input"])
        result = trim_sweep(
            dset,
            ks,
            alphas,
            n_starts=self.starts(options),
            seed=self.seed(options),
            max_iterations=self.max_iterations(options),
        )
        self.emit(sweep_csv(result), options["out"])
        if options["counts_out"]:
            Path(options["counts_out"]).write_text(
                trim_counts_csv(result), encoding="utf-8"
            )
