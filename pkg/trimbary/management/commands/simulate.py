"""Draw a sample from a Gaussian mixture."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from trimbary.datagen import benchmark_mixture, simulate_mixture
from trimbary.models import MixtureSpec
from trimbary.serialization import read_mixture, sample_csv

from ._base import TrimbaryCommand


class Command(TrimbaryCommand):
    help = "Simulate a mixture sample as CSV (x1..xd,label; label -1 is noise)."

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("--n", type=int, required=True, help="Number of rows.")
        parser.add_argument(
            "--mixture",
            default=None,
            help="Mixture file (JSON); defaults to the five-component benchmark.",
        )
        parser.add_argument(
            "--extra-noise-dims",
            type=int,
            default=0,
            help="Standard normal coordinates appended to the benchmark mixture.",
        )
        self.add_seed_argument(parser)
        self.add_output_argument(parser)

    def handle(self, *args: Any, **options: Any) -> None:
        spec: MixtureSpec
        if options["mixture"]:
            spec = read_mixture(options["mixture"])
        else:
            spec = benchmark_mixture(options["extra_noise_dims"])
        sample = simulate_mixture(spec, options["n"], self.seed(options))
        self.emit(sample_csv(sample), options["out"])
