"""Barycenter of a weighted set with its Fréchet value."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from trimbary.forms import FORMAT_VERSION
from trimbary.models import GaussianDistribution
from trimbary.serialization import distribution_document, dumps, read_problem
from trimbary.wasserstein import (
    frechet_value,
    gaussian_barycenter_fixed_point,
    generalized_variance,
)
from trimbary.wasserstein import barycenter as compute_barycenter

from ._base import TrimbaryCommand


class Command(TrimbaryCommand):
    help = "Compute the W2 barycenter of a problem file."

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("input", help="Problem file (JSON).")
        self.add_output_argument(parser)

    def handle(self, *args: Any, **options: Any) -> None:
        dset = read_problem(options["input"])
        document: dict[str, Any] = {"format_version": FORMAT_VERSION}
        document["space"] = str(dset.space)
        if all(isinstance(item, GaussianDistribution) for item in dset.items):
            report = gaussian_barycenter_fixed_point(dset)
            center: Any = report.barycenter
            document["iterations"] = report.iterations
            document["residual"] = report.residual
            document["generalized_variance"] = generalized_variance(dset, center)
        else:
            center = compute_barycenter(dset)
        document["barycenter"] = distribution_document(center)
        document["frechet_value"] = frechet_value(dset, center)
        self.emit(dumps(document), options["out"])
