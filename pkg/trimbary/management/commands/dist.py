"""Print the W2 distance between two single-distribution problem files."""

from __future__ import annotations

from argparse import ArgumentParser
from typing import Any

from trimbary.exceptions import InputError
from trimbary.models import Distribution
from trimbary.serialization import read_problem
from trimbary.wasserstein import w2_distance

from ._base import TrimbaryCommand


def _single(path: str) -> Distribution:
    dset = read_problem(path)
    if len(dset) != 1:
        raise InputError(f"{path}: expected one distribution, found {len(dset)}")
    return dset.items[0]


class Command(TrimbaryCommand):
    help = "Print W2 between the distributions in two problem files."

    def add_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument("a", help="Problem file holding one distribution.")
        parser.add_argument("b", help="Problem file holding one distribution.")

    def handle(self, *args: Any, **options: Any) -> None:
        value = w2_distance(_single(options["a"]), _single(options["b"]))
        self.stdout.write(f"{value:.12g}")
