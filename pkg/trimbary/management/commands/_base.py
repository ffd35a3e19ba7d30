"""Shared plumbing for the trimbary management commands."""

from __future__ import annotations

import logging
from argparse import ArgumentParser
from pathlib import Path
from typing import Any

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from trimbary.exceptions import TrimbaryError
from trimbary.models import MAX_SEED

logger = logging.getLogger("trimbary.commands")


def seed_value(text: str) -> int:
    value = int(text)
    if not 0 <= value <= MAX_SEED:
        raise ValueError("seed must be a 64-bit unsigned integer")
    return value


class TrimbaryCommand(BaseCommand):
    """Base command mapping library errors to exit codes.

    Input errors exit with 2 and numerical failures with 3. Output goes to
    ``--out`` when given, otherwise to stdout.
    """

    def add_solver_arguments(self, parser: ArgumentParser) -> None:
        parser.add_argument(
            "--starts",
            type=int,
            default=None,
            help="Random starts (default: TRIMBARY_DEFAULT_STARTS).",
        )
        parser.add_argument(
            "--max-iterations",
            type=int,
            default=None,
            help="Iteration cap per start (default: TRIMBARY_MAX_ITERATIONS).",
        )
        self.add_seed_argument(parser)

    def add_seed_argument(self, parser: ArgumentParser) -> None:
        parser.add_argument(
            "--seed",
            type=seed_value,
            default=None,
            help="Random seed (default: TRIMBARY_DEFAULT_SEED, 0).",
        )

    def add_output_argument(self, parser: ArgumentParser) -> None:
        parser.add_argument(
            "--out", default=None, help="Output file (default: stdout)."
        )

    def seed(self, options: dict[str, Any]) -> int:
        seed: int = options.get("seed")
        return settings.TRIMBARY_DEFAULT_SEED if seed is None else seed

    def starts(self, options: dict[str, Any]) -> int:
        starts: int | None = options.get("starts")
        return settings.TRIMBARY_DEFAULT_STARTS if starts is None else starts

    def max_iterations(self, options: dict[str, Any]) -> int:
        cap: int | None = options.get("max_iterations")
        return settings.TRIMBARY_MAX_ITERATIONS if cap is None else cap

    def emit(self, text: str, out: str | None) -> None:
        """Write a finished document to ``out`` or stdout."""
        if out:
            Path(out).write_text(text, encoding="utf-8")
        else:
            self.stdout.write(text, ending="")

    def execute(self, *args: Any, **options: Any) -> str | None:
        try:
            return super().execute(*args, **options)
        except TrimbaryError as exc:
            raise CommandError(str(exc), returncode=exc.exit_code) from exc
        except OSError as exc:
            raise CommandError(str(exc), returncode=2) from exc
        except CommandError:
            raise
        except Exception:
            logger.exception("%s failed unexpectedly", type(self).__module__)
            raise
