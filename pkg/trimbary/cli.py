"""``ot-trimbary`` console script."""

from __future__ import annotations

import os
import sys

from django.core.management import execute_from_command_line


def main(argv: list[str] | None = None) -> None:
    """Run a trimbary management command; ``fit-units`` is read as ``fit_units``."""
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.production")
    args = list(sys.argv if argv is None else argv)
    if len(args) > 1 and not args[1].startswith("-"):
        args[1] = args[1].replace("-", "_")
    execute_from_command_line(args)


if __name__ == "__main__":
    main()
