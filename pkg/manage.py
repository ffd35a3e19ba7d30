#!/usr/bin/env python
"""Developer entry point: the ot-trimbary commands against the local settings."""

import os
import sys

from trimbary.cli import main

if __name__ == "__main__":
    os.environ.setdefault("DJANGO_SETTINGS_MODULE", "config.settings.local")
    main(sys.argv)
