"""Production settings, used by the ot-trimbary console script."""

import os

from .base import *  # noqa: F403
from .base import LOGGING, SECRET_KEY

DEBUG = False

SECRET_KEY = os.environ.get("DJANGO_SECRET_KEY", SECRET_KEY)

LOGGING["loggers"]["trimbary"]["level"] = os.environ.get(  # type: ignore[index]
    "TRIMBARY_LOG_LEVEL", "WARNING"
)
