"""Local development settings."""

from .base import *  # noqa: F403
from .base import LOGGING

DEBUG = True

LOGGING["loggers"]["trimbary"]["level"] = "DEBUG"  # type: ignore[index]
