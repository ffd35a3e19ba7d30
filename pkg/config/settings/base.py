"""Base settings for the ot-trimbary project."""

import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent.parent

SECRET_KEY = "django-insecure-change-me-in-production"

DEBUG = False

ALLOWED_HOSTS: list[str] = []

INSTALLED_APPS = [
    "trimbary",
]

# Nothing is persisted; inputs and results live in JSON and CSV files.
DATABASES: dict[str, dict[str, str]] = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True

# Solver tunables
TRIMBARY_THREADS = int(os.environ.get("OT_TRIMBARY_THREADS", "0"))  # 0 = CPU count
TRIMBARY_QUANTILE_GRID = 1000
TRIMBARY_DEFAULT_SEED = 0
TRIMBARY_DEFAULT_STARTS = 10
TRIMBARY_MAX_ITERATIONS = 200

# Logging goes to stderr so stdout carries only command output
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "console": {"class": "logging.StreamHandler", "formatter": "plain"},
    },
    "loggers": {
        "trimbary": {
            "handlers": ["console"],
            "level": os.environ.get("TRIMBARY_LOG_LEVEL", "WARNING"),
            "propagate": False,
        },
    },
}
