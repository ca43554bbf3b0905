"""
Django settings for the RadChar project.

The project has no web surface and no database; Django provides the
management-command CLI, the settings layer and the test runner.
"""

import os
import sys
from pathlib import Path

from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent
RUNNING_TESTS = "test" in sys.argv


# Load environment variables from a .env file when present.
load_dotenv(BASE_DIR / ".env")


# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = os.getenv(
    "DJANGO_SECRET_KEY",
    "radchar-insecure-7w!c2p#v0k$3m9q@x1z8r5t6y4u2i0o",
)

DEBUG = os.getenv("DJANGO_DEBUG", "false").lower() == "true"

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    "radchar.apps.core",
    "radchar.apps.waveforms",
    "radchar.apps.datasets",
    "radchar.apps.nn",
    "radchar.apps.networks",
    "radchar.apps.training",
]

# No persistence beyond the dataset and checkpoint files.
DATABASES = {}

DEFAULT_AUTO_FIELD = "django.db.models.BigAutoField"

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# RadChar configuration

RADCHAR_DATA_DIR = Path(os.getenv("RADCHAR_DATA_DIR", BASE_DIR / "data"))

# Desk-scale default; the full-size dataset is 1 000 000 records.
RADCHAR_DEFAULT_COUNT = int(os.getenv("RADCHAR_DEFAULT_COUNT", "100000"))

RADCHAR_WORKERS = int(os.getenv("RADCHAR_WORKERS", "1"))

RADCHAR_CHECK_FINITE = os.getenv("RADCHAR_CHECK_FINITE", "true").lower() == "true"

RADCHAR_PROGRESS = os.getenv("RADCHAR_PROGRESS", "true").lower() == "true"
if RUNNING_TESTS:
    RADCHAR_PROGRESS = False


# Logging

RADCHAR_LOG_LEVEL = os.getenv("RADCHAR_LOG_LEVEL", "WARNING" if RUNNING_TESTS else "INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers": {
        "radchar": {
            "handlers": ["console"],
            "level": RADCHAR_LOG_LEVEL,
            "propagate": False,
        },
    },
}
