# ruff: noqa: E501
"""Base settings to build other settings files upon."""

from pathlib import Path

import environ

BASE_DIR = Path(__file__).resolve(strict=True).parent.parent.parent
# injury_surrogate/
APPS_DIR = BASE_DIR / "injury_surrogate"
env = environ.Env()

READ_DOT_ENV_FILE = env.bool("DJANGO_READ_DOT_ENV_FILE", default=False)
if READ_DOT_ENV_FILE:
    # OS environment variables take precedence over variables from .env
    env.read_env(str(BASE_DIR / ".env"))

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = env.bool("DJANGO_DEBUG", False)
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env("DJANGO_SECRET_KEY", default="injury-surrogate-command-line-only")
TIME_ZONE = "UTC"
# https://docs.djangoproject.com/en/dev/ref/settings/#language-code
LANGUAGE_CODE = "en-us"
# https://docs.djangoproject.com/en/dev/ref/settings/#use-i18n
USE_I18N = False
# https://docs.djangoproject.com/en/dev/ref/settings/#use-tz
USE_TZ = True

# DATABASES
# ------------------------------------------------------------------------------
# Ledgers and models are plain files; the project never opens a database.
DATABASES: dict = {}

# APPS
# ------------------------------------------------------------------------------
DJANGO_APPS = [
    "django.contrib.contenttypes",
]
LOCAL_APPS = [
    "injury_surrogate.cli",
]
INSTALLED_APPS = DJANGO_APPS + LOCAL_APPS

# LOGGING
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#logging
# See https://docs.djangoproject.com/en/dev/topics/logging for
# more details on how to customize your logging configuration.
LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(levelname)s %(asctime)s %(module)s %(process)d %(thread)d %(message)s",
        },
    },
    "handlers": {
        "console": {
            "level": "DEBUG",
            "class": "logging.StreamHandler",
            "formatter": "verbose",
        },
    },
    "root": {"level": env("DJANGO_LOG_LEVEL", default="INFO"), "handlers": ["console"]},
    "loggers": {
        # font and backend chatter while writing SVG files
        "matplotlib": {"level": "WARNING"},
    },
}

# SURROGATE
# ------------------------------------------------------------------------------
# Defaults for every run; a --config file and command-line flags override them.
SURROGATE = {
    "TORSO_ANGLE_RANGE": env.list("SURROGATE_TORSO_ANGLE_RANGE", cast=float, default=[-10.0, 10.0]),
    # table units as printed in the simulation results (-5 ... 5)
    "DRING_Z_RANGE": env.list("SURROGATE_DRING_Z_RANGE", cast=float, default=[-5.0, 5.0]),
    "METRIC": env("SURROGATE_METRIC", default="both"),
    "SMOOTHNESS": env("SURROGATE_SMOOTHNESS", default="5/2"),
    "SEED": env.int("SURROGATE_SEED", default=0),
    "RESTARTS": env.int("SURROGATE_RESTARTS", default=8),
    "LENGTHSCALE_BOUNDS": env.list("SURROGATE_LENGTHSCALE_BOUNDS", cast=float, default=[0.25, 5.0]),
    "SIGNAL_VARIANCE_BOUNDS": env.list("SURROGATE_SIGNAL_VARIANCE_BOUNDS", cast=float, default=[1e-3, 1e3]),
    "NOISE_VARIANCE_BOUNDS": env.list("SURROGATE_NOISE_VARIANCE_BOUNDS", cast=float, default=[1e-8, 1e-6]),
    "THRESHOLD_PCT": env.float("SURROGATE_THRESHOLD_PCT", default=10.0),
    "K": env.int("SURROGATE_K", default=5),
    "MAX_ROUNDS": env.int("SURROGATE_MAX_ROUNDS", default=5),
    "CANDIDATES": env("SURROGATE_CANDIDATES", default="grid-midpoints"),
    "CANDIDATE_FILE": env("SURROGATE_CANDIDATE_FILE", default=""),
    "CANDIDATE_POOL_SIZE": env.int("SURROGATE_CANDIDATE_POOL_SIZE", default=1000),
    "CANDIDATE_EDGE_MIDPOINTS": env.bool("SURROGATE_CANDIDATE_EDGE_MIDPOINTS", default=False),
    "AUGMENT_ALL": env.bool("SURROGATE_AUGMENT_ALL", default=False),
    "LHS_SAMPLES": env.int("SURROGATE_LHS_SAMPLES", default=10_000),
    "LHS_SEED": env.int("SURROGATE_LHS_SEED", default=0),
    "VAR_PERCENTILES": env.list("SURROGATE_VAR_PERCENTILES", cast=float, default=[90.0, 95.0]),
    "HISTOGRAM_BINS": env.int("SURROGATE_HISTOGRAM_BINS", default=100),
    "POSTERIOR_SAMPLING": env.bool("SURROGATE_POSTERIOR_SAMPLING", default=False),
    "OUT": env("SURROGATE_OUT", default=str(BASE_DIR / "surrogate_output")),
}
