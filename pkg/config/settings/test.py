"""
With these settings, tests run faster.
"""

from .base import *  # noqa: F403
from .base import LOGGING

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#test-runner
TEST_RUNNER = "django.test.runner.DiscoverRunner"

# LOGGING
# ------------------------------------------------------------------------------
LOGGING["root"]["level"] = "WARNING"  # type: ignore[index]
