from .base import *  # noqa: F403
from .base import env

# GENERAL
# ------------------------------------------------------------------------------
# https://docs.djangoproject.com/en/dev/ref/settings/#debug
DEBUG = True
# https://docs.djangoproject.com/en/dev/ref/settings/#secret-key
SECRET_KEY = env(
    "DJANGO_SECRET_KEY",
    default="csFqLJVHOGxNQzcGD3LHtT1vt6sEApqFH9dWhyCufvEwiCf74QsUqoQj9SJe87Zv",
)
