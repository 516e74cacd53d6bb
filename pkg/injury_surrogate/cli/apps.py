from django.apps import AppConfig


class CliConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "injury_surrogate.cli"
    label = "surrogate_cli"
    verbose_name = "Injury surrogate command line"
