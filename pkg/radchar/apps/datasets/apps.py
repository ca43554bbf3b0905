from django.apps import AppConfig


class DatasetsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "radchar.apps.datasets"
    verbose_name = "Datasets"
