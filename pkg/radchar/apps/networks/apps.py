from django.apps import AppConfig


class NetworksConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "radchar.apps.networks"
    verbose_name = "Multi-Task Networks"
