from django.apps import AppConfig
from django.conf import settings


class NnConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "radchar.apps.nn"
    verbose_name = "Neural Network Core"

    def ready(self):
        from .tensor import Tensor

        Tensor.check_finite = bool(getattr(settings, "RADCHAR_CHECK_FINITE", True))
