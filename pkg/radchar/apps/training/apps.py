from django.apps import AppConfig


class TrainingConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "radchar.apps.training"
    verbose_name = "Training and Evaluation"
