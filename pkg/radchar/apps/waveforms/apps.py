from django.apps import AppConfig


class WaveformsConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "radchar.apps.waveforms"
    verbose_name = "Waveform Synthesis"
