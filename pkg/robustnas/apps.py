from django.apps import AppConfig
from django.core import checks
from django.core.signals import setting_changed

from .checks import check_settings
from .conf import _configure, _watch_settings


class RobustNasConfig(AppConfig):
    name = __package__
    label = "robustnas"
    verbose_name = "Robust architecture search"

    def ready(self):
        _configure()
        checks.register(check_settings, "robustnas")
        setting_changed.connect(_watch_settings)
