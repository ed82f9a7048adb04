from django.core.checks import Error
from django.core.exceptions import ImproperlyConfigured

from . import conf
from .config import SearchConfig
from .exceptions import ConfigError


def check_settings(app_configs, **kwargs):
    errors = []
    try:
        SearchConfig.from_dict(conf.SEARCH_DEFAULTS)
    except ConfigError as exc:
        errors.append(
            Error(
                str(exc),
                hint="Fix the `ROBUSTNAS_SEARCH_DEFAULTS` setting.",
                obj="ROBUSTNAS_SEARCH_DEFAULTS",
                id="robustnas.E001",
            )
        )
    # Imported here as evaluator backends import the search stack.
    from .evaluators import load_backend_class

    for name in sorted(conf.EVALUATORS):
        try:
            load_backend_class(name)
        except ImproperlyConfigured as exc:
            errors.append(
                Error(
                    str(exc),
                    hint="Point it to an importable `Evaluator` subclass.",
                    obj="ROBUSTNAS_EVALUATORS",
                    id="robustnas.E002",
                )
            )
    workers = conf.WORKERS
    if isinstance(workers, bool) or not isinstance(workers, int) or workers < 1:
        errors.append(
            Error(
                f"`ROBUSTNAS_WORKERS` must be a positive integer, got {workers!r}.",
                obj="ROBUSTNAS_WORKERS",
                id="robustnas.E003",
            )
        )
    return errors
