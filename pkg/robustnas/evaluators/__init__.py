from functools import lru_cache
from typing import Any, Dict, Tuple, Type

from django.core.exceptions import ImproperlyConfigured
from django.utils.module_loading import import_string

from .. import conf
from ..config import SearchConfig
from .base import Evaluator

__all__ = ("Evaluator", "get_evaluator", "load_backend_class")


def _backend_setting(name: str) -> Tuple[str, Dict[str, Any]]:
    try:
        config = conf.EVALUATORS[name]
    except KeyError:
        raise ImproperlyConfigured(
            f"Unknown evaluator '{name}', expected one of "
            f"{', '.join(sorted(conf.EVALUATORS))}."
        )
    if isinstance(config, str):
        return config, {}
    if isinstance(config, dict) and config.get("backend"):
        options = config.copy()
        return options.pop("backend"), options
    raise ImproperlyConfigured(
        f"The `ROBUSTNAS_EVALUATORS['{name}']` setting must either be an import "
        "path string or a dict with a 'backend' path key string"
    )


@lru_cache(maxsize=None)
def _import_backend(backend_path: str) -> Type[Evaluator]:
    backend_cls = import_string(backend_path)
    if not (isinstance(backend_cls, type) and issubclass(backend_cls, Evaluator)):
        raise TypeError(f"{backend_path} is not an Evaluator subclass")
    return backend_cls


def load_backend_class(name: str) -> Type[Evaluator]:
    backend_path, _ = _backend_setting(name)
    try:
        return _import_backend(backend_path)
    except (ImportError, TypeError) as exc:
        raise ImproperlyConfigured(
            f"Cannot import `ROBUSTNAS_EVALUATORS` backend '{backend_path}'"
        ) from exc


def get_evaluator(config: SearchConfig, **options) -> Evaluator:
    """
    Instantiate the evaluator backend named by `config.evaluator` with the
    options of its setting entry updated with `options`.
    """
    backend_cls = load_backend_class(config.evaluator)
    _, backend_options = _backend_setting(config.evaluator)
    backend_options.update(options)
    try:
        return backend_cls(config, **backend_options)
    except TypeError as exc:
        raise ImproperlyConfigured(
            f"Cannot initialize `ROBUSTNAS_EVALUATORS` backend '{config.evaluator}' "
            f"with {backend_options!r}"
        ) from exc
