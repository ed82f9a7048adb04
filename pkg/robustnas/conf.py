import os
from typing import Any, Dict, Union

from django.conf import settings

__all__ = (
    "EVALUATORS",
    "OUTPUT_ROOT",
    "SEARCH_DEFAULTS",
    "WORKERS",
)

EvaluatorsSetting = Dict[str, Union[str, Dict[str, Any]]]

DEFAULT_EVALUATORS: EvaluatorsSetting = {
    "synthetic": "robustnas.evaluators.synthetic.SyntheticEvaluator",
    "micronet": "robustnas.evaluators.micronet.MicronetEvaluator",
}

OUTPUT_ROOT: str
WORKERS: int
EVALUATORS: EvaluatorsSetting
SEARCH_DEFAULTS: Dict[str, Any]


def _configure() -> None:
    global OUTPUT_ROOT
    global WORKERS
    global EVALUATORS
    global SEARCH_DEFAULTS
    OUTPUT_ROOT = os.environ.get(
        "ROBUSTNAS_OUTPUT_ROOT", getattr(settings, "ROBUSTNAS_OUTPUT_ROOT", "runs")
    )
    WORKERS = getattr(settings, "ROBUSTNAS_WORKERS", 1)
    EVALUATORS = {
        **DEFAULT_EVALUATORS,
        **getattr(settings, "ROBUSTNAS_EVALUATORS", {}),
    }
    SEARCH_DEFAULTS = dict(getattr(settings, "ROBUSTNAS_SEARCH_DEFAULTS", {}))


watched_settings = {
    "ROBUSTNAS_OUTPUT_ROOT",
    "ROBUSTNAS_WORKERS",
    "ROBUSTNAS_EVALUATORS",
    "ROBUSTNAS_SEARCH_DEFAULTS",
}


def _watch_settings(setting, **kwargs):
    if setting in watched_settings:
        _configure()
