import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Any, Dict, Optional, Tuple, Type, TypeVar

from .constants import AttackKind, Mode, SurrogateKind
from .evo import EvoParams
from .exceptions import ConfigError

__all__ = (
    "SearchConfig",
    "TrainingConfig",
    "load_search_config",
    "load_training_config",
)

ConfigType = TypeVar("ConfigType", bound="BaseConfig")


def _check_type(name: str, value: Any, expected: Any) -> Any:
    if expected is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"`{name}` must be a number, got {value!r}.")
        return float(value)
    if expected is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"`{name}` must be an integer, got {value!r}.")
        return value
    if expected is str:
        if not isinstance(value, str):
            raise ConfigError(f"`{name}` must be a string, got {value!r}.")
        return value
    return value


class BaseConfig:
    """Flat, JSON serializable configuration with strict key checking."""

    _types: Dict[str, Any] = {}
    _nullable: Tuple[str, ...] = ()

    @classmethod
    def from_dict(cls: Type[ConfigType], data: Dict[str, Any]) -> ConfigType:
        if not isinstance(data, dict):
            raise ConfigError("Configuration must be a JSON object.")
        known = {field.name for field in fields(cls)}  # type: ignore[arg-type]
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {', '.join(unknown)}.")
        values = {
            name: value
            if value is None and name in cls._nullable
            else _check_type(name, value, cls._types.get(name))
            for name, value in data.items()
        }
        try:
            return cls(**values)  # type: ignore[call-arg]
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)  # type: ignore[call-overload]
        for name, value in data.items():
            if isinstance(value, (Mode, SurrogateKind, AttackKind)):
                data[name] = value.value
            elif isinstance(value, tuple):
                data[name] = list(value)
        return data

    def replace(self: ConfigType, **changes) -> ConfigType:
        return self.from_dict({**self.to_dict(), **changes})


@dataclass(frozen=True)
class SearchConfig(BaseConfig):
    population_size: int = 100
    max_generations: int = 100
    surrogate_update_interval: int = 20
    infill_count: int = 10
    initial_samples: int = 200
    low_fidelity_fraction: float = 0.2
    surrogate: SurrogateKind = SurrogateKind.RBF
    mode: Mode = Mode.SURROGATE_HELPER
    evaluator: str = "synthetic"
    master_seed: int = 0
    wall_clock_budget: Optional[float] = None
    checkpoint: Optional[str] = None
    crossover_prob: float = 0.9
    mutation_prob: float = 0.02
    sbx_eta: float = 15.0
    pm_eta: float = 20.0
    epsilon: float = 8 / 255

    _types = {
        "population_size": int,
        "max_generations": int,
        "surrogate_update_interval": int,
        "infill_count": int,
        "initial_samples": int,
        "low_fidelity_fraction": float,
        "evaluator": str,
        "master_seed": int,
        "wall_clock_budget": float,
        "checkpoint": str,
        "crossover_prob": float,
        "mutation_prob": float,
        "sbx_eta": float,
        "pm_eta": float,
        "epsilon": float,
    }
    _nullable = ("wall_clock_budget", "checkpoint")

    def __post_init__(self):
        try:
            object.__setattr__(self, "mode", Mode(self.mode))
            object.__setattr__(self, "surrogate", SurrogateKind(self.surrogate))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        interval = self.surrogate_update_interval
        if interval < 1:
            raise ConfigError("`surrogate_update_interval` must be positive.")
        if self.max_generations < interval or self.max_generations % interval:
            raise ConfigError(
                f"`max_generations` ({self.max_generations}) must be a positive "
                f"multiple of `surrogate_update_interval` ({interval})."
            )
        if not 0 <= self.infill_count < self.population_size:
            raise ConfigError(
                f"`infill_count` must be within [0, {self.population_size}), "
                f"got {self.infill_count}."
            )
        if self.initial_samples < 2:
            raise ConfigError(
                f"`initial_samples` must be at least 2, got {self.initial_samples}."
            )
        if not 0 < self.low_fidelity_fraction <= 1:
            raise ConfigError(
                "`low_fidelity_fraction` must be within (0, 1], "
                f"got {self.low_fidelity_fraction}."
            )
        if self.wall_clock_budget is not None and not (
            isinstance(self.wall_clock_budget, (int, float))
            and self.wall_clock_budget > 0
            and math.isfinite(self.wall_clock_budget)
        ):
            raise ConfigError("`wall_clock_budget` must be a positive number of seconds.")
        self.evo_params()

    @property
    def update_count(self) -> int:
        return self.max_generations // self.surrogate_update_interval

    def evo_params(self) -> EvoParams:
        return EvoParams(
            population_size=self.population_size,
            crossover_prob=self.crossover_prob,
            mutation_prob=self.mutation_prob,
            sbx_eta=self.sbx_eta,
            pm_eta=self.pm_eta,
        )


@dataclass(frozen=True)
class TrainingConfig(BaseConfig):
    seed: int = 0
    n_train: int = 2048
    n_val: int = 256
    noise: float = 0.15
    width: int = 8
    final_width: int = 8
    epochs: int = 20
    final_epochs: int = 20
    batch_size: int = 64
    learning_rate: float = 0.05
    momentum: float = 0.9
    weight_decay: float = 1e-4
    grad_clip_norm: float = 5.0
    attack: AttackKind = AttackKind.PGD
    epsilon: float = 8 / 255
    step_size: float = 2 / 255
    attack_steps: int = 7
    eval_pgd_steps: Tuple[int, ...] = (7, 20)

    _types = {
        "seed": int,
        "n_train": int,
        "n_val": int,
        "noise": float,
        "width": int,
        "final_width": int,
        "epochs": int,
        "final_epochs": int,
        "batch_size": int,
        "learning_rate": float,
        "momentum": float,
        "weight_decay": float,
        "grad_clip_norm": float,
        "epsilon": float,
        "step_size": float,
        "attack_steps": int,
    }

    def __post_init__(self):
        try:
            object.__setattr__(self, "attack", AttackKind(self.attack))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        steps = self.eval_pgd_steps
        if not isinstance(steps, (list, tuple)) or not all(
            isinstance(step, int) and not isinstance(step, bool) and step >= 1
            for step in steps
        ):
            raise ConfigError("`eval_pgd_steps` must be a list of positive integers.")
        object.__setattr__(self, "eval_pgd_steps", tuple(sorted(set(steps))))
        for name in ("n_train", "n_val"):
            if getattr(self, name) < 4:
                raise ConfigError(f"`{name}` must be at least 4.")
        for name in ("width", "final_width", "batch_size", "attack_steps"):
            if getattr(self, name) < 1:
                raise ConfigError(f"`{name}` must be positive.")
        for name in ("epochs", "final_epochs"):
            if getattr(self, name) < 0:
                raise ConfigError(f"`{name}` must not be negative.")
        if self.grad_clip_norm <= 0:
            raise ConfigError("`grad_clip_norm` must be positive.")
        if self.epsilon < 0 or self.step_size < 0 or self.learning_rate <= 0:
            raise ConfigError(
                "`epsilon` and `step_size` must be non-negative and "
                "`learning_rate` positive."
            )


def _read_json(path) -> Dict[str, Any]:
    try:
        with open(path) as file_:
            return json.load(file_)
    except FileNotFoundError as exc:
        raise ConfigError(f"Configuration file {path} does not exist.") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Configuration file {path} is not valid JSON: {exc}.") from exc


def load_search_config(path=None, **overrides) -> SearchConfig:
    """
    Load a `SearchConfig` from the JSON file at `path`, layered over the
    `ROBUSTNAS_SEARCH_DEFAULTS` setting. Overrides that are `None` are ignored.
    """
    from . import conf

    data: Dict[str, Any] = dict(conf.SEARCH_DEFAULTS)
    if path is not None:
        data.update(_read_json(path))
    data.update({key: value for key, value in overrides.items() if value is not None})
    return SearchConfig.from_dict(data)


def load_training_config(path=None, **overrides) -> TrainingConfig:
    data: Dict[str, Any] = {}
    if path is not None:
        data.update(_read_json(path))
    data.update({key: value for key, value in overrides.items() if value is not None})
    return TrainingConfig.from_dict(data)
