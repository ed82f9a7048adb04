from .constants import Mode, Operation, SurrogateKind
from .exceptions import ConfigError
from .genome import Genome, parse, to_string

__all__ = (
    "ConfigError",
    "Genome",
    "Mode",
    "Operation",
    "SurrogateKind",
    "parse",
    "to_string",
)

__version__ = "0.1.0"
