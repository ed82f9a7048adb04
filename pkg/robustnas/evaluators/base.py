from abc import ABC, abstractmethod
from typing import Tuple

from ..config import SearchConfig
from ..genome import Genome

Objectives = Tuple[float, float]


class Evaluator(ABC):
    """
    A source of the two error-rate objectives (clean error, adversarial error)
    of genomes at low and high fidelity.

    Both methods must be deterministic functions of the genome and the
    configuration's master seed and safe to call from several threads.
    """

    def __init__(self, config: SearchConfig):
        self.config = config

    @abstractmethod
    def evaluate_low(self, genome: Genome) -> Objectives:
        """Return the cheap, noisy estimate of `genome`'s objectives."""

    @abstractmethod
    def evaluate_high(self, genome: Genome) -> Objectives:
        """Return the accurate estimate of `genome`'s objectives."""
