import hashlib
from typing import Tuple

import numpy as np

from ..constants import GENOME_LENGTH, Fidelity, Operation
from ..genome import Genome, count_operations, decode, longest_path, to_string
from .base import Evaluator, Objectives

__all__ = ("SyntheticEvaluator", "synthetic_objectives")

NOISE_BOUND = 0.05
MAX_DEPTH = 4


def _clamp(value: float, lower: float, upper: float) -> float:
    return min(max(value, lower), upper)


def _pseudo_noise(genome: Genome, index: int, noise_seed: int) -> float:
    key = f"{to_string(genome)}|{index}|{noise_seed}".encode()
    digest = hashlib.sha256(key).digest()
    unit = int.from_bytes(digest[:8], "big") / 2**64
    return -NOISE_BOUND + 2 * NOISE_BOUND * unit


def synthetic_objectives(
    genome: Genome, fidelity: Fidelity, noise_seed: int = 0
) -> Tuple[float, float]:
    """
    Closed form stand-in for supernet evaluation.

    Convolution-rich genomes get a lower clean error and deep genomes a lower
    adversarial error. Low fidelity adds a deterministic offset within
    +/-0.05 per objective.
    """
    conv_ratio = (
        count_operations(genome, (Operation.SEP_CONV_3X3, Operation.RES_SEP_CONV_3X3))
        / GENOME_LENGTH
    )
    depth = float(np.mean([longest_path(dag) / MAX_DEPTH for dag in decode(genome).blocks]))
    f1 = _clamp(0.1 + 0.4 * (1 - conv_ratio) + 0.2 * depth, 0.05, 0.95)
    f2 = _clamp(0.2 + 0.4 * (1 - depth) + 0.2 * conv_ratio, 0.05, 0.95)
    if Fidelity(fidelity) is Fidelity.HIGH:
        return f1, f2
    return (
        _clamp(f1 + _pseudo_noise(genome, 0, noise_seed), 0.0, 1.0),
        _clamp(f2 + _pseudo_noise(genome, 1, noise_seed), 0.0, 1.0),
    )


class SyntheticEvaluator(Evaluator):
    def evaluate_low(self, genome: Genome) -> Objectives:
        return synthetic_objectives(genome, Fidelity.LOW, self.config.master_seed)

    def evaluate_high(self, genome: Genome) -> Objectives:
        return synthetic_objectives(genome, Fidelity.HIGH, self.config.master_seed)
