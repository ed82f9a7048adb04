from typing import Optional

from ..config import SearchConfig
from ..exceptions import CheckpointError, EvaluatorUnavailable
from ..genome import Genome
from ..micronet.attacks import AttackSpec
from ..micronet.training import build_dataset, evaluate, load_supernet
from .base import Evaluator, Objectives


class MicronetEvaluator(Evaluator):
    """
    Evaluate genomes as paths of a trained supernet.

    Both fidelities use the FGSM proxy; low fidelity only sees a fixed
    subsample of `low_fidelity_fraction` of the validation split.
    """

    def __init__(self, config: SearchConfig, checkpoint: Optional[str] = None):
        super().__init__(config)
        path = checkpoint or config.checkpoint
        if not path:
            raise EvaluatorUnavailable(
                "The micronet evaluator requires a supernet `checkpoint`."
            )
        try:
            self.supernet, self.training_config = load_supernet(path)
        except CheckpointError as exc:
            raise EvaluatorUnavailable(str(exc)) from exc
        self.supernet.requires_grad_(False)
        self.split = build_dataset(self.training_config).val
        self.attack = AttackSpec.fgsm(config.epsilon)

    def _evaluate(self, genome: Genome, fraction: float) -> Objectives:
        clean_error, adv_error = evaluate(
            self.supernet.view(genome),
            self.split,
            self.attack,
            fraction=fraction,
            seed=self.config.master_seed,
        )
        assert adv_error is not None
        return clean_error, adv_error

    def evaluate_low(self, genome: Genome) -> Objectives:
        return self._evaluate(genome, self.config.low_fidelity_fraction)

    def evaluate_high(self, genome: Genome) -> Objectives:
        return self._evaluate(genome, 1.0)
