import dataclasses
import logging
import time
from dataclasses import dataclass, field
from multiprocessing.pool import ThreadPool
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

from .evo import dominates, nondominated_fronts
from .exceptions import EmptyInput
from .genome import Genome

__all__ = ("Archive", "EvaluationRecord", "secondary_screening")

logger = logging.getLogger(__name__)

ObjectiveKey = Callable[["EvaluationRecord"], Tuple[float, ...]]


@dataclass
class EvaluationRecord:
    genome: Genome
    f1l: Optional[float] = None
    f2l: Optional[float] = None
    f1h: Optional[float] = None
    f2h: Optional[float] = None
    f3: Optional[float] = None
    generation: int = 0
    low_evaluated_at: Optional[float] = field(default=None, compare=False)
    high_evaluated_at: Optional[float] = field(default=None, compare=False)

    @property
    def has_low(self) -> bool:
        return self.f1l is not None

    @property
    def has_high(self) -> bool:
        return self.f1h is not None

    def set_low(self, objectives: Tuple[float, float]) -> None:
        self.f1l, self.f2l = objectives
        self.low_evaluated_at = time.time()

    def set_high(self, objectives: Tuple[float, float]) -> None:
        self.f1h, self.f2h = objectives
        self.high_evaluated_at = time.time()

    def low(self) -> Tuple[float, float]:
        return (self.f1l, self.f2l)  # type: ignore[return-value]

    def high(self) -> Tuple[float, float]:
        return (self.f1h, self.f2h)  # type: ignore[return-value]


class Archive:
    """
    Mutually non-dominated records under the objectives they were inserted
    with, one per genome.

    Records are copied on insertion so later updates of the originals (a new
    surrogate prediction) don't alter archived values.
    """

    def __init__(self, objectives: ObjectiveKey):
        self.objectives = objectives
        self._members: Dict[Genome, Tuple[EvaluationRecord, Tuple[float, ...]]] = {}

    def __len__(self) -> int:
        return len(self._members)

    def __iter__(self) -> Iterator[EvaluationRecord]:
        return (record for record, _ in self._members.values())

    def __contains__(self, genome: object) -> bool:
        return genome in self._members

    @property
    def records(self) -> List[EvaluationRecord]:
        return list(self)

    def insertion_objectives(self) -> List[Tuple[float, ...]]:
        return [objectives for _, objectives in self._members.values()]

    def insert(self, record: EvaluationRecord, generation: Optional[int] = None) -> bool:
        """
        Admit a copy of `record` unless it is dominated or already archived,
        stamped with the `generation` it enters the archive at when given.
        """
        if record.genome in self._members:
            return False
        candidate = tuple(self.objectives(record))
        for _, objectives in self._members.values():
            if dominates(objectives, candidate):
                return False
        self._members = {
            genome: member
            for genome, member in self._members.items()
            if not dominates(candidate, member[1])
        }
        stored = dataclasses.replace(record)
        if generation is not None:
            stored.generation = generation
        self._members[record.genome] = (stored, candidate)
        return True

    def update(
        self, records: Sequence[EvaluationRecord], generation: Optional[int] = None
    ) -> int:
        """Insert `records` in order and return how many were admitted."""
        return sum(self.insert(record, generation) for record in records)


def secondary_screening(
    records: Sequence[EvaluationRecord],
    evaluate_high: Callable[[Genome], Tuple[float, float]],
    workers: int = 1,
) -> List[EvaluationRecord]:
    """
    Evaluate every record at high fidelity and keep the non-dominated ones
    under (f1h, f2h), in archive order.
    """
    if not records:
        raise EmptyInput("Cannot screen an empty archive.")
    screened = [dataclasses.replace(record) for record in records]
    missing = [record for record in screened if not record.has_high]
    if workers > 1 and len(missing) > 1:
        with ThreadPool(workers) as pool:
            results = pool.map(evaluate_high, [record.genome for record in missing])
    else:
        results = [evaluate_high(record.genome) for record in missing]
    for record, objectives in zip(missing, results):
        record.set_high(objectives)
    front = nondominated_fronts([record.high() for record in screened])[0]
    logger.info("Screened %d archived architectures down to %d", len(screened), len(front))
    return [screened[index] for index in front]
