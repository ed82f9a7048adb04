"""
Bi-fidelity, surrogate assisted evolutionary architecture search.

The population evolves with NSGA-II on cheap low-fidelity objectives, helped
by a third objective predicted by a surrogate of the expensive high-fidelity
score. Every `surrogate_update_interval` generations the surrogate's training
set is grown with `infill_count` high-fidelity evaluated individuals and the
surrogate is refitted.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from multiprocessing.pool import ThreadPool
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from . import surrogate
from .archive import Archive, EvaluationRecord
from .config import SearchConfig
from .constants import Mode
from .evaluators.base import Evaluator
from .evo import (
    Individual,
    assign_crowding,
    fast_nondominated_sort,
    lhs_sample,
    make_offspring,
    next_generation,
    nondominated_fronts,
)
from .exceptions import BudgetExceeded
from .gates import GatesEncoder
from .genome import Genome, random_genome
from .indicators import hypervolume
from .surrogate import SurrogateModel, TrainingSet

__all__ = (
    "GenerationLog",
    "SearchResult",
    "infill_select",
    "objective_key",
    "run_search",
)

logger = logging.getLogger(__name__)

REFERENCE_POINT = (1.0, 1.0)


class GenerationLog(NamedTuple):
    generation: int
    archive_size: int
    hypervolume: float
    high_fidelity_evaluations: int
    elapsed: float


@dataclass
class SearchResult:
    archive: Archive
    history: List[GenerationLog]
    training_set: TrainingSet
    high_fidelity_evaluations: int = 0
    surrogate_refits: int = 0
    budget_exhausted: bool = False
    surrogate: Optional[SurrogateModel] = None
    population: List[Individual] = field(default_factory=list)


def objective_key(mode: Mode) -> Callable[[EvaluationRecord], Tuple[float, ...]]:
    """Return the objective vector each search mode selects on."""
    if mode is Mode.SURROGATE_HELPER:
        return lambda record: (record.f1l, record.f2l, record.f3)  # type: ignore
    if mode is Mode.LOW:
        return lambda record: (record.f1l, record.f2l)  # type: ignore
    if mode is Mode.HIGH:
        return lambda record: (record.f1h, record.f2h)  # type: ignore
    return lambda record: (record.f3,)  # type: ignore


def _uses_surrogate(mode: Mode) -> bool:
    return mode in (Mode.SURROGATE_HELPER, Mode.SURROGATE)


def infill_select(
    candidates: Sequence[Genome],
    predictions: Sequence[float],
    embeddings: np.ndarray,
    training_set: TrainingSet,
    k: int,
) -> List[Genome]:
    """
    Select up to `k` genomes of `candidates` to evaluate at high fidelity.

    The first ceil(k/2) are the most promising (lowest predicted score), the
    remaining floor(k/2) the most uncertain (farthest embedding from their
    nearest training sample). Ties go to the lowest candidate index. Genomes
    already in `training_set` and repeated candidates are never selected;
    any shortfall is filled with the next most promising candidates.
    """
    pool: List[int] = []
    seen = set()
    for index, genome in enumerate(candidates):
        if genome in training_set or genome in seen:
            continue
        seen.add(genome)
        pool.append(index)
    if not pool:
        logger.warning("No infill candidate outside of the surrogate training set")
        return []
    promising = sorted(pool, key=lambda index: (predictions[index], index))
    selected = promising[: math.ceil(k / 2)]
    chosen = set(selected)
    remaining = [index for index in pool if index not in chosen]
    if remaining and k // 2 and len(training_set):
        distances = cdist(
            np.asarray(embeddings)[remaining], training_set.embeddings
        ).min(axis=1)
        order = sorted(
            range(len(remaining)),
            key=lambda position: (-distances[position], remaining[position]),
        )
        uncertain = [remaining[position] for position in order[: k // 2]]
        selected.extend(uncertain)
        chosen.update(uncertain)
    for index in promising:
        if len(selected) >= k:
            break
        if index not in chosen:
            selected.append(index)
            chosen.add(index)
    return [candidates[index] for index in selected]


class _Evaluations:
    """Per-genome cache of evaluator results, filled by a worker pool."""

    def __init__(self, evaluator: Evaluator, workers: int):
        self.evaluator = evaluator
        self.workers = workers
        self.records: Dict[Genome, EvaluationRecord] = {}
        self.high_count = 0

    def record(self, genome: Genome, generation: int) -> EvaluationRecord:
        if genome not in self.records:
            self.records[genome] = EvaluationRecord(genome, generation=generation)
        return self.records[genome]

    def _map(self, function, genomes: List[Genome]) -> list:
        if self.workers > 1 and len(genomes) > 1:
            with ThreadPool(self.workers) as pool:
                return pool.map(function, genomes)
        return [function(genome) for genome in genomes]

    def low(self, genomes: Sequence[Genome], generation: int) -> None:
        missing = list(
            dict.fromkeys(
                genome for genome in genomes if not self.record(genome, generation).has_low
            )
        )
        for genome, objectives in zip(
            missing, self._map(self.evaluator.evaluate_low, missing)
        ):
            self.records[genome].set_low(objectives)

    def high(self, genomes: Sequence[Genome], generation: int) -> None:
        missing = list(
            dict.fromkeys(
                genome for genome in genomes if not self.record(genome, generation).has_high
            )
        )
        for genome, objectives in zip(
            missing, self._map(self.evaluator.evaluate_high, missing)
        ):
            self.records[genome].set_high(objectives)
        self.high_count += len(missing)


def _refit_seed(master_seed: int, update: int) -> int:
    return int(np.random.SeedSequence([master_seed, 3, update]).generate_state(1)[0])


class _Search:
    def __init__(self, config: SearchConfig, evaluator: Evaluator, workers: int):
        self.config = config
        self.mode = config.mode
        self.params = config.evo_params()
        self.evaluations = _Evaluations(evaluator, workers)
        self.encoder = GatesEncoder(config.master_seed)
        self.key = objective_key(self.mode)
        self.training_set = TrainingSet()
        self.model: Optional[SurrogateModel] = None
        self.result = SearchResult(Archive(self.key), [], self.training_set)
        self.rng = np.random.default_rng([config.master_seed, 0])
        self.started = time.monotonic()

    def _grow_training_set(self, genomes: Sequence[Genome], generation: int) -> None:
        self.evaluations.high(genomes, generation)
        for genome in genomes:
            record = self.evaluations.records[genome]
            self.training_set.add(
                genome, self.encoder.embed(genome), record.f1h, record.f2h
            )

    def _predict(self, records: Sequence[EvaluationRecord]) -> None:
        if self.model is None or not records:
            return
        embeddings = self.encoder.embed_many([record.genome for record in records])
        for record, value in zip(records, surrogate.predict_many(self.model, embeddings)):
            record.f3 = float(value)

    def evaluate(self, genomes: Sequence[Genome], generation: int) -> List[Individual]:
        records = [self.evaluations.record(genome, generation) for genome in genomes]
        if self.mode in (Mode.SURROGATE_HELPER, Mode.LOW):
            self.evaluations.low(genomes, generation)
        elif self.mode is Mode.HIGH:
            self.evaluations.high(genomes, generation)
        self._predict(records)
        return [
            Individual(
                record.genome,
                tuple(self.key(record)),
                generation=generation,
                record=record,
            )
            for record in records
        ]

    def refit(self, update: int) -> None:
        self.model = surrogate.fit(
            self.config.surrogate,
            self.training_set,
            _refit_seed(self.config.master_seed, update),
        )
        self.result.surrogate = self.model
        self.result.surrogate_refits += 1

    def reevaluate(self, population: List[Individual]) -> List[Individual]:
        self._predict([individual.record for individual in population])
        for individual in population:
            individual.objectives = tuple(self.key(individual.record))
        for front in fast_nondominated_sort(population):
            assign_crowding(population, front)
        return population

    def front_hypervolume(self) -> float:
        if self.mode is Mode.SURROGATE:
            points = [(record.f1h, record.f2h) for record in self.training_set]
        elif self.mode is Mode.HIGH:
            points = [record.high() for record in self.result.archive]
        else:
            points = [record.low() for record in self.result.archive]
        if not points:
            return 0.0
        front = nondominated_fronts(points)[0]
        return hypervolume([points[index] for index in front], REFERENCE_POINT)

    def log_generation(self, generation: int) -> None:
        self.result.history.append(
            GenerationLog(
                generation,
                len(self.result.archive),
                self.front_hypervolume(),
                self.evaluations.high_count,
                time.monotonic() - self.started,
            )
        )
        budget = self.config.wall_clock_budget
        if budget is not None and time.monotonic() - self.started > budget:
            raise BudgetExceeded(
                f"Wall clock budget of {budget}s exhausted after generation {generation}."
            )

    def infill(self, population: Sequence[Individual], generation: int) -> None:
        genomes = [individual.genome for individual in population]
        selected = infill_select(
            genomes,
            [individual.record.f3 for individual in population],
            self.encoder.embed_many(genomes),
            self.training_set,
            self.config.infill_count,
        )
        self._grow_training_set(selected, generation)
        logger.info(
            "Infilled %d architectures, surrogate training set has %d samples",
            len(selected),
            len(self.training_set),
        )

    def run(self) -> SearchResult:
        config = self.config
        if _uses_surrogate(self.mode):
            initial = lhs_sample(
                config.initial_samples, np.random.default_rng([config.master_seed, 1])
            )
            self._grow_training_set(initial, 0)
        population = self.evaluate(
            [random_genome(self.rng) for _ in range(config.population_size)], 0
        )
        generation = 0
        try:
            for update in range(1, config.update_count + 1):
                if _uses_surrogate(self.mode):
                    self.refit(update)
                population = self.reevaluate(population)
                for _ in range(config.surrogate_update_interval):
                    generation += 1
                    offspring = self.evaluate(
                        make_offspring(population, self.params, self.rng), generation
                    )
                    union = population + offspring
                    population = next_generation(population, offspring, self.params)
                    self.result.archive.update(
                        [individual.record for individual in union if individual.rank == 0],
                        generation,
                    )
                    self.log_generation(generation)
                if update != config.update_count and _uses_surrogate(self.mode):
                    self.infill(population, generation)
        except BudgetExceeded as exc:
            logger.info("%s", exc)
            self.result.budget_exhausted = True
        self.result.population = population
        self.result.high_fidelity_evaluations = self.evaluations.high_count
        return self.result


def run_search(
    config: SearchConfig, evaluator: Evaluator, workers: int = 1
) -> SearchResult:
    """
    Run the search described by `config` and return its archive, per
    generation history and counters.

    Results only depend on `config`; `workers` sets how many evaluations
    run concurrently.
    """
    logger.info(
        "Searching in mode %s with the %s evaluator", config.mode.value, config.evaluator
    )
    return _Search(config, evaluator, max(workers, 1)).run()
