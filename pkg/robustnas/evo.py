import math
from dataclasses import dataclass, field
from typing import Any, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from .constants import GENOME_LENGTH
from .exceptions import ArityMismatch, ConfigError, LengthMismatch
from .genome import Genome, validate

__all__ = (
    "EvoParams",
    "Individual",
    "assign_crowding",
    "binary_tournament",
    "crowding_distance",
    "dominates",
    "fast_nondominated_sort",
    "lhs_sample",
    "make_offspring",
    "next_generation",
    "nondominated_fronts",
    "polynomial_mutation",
    "sbx_crossover",
)

GENE_LOWER = 0.0
GENE_UPPER = 3.0


@dataclass(frozen=True)
class EvoParams:
    population_size: int = 100
    crossover_prob: float = 0.9
    mutation_prob: float = 0.02
    sbx_eta: float = 15.0
    pm_eta: float = 20.0
    gene_bounds: Tuple[float, float] = (GENE_LOWER, GENE_UPPER)

    def __post_init__(self):
        for name in ("crossover_prob", "mutation_prob"):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigError(f"{name} must be within [0, 1], got {value!r}.")
        if self.population_size < 4 or self.population_size % 2:
            raise ConfigError(
                f"population_size must be even and at least 4, got {self.population_size!r}."
            )
        if self.sbx_eta <= 0 or self.pm_eta <= 0:
            raise ConfigError("Distribution indices must be positive.")


@dataclass
class Individual:
    genome: Genome
    objectives: Tuple[float, ...]
    rank: Optional[int] = None
    crowding: Optional[float] = None
    generation: int = 0
    # The `archive.EvaluationRecord` the objectives were read from.
    record: Any = field(default=None, compare=False, repr=False)


def dominates(a: Sequence[float], b: Sequence[float]) -> bool:
    if len(a) != len(b):
        raise LengthMismatch(
            f"Cannot compare objective vectors of length {len(a)} and {len(b)}."
        )
    strictly_better = False
    for left, right in zip(a, b):
        if left > right:
            return False
        if left < right:
            strictly_better = True
    return strictly_better


def _domination_matrix(objectives: np.ndarray) -> np.ndarray:
    """Return `M` where `M[i, j]` is whether row `i` dominates row `j`."""
    left = objectives[:, None, :]
    right = objectives[None, :, :]
    return np.all(left <= right, axis=2) & np.any(left < right, axis=2)


def nondominated_fronts(objectives: Sequence[Sequence[float]]) -> List[List[int]]:
    """
    Partition rows of `objectives` into non-dominated fronts.

    Each front lists indices in ascending order; front 0 holds the rows no
    other row dominates.
    """
    matrix = np.asarray(objectives, dtype=float)
    if matrix.size == 0:
        return []
    if matrix.ndim != 2:
        raise LengthMismatch("All objective vectors must share the same length.")
    dominance = _domination_matrix(matrix)
    dominator_count = dominance.sum(axis=0)
    assigned = np.zeros(len(matrix), dtype=bool)
    fronts = []
    while not assigned.all():
        current = np.flatnonzero((dominator_count == 0) & ~assigned)
        assigned[current] = True
        dominator_count = dominator_count - dominance[current].sum(axis=0)
        fronts.append(current.tolist())
    return fronts


def fast_nondominated_sort(population: Sequence[Individual]) -> List[List[int]]:
    arities = {len(individual.objectives) for individual in population}
    if len(arities) > 1:
        raise LengthMismatch("All objective vectors must share the same length.")
    fronts = nondominated_fronts([individual.objectives for individual in population])
    for rank, front in enumerate(fronts):
        for index in front:
            population[index].rank = rank
    return fronts


def crowding_distance(front: Sequence[Sequence[float]]) -> List[float]:
    objectives = np.asarray(front, dtype=float)
    size = len(objectives)
    if size <= 2:
        return [math.inf] * size
    distances = np.zeros(size)
    for column in objectives.T:
        order = np.argsort(column, kind="stable")
        ordered = column[order]
        distances[order[0]] = math.inf
        distances[order[-1]] = math.inf
        span = ordered[-1] - ordered[0]
        if span == 0:
            continue
        distances[order[1:-1]] += (ordered[2:] - ordered[:-2]) / span
    return distances.tolist()


def assign_crowding(population: Sequence[Individual], front: Sequence[int]) -> None:
    distances = crowding_distance([population[index].objectives for index in front])
    for index, distance in zip(front, distances):
        population[index].crowding = distance


def next_generation(
    parents: Sequence[Individual],
    offspring: Sequence[Individual],
    params: EvoParams,
) -> List[Individual]:
    """
    Select `params.population_size` survivors from `parents + offspring`.

    Fronts are admitted whole until the next one overflows; that front is
    truncated by descending crowding distance, ties kept in union order.
    """
    union = list(parents) + list(offspring)
    arities = {len(individual.objectives) for individual in union}
    if len(arities) > 1:
        raise ArityMismatch(
            "Parents and offspring must be evaluated on the same objectives."
        )
    survivors: List[Individual] = []
    for front in fast_nondominated_sort(union):
        assign_crowding(union, front)
        room = params.population_size - len(survivors)
        if room <= 0:
            break
        if len(front) <= room:
            survivors.extend(union[index] for index in front)
            continue
        crowding = np.array([union[index].crowding for index in front])
        order = np.lexsort((np.asarray(front), -crowding))
        survivors.extend(union[front[position]] for position in order[:room])
    return survivors


def binary_tournament(
    population: Sequence[Individual], rng: np.random.Generator
) -> Individual:
    first, second = rng.integers(0, len(population), size=2)
    a, b = population[first], population[second]
    if a.rank != b.rank:
        return a if (a.rank or 0) < (b.rank or 0) else b
    a_crowding = -math.inf if a.crowding is None else a.crowding
    b_crowding = -math.inf if b.crowding is None else b.crowding
    return b if b_crowding > a_crowding else a


def _to_genome(values: np.ndarray) -> Genome:
    lower, upper = int(GENE_LOWER), int(GENE_UPPER)
    return validate(np.clip(np.rint(values), lower, upper).astype(int))


def sbx_crossover(
    first: Genome,
    second: Genome,
    params: EvoParams,
    rng: np.random.Generator,
) -> Tuple[Genome, Genome]:
    """
    Bounded simulated binary crossover on the real relaxation of the genes.

    Random draws are taken up front so the stream consumption doesn't depend
    on the parents.
    """
    lower, upper = params.gene_bounds
    apply = rng.random() < params.crossover_prob
    gene_mask = rng.random(GENOME_LENGTH) < 0.5
    swap_mask = rng.random(GENOME_LENGTH) < 0.5
    u = rng.random(GENOME_LENGTH)
    if not apply:
        return first, second
    x1 = np.asarray(first.genes, dtype=float)
    x2 = np.asarray(second.genes, dtype=float)
    c1, c2 = x1.copy(), x2.copy()
    eta = params.sbx_eta
    for i in np.flatnonzero(gene_mask & (np.abs(x1 - x2) > 1e-14)):
        y1, y2 = min(x1[i], x2[i]), max(x1[i], x2[i])
        delta = y2 - y1

        def _beta_q(beta: float) -> float:
            alpha = 2.0 - beta ** -(eta + 1.0)
            if u[i] <= 1.0 / alpha:
                return (u[i] * alpha) ** (1.0 / (eta + 1.0))
            return (1.0 / (2.0 - u[i] * alpha)) ** (1.0 / (eta + 1.0))

        beta_low = 1.0 + 2.0 * (y1 - lower) / delta
        beta_high = 1.0 + 2.0 * (upper - y2) / delta
        child_low = 0.5 * ((y1 + y2) - _beta_q(beta_low) * delta)
        child_high = 0.5 * ((y1 + y2) + _beta_q(beta_high) * delta)
        child_low = min(max(child_low, lower), upper)
        child_high = min(max(child_high, lower), upper)
        if swap_mask[i]:
            c1[i], c2[i] = child_high, child_low
        else:
            c1[i], c2[i] = child_low, child_high
    return _to_genome(c1), _to_genome(c2)


def polynomial_mutation(
    genome: Genome, params: EvoParams, rng: np.random.Generator
) -> Genome:
    lower, upper = params.gene_bounds
    mask = rng.random(GENOME_LENGTH) < params.mutation_prob
    u = rng.random(GENOME_LENGTH)
    if not mask.any():
        return genome
    values = np.asarray(genome.genes, dtype=float)
    span = upper - lower
    power = 1.0 / (params.pm_eta + 1.0)
    for i in np.flatnonzero(mask):
        delta1 = (values[i] - lower) / span
        delta2 = (upper - values[i]) / span
        if u[i] < 0.5:
            xy = 1.0 - delta1
            val = 2.0 * u[i] + (1.0 - 2.0 * u[i]) * xy ** (params.pm_eta + 1.0)
            delta_q = val**power - 1.0
        else:
            xy = 1.0 - delta2
            val = 2.0 * (1.0 - u[i]) + 2.0 * (u[i] - 0.5) * xy ** (params.pm_eta + 1.0)
            delta_q = 1.0 - val**power
        values[i] = min(max(values[i] + delta_q * span, lower), upper)
    return _to_genome(values)


def make_offspring(
    population: Sequence[Individual],
    params: EvoParams,
    rng: np.random.Generator,
) -> List[Genome]:
    """Return `params.population_size` offspring genomes of `population`."""
    children: List[Genome] = []
    while len(children) < params.population_size:
        first = binary_tournament(population, rng).genome
        second = binary_tournament(population, rng).genome
        for child in sbx_crossover(first, second, params, rng):
            children.append(polynomial_mutation(child, params, rng))
    return children[: params.population_size]


def lhs_sample(count: int, rng: np.random.Generator) -> List[Genome]:
    """
    Draw `count` genomes by Latin hypercube sampling of [0, 1)^56.

    Every dimension places exactly one point per stratum of width 1/count;
    points map to genes through floor(4u).
    """
    if count < 1:
        raise ValueError(f"Sample count must be at least 1, got {count}.")
    sampler = qmc.LatinHypercube(d=GENOME_LENGTH, seed=rng)
    points = sampler.random(count)
    genes = np.minimum(np.floor(points * 4), 3).astype(int)
    return [validate(row) for row in genes]
