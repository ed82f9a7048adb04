from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, List, NamedTuple, Sequence, Tuple

import numpy as np

from .constants import (
    BLOCK_COUNT,
    BLOCK_GENES,
    GENOME_LENGTH,
    INTERNAL_NODES,
    REDUCTION_BLOCK,
    Operation,
)
from .exceptions import GeneOutOfRange, MalformedGenomeString, WrongLength

__all__ = (
    "BlockDag",
    "CellArchitecture",
    "Edge",
    "Genome",
    "Operation",
    "count_operations",
    "decode",
    "edge_slots",
    "longest_path",
    "parse",
    "random_genome",
    "to_string",
    "validate",
)


class Edge(NamedTuple):
    src: int
    dst: int
    operation: Operation


@lru_cache(maxsize=None)
def edge_slots() -> Tuple[Tuple[int, int], ...]:
    """
    Return the (src, dst) pair addressed by each of the 14 genes of a block.

    Genes are read node by node: node 2's edges from (0, 1) come first, then
    node 3's edges from (0, 1, 2) and so on.
    """
    return tuple((src, dst) for dst in INTERNAL_NODES for src in range(dst))


class BlockDag(NamedTuple):
    edges: Tuple[Edge, ...]
    is_reduction: bool

    def incoming(self, node: int) -> List[Edge]:
        return [edge for edge in self.edges if edge.dst == node]

    def active_edges(self) -> List[Edge]:
        return [edge for edge in self.edges if edge.operation is not Operation.NONE]


class CellArchitecture(NamedTuple):
    blocks: Tuple[BlockDag, BlockDag, BlockDag, BlockDag]


@dataclass(frozen=True)
class Genome:
    genes: Tuple[int, ...]

    def __post_init__(self):
        if len(self.genes) != GENOME_LENGTH:
            raise WrongLength(len(self.genes))
        for index, value in enumerate(self.genes):
            if type(value) is not int or not 0 <= value <= 3:
                raise GeneOutOfRange(index, value)

    def __str__(self) -> str:
        return to_string(self)

    def block(self, index: int) -> Tuple[int, ...]:
        start = index * BLOCK_GENES
        return self.genes[start : start + BLOCK_GENES]

    def operations(self) -> Tuple[Operation, ...]:
        return tuple(Operation(gene) for gene in self.genes)

    def replace(self, index: int, value: int) -> "Genome":
        genes = list(self.genes)
        genes[index] = value
        return Genome(tuple(genes))


def validate(genes: Iterable) -> Genome:
    """
    Return a `Genome` from a sequence of integers.

    Raise `WrongLength` or `GeneOutOfRange` when the sequence doesn't describe
    a point of the search space. Integral numpy scalars are accepted.
    """
    values = list(genes)
    if len(values) != GENOME_LENGTH:
        raise WrongLength(len(values))
    normalized = []
    for index, value in enumerate(values):
        if isinstance(value, (bool, np.bool_)) or not isinstance(
            value, (int, np.integer)
        ):
            raise GeneOutOfRange(index, value)
        if not 0 <= value <= 3:
            raise GeneOutOfRange(index, int(value))
        normalized.append(int(value))
    return Genome(tuple(normalized))


def decode(genome: Genome) -> CellArchitecture:
    slots = edge_slots()
    blocks = []
    for index in range(BLOCK_COUNT):
        edges = tuple(
            Edge(src, dst, Operation(gene))
            for (src, dst), gene in zip(slots, genome.block(index))
        )
        blocks.append(BlockDag(edges, is_reduction=index == REDUCTION_BLOCK))
    return CellArchitecture(tuple(blocks))  # type: ignore[arg-type]


def longest_path(dag: BlockDag) -> int:
    """Return the number of edges on the longest path made of non-None edges."""
    depth = {node: 0 for node in range(INTERNAL_NODES[-1] + 1)}
    for node in INTERNAL_NODES:
        for edge in dag.incoming(node):
            if edge.operation is not Operation.NONE:
                depth[node] = max(depth[node], depth[edge.src] + 1)
    return max(depth.values())


def to_string(genome: Genome) -> str:
    return "/".join(
        ",".join(str(gene) for gene in genome.block(index))
        for index in range(BLOCK_COUNT)
    )


def parse(text: str) -> Genome:
    groups = text.strip().split("/")
    if len(groups) != BLOCK_COUNT:
        raise MalformedGenomeString(
            f"Expected {BLOCK_COUNT} slash-separated groups, found {len(groups)}",
            len(text),
        )
    genes = []
    # Offsets index into `text`, leading whitespace included.
    position = len(text) - len(text.lstrip())
    for group in groups:
        tokens = group.split(",")
        if len(tokens) != BLOCK_GENES:
            raise MalformedGenomeString(
                f"Expected {BLOCK_GENES} comma-separated genes, found {len(tokens)}",
                position,
            )
        for token in tokens:
            if token not in ("0", "1", "2", "3"):
                raise MalformedGenomeString(f"Invalid gene {token!r}", position)
            genes.append(int(token))
            position += len(token) + 1
    return Genome(tuple(genes))


def random_genome(rng: np.random.Generator) -> Genome:
    return validate(rng.integers(0, 4, size=GENOME_LENGTH))


def count_operations(genome: Genome, operations: Sequence[Operation]) -> int:
    return sum(1 for gene in genome.genes if gene in operations)
