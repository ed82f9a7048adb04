"""
Graph encoder embedding block DAGs by propagating virtual information along
their edges.

Each non-None edge gates the transformed information of its source node with
a sigmoid mask derived from the embedding of its operation; nodes sum their
incoming messages.
"""

import hashlib
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit

from .constants import BLOCK_COUNT, INTERNAL_NODES, Operation
from .genome import BlockDag, CellArchitecture, Genome, decode

__all__ = (
    "EMBEDDING_SIZE",
    "GatesEncoder",
    "GatesParams",
    "embed_arch",
    "embed_block",
    "embedding_hash",
    "init_params",
)

OPERATION_DIM = 16
INFO_DIM = 32
EMBEDDING_SIZE = BLOCK_COUNT * INFO_DIM


@dataclass(frozen=True)
class GatesParams:
    operation_embedding: np.ndarray
    w_o: np.ndarray
    w_x: np.ndarray
    input_node_info: np.ndarray
    seed: int

    def masks(self) -> np.ndarray:
        """Return the soft attention mask of every operation, one row each."""
        return expit(self.operation_embedding @ self.w_o)


def init_params(
    seed: int, operation_dim: int = OPERATION_DIM, info_dim: int = INFO_DIM
) -> GatesParams:
    rng = np.random.default_rng(seed)
    operation_embedding = rng.uniform(-0.1, 0.1, size=(len(Operation), operation_dim))
    w_o = rng.uniform(-0.1, 0.1, size=(operation_dim, info_dim))
    w_x = rng.uniform(-0.1, 0.1, size=(info_dim, info_dim))
    inputs = rng.uniform(-1.0, 1.0, size=(2, info_dim))
    inputs /= np.linalg.norm(inputs, axis=1, keepdims=True)
    return GatesParams(operation_embedding, w_o, w_x, inputs, seed)


def embed_block(dag: BlockDag, params: GatesParams) -> np.ndarray:
    masks = params.masks()
    info_dim = params.w_x.shape[1]
    info = {0: params.input_node_info[0], 1: params.input_node_info[1]}
    for node in INTERNAL_NODES:
        value = np.zeros(info_dim)
        for edge in dag.incoming(node):
            if edge.operation is Operation.NONE:
                continue
            value += masks[edge.operation] * (info[edge.src] @ params.w_x)
        info[node] = value
    return np.mean([info[node] for node in INTERNAL_NODES], axis=0)


def embed_arch(cell: CellArchitecture, params: GatesParams) -> np.ndarray:
    return np.concatenate([embed_block(block, params) for block in cell.blocks])


def embedding_hash(embedding: np.ndarray) -> str:
    return hashlib.sha1(np.ascontiguousarray(embedding, dtype=float).tobytes()).hexdigest()


class GatesEncoder:
    """Memoizing genome encoder bound to fixed seeded parameters."""

    def __init__(self, seed: int):
        self.params = init_params(seed)
        self._embed = lru_cache(maxsize=None)(self._embed_uncached)

    def _embed_uncached(self, genome: Genome) -> np.ndarray:
        embedding = embed_arch(decode(genome), self.params)
        embedding.setflags(write=False)
        return embedding

    def embed(self, genome: Genome) -> np.ndarray:
        return self._embed(genome)

    def embed_many(self, genomes) -> np.ndarray:
        if not genomes:
            return np.zeros((0, EMBEDDING_SIZE))
        return np.stack([self.embed(genome) for genome in genomes])
