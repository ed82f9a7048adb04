import logging
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, NamedTuple, Union

import numpy as np
import torch
from scipy.spatial.distance import cdist, pdist
from torch import nn

from .constants import SurrogateKind
from .exceptions import DegenerateTrainingSet, EmptyInput
from .gates import EMBEDDING_SIZE
from .genome import Genome

__all__ = (
    "MlpModel",
    "RbfModel",
    "TrainingRecord",
    "TrainingSet",
    "dump_model",
    "fit",
    "fit_mlp",
    "fit_rbf",
    "kmeans",
    "load_model",
    "predict",
    "predict_many",
)

logger = logging.getLogger(__name__)

MODEL_FORMAT_VERSION = 1
RBF_CENTERS = 128
MLP_HIDDEN = 256
MLP_EPOCHS = 100
MLP_BATCH_SIZE = 50
MLP_LEARNING_RATE = 1e-3
RCOND = 1e-10


def weighted_label(f1h: float, f2h: float) -> float:
    return 0.5 * f1h + 0.5 * f2h


class TrainingRecord(NamedTuple):
    genome: Genome
    embedding: np.ndarray
    f1h: float
    f2h: float
    label: float


class TrainingSet:
    """
    Insertion ordered high-fidelity samples the surrogate is fitted on.

    Genomes are unique; adding a known genome is a no-op.
    """

    def __init__(self):
        self._records: Dict[Genome, TrainingRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def __iter__(self) -> Iterator[TrainingRecord]:
        return iter(self._records.values())

    def __contains__(self, genome: object) -> bool:
        return genome in self._records

    def add(self, genome: Genome, embedding: np.ndarray, f1h: float, f2h: float) -> bool:
        if genome in self._records:
            return False
        embedding = np.asarray(embedding, dtype=float)
        if embedding.shape != (EMBEDDING_SIZE,):
            raise ValueError(
                f"Embeddings must have shape ({EMBEDDING_SIZE},), got {embedding.shape}."
            )
        self._records[genome] = TrainingRecord(
            genome, embedding, f1h, f2h, weighted_label(f1h, f2h)
        )
        return True

    @property
    def genomes(self) -> List[Genome]:
        return list(self._records)

    @property
    def embeddings(self) -> np.ndarray:
        if not self._records:
            return np.zeros((0, EMBEDDING_SIZE))
        return np.stack([record.embedding for record in self])

    @property
    def labels(self) -> np.ndarray:
        return np.array([record.label for record in self], dtype=float)


def kmeans(
    points: np.ndarray, k: int, seed: int, max_iters: int = 100
) -> np.ndarray:
    """
    Return `k` centers of `points` found by Lloyd's algorithm.

    When there are no more than `k` distinct points they are returned as the
    centers, the last one repeated to fill the `k` slots. Otherwise centers
    start from a seeded k-means++ draw.
    """
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        raise EmptyInput("Cannot cluster an empty set of points.")
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}.")
    _, first_seen = np.unique(points, axis=0, return_index=True)
    distinct = points[np.sort(first_seen)]
    if len(distinct) <= k:
        padding = np.repeat(distinct[-1:], k - len(distinct), axis=0)
        return np.vstack([distinct, padding])
    rng = np.random.default_rng(seed)
    centers = [distinct[rng.integers(len(distinct))]]
    for _ in range(1, k):
        gaps = cdist(distinct, np.asarray(centers), "sqeuclidean").min(axis=1)
        centers.append(distinct[rng.choice(len(distinct), p=gaps / gaps.sum())])
    centers_array = np.asarray(centers)
    assignment = None
    for _ in range(max_iters):
        new_assignment = cdist(points, centers_array, "sqeuclidean").argmin(axis=1)
        if assignment is not None and np.array_equal(assignment, new_assignment):
            break
        assignment = new_assignment
        for cluster in range(k):
            members = points[assignment == cluster]
            if len(members):
                centers_array[cluster] = members.mean(axis=0)
    return centers_array


@dataclass(frozen=True)
class RbfModel:
    centers: np.ndarray
    width: float
    weights: np.ndarray

    kind = SurrogateKind.RBF

    def design_matrix(self, embeddings: np.ndarray) -> np.ndarray:
        return _rbf_design(embeddings, self.centers, self.width)

    def predict_many(self, embeddings: np.ndarray) -> np.ndarray:
        return self.design_matrix(np.atleast_2d(embeddings)) @ self.weights


def _rbf_design(embeddings: np.ndarray, centers: np.ndarray, width: float) -> np.ndarray:
    squared = cdist(embeddings, centers, "sqeuclidean")
    phi = np.exp(-squared / (2.0 * width**2))
    return np.hstack([phi, np.ones((len(embeddings), 1))])


def fit_rbf(training_set: TrainingSet, seed: int, centers: int = RBF_CENTERS) -> RbfModel:
    if len(training_set) < 2:
        raise DegenerateTrainingSet(
            f"At least 2 samples are required to fit a surrogate, got {len(training_set)}."
        )
    embeddings = training_set.embeddings
    center_array = kmeans(embeddings, centers, seed)
    width = float(pdist(center_array).max()) if len(center_array) > 1 else 0.0
    if width == 0:
        width = 1.0
    design = _rbf_design(embeddings, center_array, width)
    weights, *_ = np.linalg.lstsq(design, training_set.labels, rcond=RCOND)
    return RbfModel(center_array, width, weights)


def build_mlp(input_size: int = EMBEDDING_SIZE, hidden: int = MLP_HIDDEN) -> nn.Sequential:
    return nn.Sequential(
        nn.Linear(input_size, hidden),
        nn.ReLU(),
        nn.Linear(hidden, hidden),
        nn.ReLU(),
        nn.Linear(hidden, 1),
    ).double()


@dataclass
class MlpModel:
    network: nn.Sequential
    loss_history: List[float] = field(default_factory=list)

    kind = SurrogateKind.MLP

    def predict_many(self, embeddings: np.ndarray) -> np.ndarray:
        inputs = torch.as_tensor(np.atleast_2d(embeddings), dtype=torch.float64)
        with torch.no_grad():
            return self.network(inputs).squeeze(1).numpy().copy()


def fit_mlp(
    training_set: TrainingSet,
    seed: int,
    epochs: int = MLP_EPOCHS,
    batch_size: int = MLP_BATCH_SIZE,
    learning_rate: float = MLP_LEARNING_RATE,
) -> MlpModel:
    """
    Fit the regression MLP with Adam on the mean squared error.

    `loss_history` holds the full-set loss before training followed by the
    full-set loss after each epoch.
    """
    if len(training_set) < 2:
        raise DegenerateTrainingSet(
            f"At least 2 samples are required to fit a surrogate, got {len(training_set)}."
        )
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(seed)
        network = build_mlp()
    generator = torch.Generator().manual_seed(seed)
    inputs = torch.as_tensor(training_set.embeddings, dtype=torch.float64)
    targets = torch.as_tensor(training_set.labels, dtype=torch.float64).unsqueeze(1)
    optimizer = torch.optim.Adam(
        network.parameters(), lr=learning_rate, betas=(0.9, 0.999), eps=1e-8
    )
    criterion = nn.MSELoss()
    history = [_full_loss(network, criterion, inputs, targets)]
    for _ in range(epochs):
        permutation = torch.randperm(len(inputs), generator=generator)
        for start in range(0, len(inputs), batch_size):
            batch = permutation[start : start + batch_size]
            optimizer.zero_grad()
            loss = criterion(network(inputs[batch]), targets[batch])
            loss.backward()
            optimizer.step()
        history.append(_full_loss(network, criterion, inputs, targets))
    return MlpModel(network, history)


def _full_loss(network, criterion, inputs, targets) -> float:
    with torch.no_grad():
        return float(criterion(network(inputs), targets))


SurrogateModel = Union[RbfModel, MlpModel]


def fit(kind: SurrogateKind, training_set: TrainingSet, seed: int) -> SurrogateModel:
    if kind is SurrogateKind.RBF:
        model: SurrogateModel = fit_rbf(training_set, seed)
    else:
        model = fit_mlp(training_set, seed)
    logger.info("Fitted %s surrogate on %d samples", kind.value, len(training_set))
    return model


def predict(model: SurrogateModel, embedding: np.ndarray) -> float:
    return float(model.predict_many(embedding)[0])


def predict_many(model: SurrogateModel, embeddings: np.ndarray) -> np.ndarray:
    return model.predict_many(embeddings)


def dump_model(model: SurrogateModel, path) -> None:
    """Write `model` as a versioned npz archive of named row-major arrays."""
    arrays: Dict[str, np.ndarray] = {
        "format_version": np.array(MODEL_FORMAT_VERSION),
        "kind": np.array(model.kind.value),
    }
    if isinstance(model, RbfModel):
        arrays.update(
            centers=model.centers, width=np.array(model.width), weights=model.weights
        )
    else:
        for name, tensor in model.network.state_dict().items():
            arrays[f"param:{name}"] = tensor.detach().numpy()
    with open(path, "wb") as file_:
        np.savez(file_, **arrays)


def load_model(path) -> SurrogateModel:
    with np.load(path, allow_pickle=False) as archive:
        version = int(archive["format_version"])
        if version != MODEL_FORMAT_VERSION:
            raise ValueError(f"Unsupported surrogate format version {version}.")
        kind = SurrogateKind(str(archive["kind"]))
        if kind is SurrogateKind.RBF:
            return RbfModel(
                archive["centers"], float(archive["width"]), archive["weights"]
            )
        state = {
            name.split(":", 1)[1]: torch.as_tensor(archive[name])
            for name in archive.files
            if name.startswith("param:")
        }
    network = build_mlp()
    network.load_state_dict(state)
    return MlpModel(network)
