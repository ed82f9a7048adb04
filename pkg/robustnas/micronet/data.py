from typing import NamedTuple

import numpy as np
import torch

__all__ = ("IMAGE_SIZE", "NUM_CLASSES", "Split", "SynthDataset", "class_pattern", "synth_dataset")

IMAGE_SIZE = 8
NUM_CLASSES = 4
NOISE_AMPLITUDE = 0.15


class Split(NamedTuple):
    images: torch.Tensor
    labels: torch.Tensor

    def __len__(self) -> int:
        return len(self.labels)

    def subset(self, indices) -> "Split":
        index = torch.as_tensor(indices, dtype=torch.long)
        return Split(self.images[index], self.labels[index])


class SynthDataset(NamedTuple):
    train: Split
    val: Split
    seed: int

    def split(self, name: str) -> Split:
        if name not in ("train", "val"):
            raise ValueError(f"Unknown split {name!r}, expected 'train' or 'val'.")
        return getattr(self, name)


def class_pattern(label: int, size: int = IMAGE_SIZE) -> np.ndarray:
    """
    Return the noiseless pattern of `label`: horizontal stripes, vertical
    stripes, diagonal stripes or a checkerboard.
    """
    rows, columns = np.indices((size, size))
    if label == 0:
        pattern = rows % 2
    elif label == 1:
        pattern = columns % 2
    elif label == 2:
        pattern = ((rows + columns) // 2) % 2
    elif label == 3:
        pattern = (rows + columns) % 2
    else:
        raise ValueError(f"Unknown class {label!r}.")
    return pattern.astype(float)


def _make_split(rng: np.random.Generator, count: int, noise: float) -> Split:
    labels = rng.permutation(np.arange(count) % NUM_CLASSES)
    images = np.stack([class_pattern(label) for label in labels])
    images = images + rng.uniform(-noise, noise, size=images.shape)
    images = np.clip(images, 0.0, 1.0)[:, None, :, :]
    return Split(
        torch.as_tensor(images, dtype=torch.float64),
        torch.as_tensor(labels, dtype=torch.long),
    )


def synth_dataset(
    seed: int, n_train: int, n_val: int, noise: float = NOISE_AMPLITUDE
) -> SynthDataset:
    if n_train < NUM_CLASSES or n_val < NUM_CLASSES:
        raise ValueError(f"Both splits need at least {NUM_CLASSES} images.")
    rng = np.random.default_rng(seed)
    train = _make_split(rng, n_train, noise)
    val = _make_split(rng, n_val, noise)
    return SynthDataset(train, val, seed)
