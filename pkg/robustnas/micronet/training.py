"""
Adversarial training and evaluation of supernets and standalone subnets.
"""

import logging
import math
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from ..config import TrainingConfig
from ..constants import AttackKind
from ..exceptions import CheckpointError, EmptySplit, NumericFailure
from ..genome import Genome, random_genome
from .attacks import AttackSpec, attack
from .data import Split, SynthDataset, synth_dataset
from .network import Subnet, Supernet, cost_summary

__all__ = (
    "CHECKPOINT_FORMAT_VERSION",
    "EpochLog",
    "adv_train_supernet",
    "build_dataset",
    "evaluate",
    "load_supernet",
    "save_supernet",
    "train_standalone",
    "training_attack",
)

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


class EpochLog(NamedTuple):
    epoch: int
    adv_loss: float
    clean_val_err: float
    adv_val_err: float


def build_dataset(config: TrainingConfig) -> SynthDataset:
    return synth_dataset(config.seed, config.n_train, config.n_val, config.noise)


def training_attack(config: TrainingConfig) -> AttackSpec:
    if config.attack is AttackKind.FGSM:
        return AttackSpec.fgsm(config.epsilon)
    return AttackSpec.pgd(
        config.attack_steps, epsilon=config.epsilon, step_size=config.step_size
    )


def evaluate(
    model,
    split: Split,
    attack_spec: Optional[AttackSpec] = None,
    fraction: float = 1.0,
    seed: int = 0,
) -> Tuple[float, Optional[float]]:
    """
    Return the clean and adversarial error rates of `model` on a seeded
    subsample of ceil(fraction * len(split)) items of `split`.

    The adversarial error is `None` when no attack is given.
    """
    if not 0 < fraction <= 1:
        raise ValueError(f"fraction must be within (0, 1], got {fraction}.")
    if len(split) == 0:
        raise EmptySplit("Cannot evaluate on an empty split.")
    if fraction < 1:
        count = math.ceil(fraction * len(split))
        rng = np.random.default_rng(seed)
        split = split.subset(np.sort(rng.choice(len(split), size=count, replace=False)))
    with torch.no_grad():
        clean_error = _error_rate(model(split.images), split.labels)
    if attack_spec is None:
        return clean_error, None
    generator = torch.Generator().manual_seed(seed)
    adversarial = attack(model, split.images, split.labels, attack_spec, generator)
    with torch.no_grad():
        adv_error = _error_rate(model(adversarial), split.labels)
    return clean_error, adv_error


def _error_rate(logits: torch.Tensor, labels: torch.Tensor) -> float:
    return 1.0 - float((logits.argmax(dim=1) == labels).double().mean())


def _adversarial_training(
    network: nn.Module,
    path_for_batch: Callable[[], Callable],
    dataset: SynthDataset,
    config: TrainingConfig,
    epochs: int,
    on_epoch: Callable[[int, float], Optional[EpochLog]],
) -> None:
    spec = training_attack(config)
    generator = torch.Generator().manual_seed(config.seed)
    optimizer = torch.optim.SGD(
        network.parameters(),
        lr=config.learning_rate,
        momentum=config.momentum,
        weight_decay=config.weight_decay,
    )
    scheduler = torch.optim.lr_scheduler.CosineAnnealingLR(
        optimizer, T_max=max(epochs, 1), eta_min=0.0
    )
    train = dataset.train
    for epoch in range(epochs):
        permutation = torch.randperm(len(train), generator=generator)
        losses = []
        for start in range(0, len(train), config.batch_size):
            batch = permutation[start : start + config.batch_size]
            images, labels = train.images[batch], train.labels[batch]
            path = path_for_batch()
            adversarial = attack(path, images, labels, spec, generator)
            optimizer.zero_grad()
            loss = F.cross_entropy(path(adversarial), labels)
            if not torch.isfinite(loss):
                raise NumericFailure(
                    f"Adversarial training loss diverged at epoch {epoch}."
                )
            loss.backward()
            nn.utils.clip_grad_norm_(network.parameters(), config.grad_clip_norm)
            optimizer.step()
            losses.append(float(loss))
        scheduler.step()
        on_epoch(epoch, float(np.mean(losses)))


def adv_train_supernet(
    config: TrainingConfig,
    dataset: Optional[SynthDataset] = None,
    progress: Optional[Callable[[EpochLog], None]] = None,
) -> Tuple[Supernet, List[EpochLog]]:
    """
    Adversarially train a supernet by single path uniform sampling.

    Every batch draws one uniformly random genome, crafts adversarial inputs
    against its path and takes one SGD step on their loss. Returns the trained
    supernet and one `EpochLog` per epoch; validation columns are measured on
    a genome drawn from a separate per-epoch stream with the FGSM proxy.
    """
    dataset = dataset or build_dataset(config)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        supernet = Supernet(config.width)
    genome_rng = np.random.default_rng([config.seed, 1])
    history: List[EpochLog] = []

    def _on_epoch(epoch: int, adv_loss: float) -> None:
        monitored = random_genome(np.random.default_rng([config.seed, 2, epoch]))
        clean_error, adv_error = evaluate(
            supernet.view(monitored),
            dataset.val,
            AttackSpec.fgsm(config.epsilon),
            seed=config.seed,
        )
        log = EpochLog(epoch, adv_loss, clean_error, adv_error)
        history.append(log)
        logger.info(
            "Supernet epoch %d: adv_loss=%.4f clean_val_err=%.4f adv_val_err=%.4f",
            *log,
        )
        if progress is not None:
            progress(log)

    _adversarial_training(
        supernet,
        lambda: supernet.view(random_genome(genome_rng)),
        dataset,
        config,
        config.epochs,
        _on_epoch,
    )
    return supernet, history


def final_metrics(
    network: Subnet, split: Split, config: TrainingConfig
) -> Dict[str, float]:
    clean_error, fgsm_error = evaluate(
        network, split, AttackSpec.fgsm(config.epsilon), seed=config.seed
    )
    metrics: Dict[str, float] = {"clean_error": clean_error, "fgsm_error": fgsm_error}
    for steps in config.eval_pgd_steps:
        spec = AttackSpec.pgd(steps, epsilon=config.epsilon, step_size=config.step_size)
        _, metrics[f"pgd{steps}_error"] = evaluate(
            network, split, spec, seed=config.seed
        )
    parameters, macs = cost_summary(network.genome, network.width)
    metrics["params"] = parameters
    metrics["macs"] = macs
    return metrics


def train_standalone(
    genome: Genome,
    config: TrainingConfig,
    dataset: Optional[SynthDataset] = None,
) -> Tuple[Subnet, Dict[str, float]]:
    """
    Adversarially train `genome` from scratch on its single fixed path and
    report its validation error rates under clean, FGSM and PGD inputs.
    """
    dataset = dataset or build_dataset(config)
    with torch.random.fork_rng(devices=[]):
        torch.manual_seed(config.seed)
        network = Subnet(genome, config.final_width)

    def _on_epoch(epoch: int, adv_loss: float) -> None:
        logger.info("Final training epoch %d: adv_loss=%.4f", epoch, adv_loss)

    _adversarial_training(
        network, lambda: network, dataset, config, config.final_epochs, _on_epoch
    )
    return network, final_metrics(network, dataset.val, config)


def save_supernet(supernet: Supernet, config: TrainingConfig, path) -> None:
    state = {name: tensor.detach().clone() for name, tensor in supernet.state_dict().items()}
    torch.save(
        {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "config": config.to_dict(),
            "shapes": {name: list(tensor.shape) for name, tensor in state.items()},
            "state_dict": state,
        },
        path,
    )


def load_supernet(path) -> Tuple[Supernet, TrainingConfig]:
    try:
        payload = torch.load(path, weights_only=True)
    except FileNotFoundError as exc:
        raise CheckpointError(f"Supernet checkpoint {path} does not exist.") from exc
    except Exception as exc:
        raise CheckpointError(f"Cannot read supernet checkpoint {path}: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format_version") != (
        CHECKPOINT_FORMAT_VERSION
    ):
        raise CheckpointError(f"Unsupported supernet checkpoint format in {path}.")
    config = TrainingConfig.from_dict(payload["config"])
    supernet = Supernet(config.width)
    expected = {name: list(tensor.shape) for name, tensor in supernet.state_dict().items()}
    if expected != payload["shapes"]:
        raise CheckpointError(f"Supernet checkpoint {path} has mismatching shapes.")
    supernet.load_state_dict(payload["state_dict"])
    return supernet, config
