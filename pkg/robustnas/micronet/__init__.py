from .attacks import AttackSpec, fgsm, pgd
from .data import SynthDataset, synth_dataset
from .network import Subnet, SubnetView, Supernet, forward, loss_and_grad
from .training import adv_train_supernet, evaluate, train_standalone

__all__ = (
    "AttackSpec",
    "Subnet",
    "SubnetView",
    "Supernet",
    "SynthDataset",
    "adv_train_supernet",
    "evaluate",
    "fgsm",
    "forward",
    "loss_and_grad",
    "pgd",
    "synth_dataset",
    "train_standalone",
)
