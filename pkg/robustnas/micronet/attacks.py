from dataclasses import dataclass
from typing import Callable, Optional

import torch
import torch.nn.functional as F

from ..constants import AttackKind
from ..exceptions import ConfigError

__all__ = ("AttackSpec", "attack", "fgsm", "pgd")

DEFAULT_EPSILON = 8 / 255
DEFAULT_STEP_SIZE = 2 / 255
DEFAULT_STEPS = 7

LossFn = Callable[[torch.Tensor, torch.Tensor], torch.Tensor]


@dataclass(frozen=True)
class AttackSpec:
    kind: AttackKind = AttackKind.PGD
    epsilon: float = DEFAULT_EPSILON
    step_size: float = DEFAULT_STEP_SIZE
    steps: int = DEFAULT_STEPS
    random_start: Optional[bool] = None
    clip_min: float = 0.0
    clip_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", AttackKind(self.kind))
        if self.random_start is None:
            object.__setattr__(self, "random_start", self.kind is AttackKind.PGD)
        if self.epsilon < 0 or self.step_size < 0:
            raise ConfigError("Attack epsilon and step size must be non-negative.")
        if self.steps < 1:
            raise ConfigError(f"Attack steps must be at least 1, got {self.steps}.")

    @classmethod
    def fgsm(cls, epsilon: float = DEFAULT_EPSILON) -> "AttackSpec":
        return cls(AttackKind.FGSM, epsilon=epsilon, step_size=epsilon, steps=1)

    @classmethod
    def pgd(cls, steps: int = DEFAULT_STEPS, **kwargs) -> "AttackSpec":
        return cls(AttackKind.PGD, steps=steps, **kwargs)

    @property
    def label(self) -> str:
        if self.kind is AttackKind.FGSM:
            return "fgsm"
        return f"pgd{self.steps}"


def _input_gradient(
    model, inputs: torch.Tensor, labels: torch.Tensor, loss_fn: LossFn
) -> torch.Tensor:
    inputs = inputs.detach().clone().requires_grad_(True)
    loss = loss_fn(model(inputs), labels)
    # Paths disconnected from the inputs (an all-None cell) leave them unused.
    if not loss.requires_grad:
        return torch.zeros_like(inputs)
    (gradient,) = torch.autograd.grad(loss, [inputs], allow_unused=True)
    return torch.zeros_like(inputs) if gradient is None else gradient


def fgsm(
    model,
    inputs: torch.Tensor,
    labels: torch.Tensor,
    spec: AttackSpec,
    loss_fn: LossFn = F.cross_entropy,
) -> torch.Tensor:
    """Single signed-gradient step of size epsilon, clipped to the pixel box."""
    if spec.kind is not AttackKind.FGSM:
        raise ConfigError(f"Expected an FGSM attack spec, got {spec.kind.value}.")
    gradient = _input_gradient(model, inputs, labels, loss_fn)
    adversarial = inputs.detach() + spec.epsilon * torch.sign(gradient)
    return adversarial.clamp(spec.clip_min, spec.clip_max)


def _project(
    adversarial: torch.Tensor, inputs: torch.Tensor, spec: AttackSpec
) -> torch.Tensor:
    delta = (adversarial - inputs).clamp(-spec.epsilon, spec.epsilon)
    return (inputs + delta).clamp(spec.clip_min, spec.clip_max)


def pgd(
    model,
    inputs: torch.Tensor,
    labels: torch.Tensor,
    spec: AttackSpec,
    generator: Optional[torch.Generator] = None,
    loss_fn: LossFn = F.cross_entropy,
) -> torch.Tensor:
    """
    Projected gradient descent with an optional uniform random start inside
    the epsilon ball. Runs exactly `spec.steps` steps; every iterate stays in
    the ball around `inputs` and in the pixel box.
    """
    if spec.kind is not AttackKind.PGD:
        raise ConfigError(f"Expected a PGD attack spec, got {spec.kind.value}.")
    inputs = inputs.detach()
    adversarial = inputs.clone()
    if spec.random_start:
        noise = torch.rand(
            inputs.shape, generator=generator, dtype=inputs.dtype
        )
        adversarial = adversarial + (2.0 * noise - 1.0) * spec.epsilon
        adversarial = _project(adversarial, inputs, spec)
    for _ in range(spec.steps):
        gradient = _input_gradient(model, adversarial, labels, loss_fn)
        adversarial = adversarial + spec.step_size * torch.sign(gradient)
        adversarial = _project(adversarial, inputs, spec)
    return adversarial


def attack(
    model,
    inputs: torch.Tensor,
    labels: torch.Tensor,
    spec: AttackSpec,
    generator: Optional[torch.Generator] = None,
) -> torch.Tensor:
    if spec.kind is AttackKind.FGSM:
        return fgsm(model, inputs, labels, spec)
    return pgd(model, inputs, labels, spec, generator)
