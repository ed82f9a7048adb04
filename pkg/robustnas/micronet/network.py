"""
Shared-weight realization of the block search space.

A `Supernet` owns one parameter slot per (block, edge, parametric operation)
and every subnet borrows from it. A `Subnet` owns copies of the slots a single
genome selects and runs the exact same forward code.
"""

from typing import Dict, Iterable, List, Tuple

import torch
import torch.nn.functional as F
from torch import nn

from ..constants import BLOCK_COUNT, INTERNAL_NODES, REDUCTION_BLOCK, Operation
from ..exceptions import ShapeError
from ..genome import Genome, edge_slots
from .data import IMAGE_SIZE, NUM_CLASSES

__all__ = (
    "DEFAULT_WIDTH",
    "Subnet",
    "SubnetView",
    "Supernet",
    "cost_summary",
    "forward",
    "loss_and_grad",
    "slot_name",
)

DEFAULT_WIDTH = 8


def slot_name(block: int, edge: int, operation: Operation) -> str:
    return f"b{block}_e{edge}_{operation.name.lower()}"


class SepConv(nn.Module):
    """Depthwise 3x3 convolution, pointwise 1x1 convolution, rectifier."""

    def __init__(self, width: int, stride: int):
        super().__init__()
        self.stride = stride
        self.depthwise = nn.Conv2d(
            width, width, 3, stride=stride, padding=1, groups=width
        )
        self.pointwise = nn.Conv2d(width, width, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return F.relu(self.pointwise(self.depthwise(x)))


def _identity(x: torch.Tensor, stride: int) -> torch.Tensor:
    if stride == 1:
        return x
    return F.avg_pool2d(x, 2)


def _edge_stride(block: int, src: int) -> int:
    return 2 if block == REDUCTION_BLOCK and src < 2 else 1


class MicroNet(nn.Module):
    """Base network: stem, four blocks of projected DAG cells, classifier."""

    def __init__(self, width: int, num_classes: int):
        super().__init__()
        self.width = width
        self.num_classes = num_classes
        self.stem = nn.Conv2d(1, width, 3, padding=1)
        self.projections = nn.ModuleList(
            nn.Conv2d(len(INTERNAL_NODES) * width, width, 1) for _ in range(BLOCK_COUNT)
        )
        self.head = nn.Linear(width, num_classes)
        self.slots = nn.ModuleDict()

    def _make_slots(self, selection: Iterable[Tuple[int, int, Operation]]) -> None:
        slots = edge_slots()
        for block, edge, operation in selection:
            if operation.is_parametric:
                src, _ = slots[edge]
                self.slots[slot_name(block, edge, operation)] = SepConv(
                    self.width, _edge_stride(block, src)
                )

    def _apply_edge(
        self, block: int, edge: int, src: int, operation: Operation, x: torch.Tensor
    ) -> torch.Tensor:
        stride = _edge_stride(block, src)
        if operation is Operation.SKIP_CONNECT:
            return _identity(x, stride)
        conv = self.slots[slot_name(block, edge, operation)](x)
        if operation is Operation.RES_SEP_CONV_3X3:
            return conv + _identity(x, stride)
        return conv

    def _block(
        self,
        block: int,
        genes: Tuple[int, ...],
        inputs: Tuple[torch.Tensor, torch.Tensor],
    ) -> torch.Tensor:
        stride = 2 if block == REDUCTION_BLOCK else 1
        batch, channels, height, width = inputs[1].shape
        zeros = inputs[1].new_zeros(batch, channels, height // stride, width // stride)
        edges = [
            (edge, src, dst, Operation(gene))
            for edge, ((src, dst), gene) in enumerate(zip(edge_slots(), genes))
        ]
        nodes: Dict[int, torch.Tensor] = {0: inputs[0], 1: inputs[1]}
        for node in INTERNAL_NODES:
            terms = [
                self._apply_edge(block, edge, src, operation, nodes[src])
                for edge, src, dst, operation in edges
                if dst == node and operation is not Operation.NONE
            ]
            # Averaged so activations keep the same scale on every path.
            nodes[node] = sum(terms) / len(terms) if terms else zeros
        merged = torch.cat([nodes[node] for node in INTERNAL_NODES], dim=1)
        return self.projections[block](merged)

    def run(self, x: torch.Tensor, genome: Genome) -> torch.Tensor:
        if x.dim() != 4 or tuple(x.shape[1:]) != (1, IMAGE_SIZE, IMAGE_SIZE):
            raise ShapeError(
                f"Expected inputs of shape (N, 1, {IMAGE_SIZE}, {IMAGE_SIZE}), "
                f"got {tuple(x.shape)}."
            )
        stem = self.stem(x)
        previous, current = stem, stem
        for block in range(BLOCK_COUNT):
            output = self._block(block, genome.block(block), (previous, current))
            previous, current = current, output
        pooled = current.mean(dim=(2, 3))
        return self.head(pooled)


class Supernet(MicroNet):
    def __init__(self, width: int = DEFAULT_WIDTH, num_classes: int = NUM_CLASSES):
        super().__init__(width, num_classes)
        self._make_slots(
            (block, edge, operation)
            for block in range(BLOCK_COUNT)
            for edge in range(len(edge_slots()))
            for operation in Operation
        )
        self.double()

    def view(self, genome: Genome) -> "SubnetView":
        return SubnetView(self, genome)


def _selection(genome: Genome) -> List[Tuple[int, int, Operation]]:
    return [
        (block, edge, Operation(gene))
        for block in range(BLOCK_COUNT)
        for edge, gene in enumerate(genome.block(block))
    ]


class Subnet(MicroNet):
    """Standalone network owning only the slots `genome` selects."""

    def __init__(
        self,
        genome: Genome,
        width: int = DEFAULT_WIDTH,
        num_classes: int = NUM_CLASSES,
    ):
        super().__init__(width, num_classes)
        self.genome = genome
        self._make_slots(_selection(genome))
        self.double()

    @classmethod
    def from_supernet(cls, supernet: Supernet, genome: Genome) -> "Subnet":
        subnet = cls(genome, supernet.width, supernet.num_classes)
        own = subnet.state_dict()
        shared = supernet.state_dict()
        subnet.load_state_dict({name: shared[name].clone() for name in own})
        return subnet

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.run(x, self.genome)


class SubnetView:
    """A genome's path through a supernet, borrowing its parameters."""

    def __init__(self, supernet: Supernet, genome: Genome):
        self.supernet = supernet
        self.genome = genome

    def __call__(self, x: torch.Tensor) -> torch.Tensor:
        return self.supernet.run(x, self.genome)

    def named_parameters(self) -> List[Tuple[str, nn.Parameter]]:
        selected = {
            slot_name(block, edge, operation)
            for block, edge, operation in _selection(self.genome)
            if operation.is_parametric
        }
        return [
            (name, parameter)
            for name, parameter in self.supernet.named_parameters()
            if not name.startswith("slots.") or name.split(".")[1] in selected
        ]

    def parameters(self) -> List[nn.Parameter]:
        return [parameter for _, parameter in self.named_parameters()]


def forward(view, x: torch.Tensor) -> torch.Tensor:
    return view(x)


def loss_and_grad(
    view, x: torch.Tensor, y: torch.Tensor
) -> Tuple[float, torch.Tensor, Dict[str, torch.Tensor]]:
    """
    Return the mean softmax cross-entropy of `view` on `(x, y)` with its
    gradients with respect to the inputs and to every parameter the path uses.
    """
    inputs = x.detach().clone().requires_grad_(True)
    named = list(view.named_parameters())
    loss = F.cross_entropy(view(inputs), y)
    gradients = torch.autograd.grad(
        loss, [inputs] + [parameter for _, parameter in named], allow_unused=True
    )
    parameter_grads = {
        name: torch.zeros_like(parameter) if gradient is None else gradient
        for (name, parameter), gradient in zip(named, gradients[1:])
    }
    input_grad = torch.zeros_like(inputs) if gradients[0] is None else gradients[0]
    return float(loss), input_grad, parameter_grads


def cost_summary(
    genome: Genome,
    width: int = DEFAULT_WIDTH,
    num_classes: int = NUM_CLASSES,
    image_size: int = IMAGE_SIZE,
) -> Tuple[int, int]:
    """Return the parameter count and multiply-accumulate count of a subnet."""
    parameters = sum(
        parameter.numel() for parameter in Subnet(genome, width, num_classes).parameters()
    )
    macs = 9 * width * image_size**2
    for block in range(BLOCK_COUNT):
        output_size = image_size // 2 if block == REDUCTION_BLOCK else image_size
        for gene in genome.block(block):
            if not Operation(gene).is_parametric:
                continue
            macs += (9 * width + width * width) * output_size**2
        macs += len(INTERNAL_NODES) * width * width * output_size**2
    macs += width * num_classes
    return parameters, macs

