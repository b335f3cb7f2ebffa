"""The two experiment architectures, with per-layer export descriptors.

CIFAR net: conv 3->6 k5, 2x2 pool, conv 6->16 k5, 2x2 pool, then linear
400->120->84->classes; tanh after the convs, ReLU between linear layers.
(The 16-channel second conv is what makes the 400-wide flatten line up:
16 * 5 * 5 = 400.)

MNIST net: conv 1->10 k5, pool, conv 10->20 k5 with dropout p=0.5 on its
output, pool, then linear 320->50->10 with ReLU throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

__all__ = ["LayerDescriptor", "CifarNet", "MnistNet", "build_model", "kaiming_init"]


@dataclass(frozen=True)
class LayerDescriptor:
    """What export needs to know about one trainable layer."""

    name: str
    kind: str  # "linear" | "conv2d"
    input_h: int = 0  # conv only: spatial size the layer sees
    input_w: int = 0


class CifarNet(nn.Module):
    def __init__(self, num_classes: int = 10):
        super().__init__()
        self.conv1 = nn.Conv2d(3, 6, kernel_size=5)
        self.conv2 = nn.Conv2d(6, 16, kernel_size=5)
        self.pool = nn.MaxPool2d(2, 2)
        self.fc1 = nn.Linear(400, 120)
        self.fc2 = nn.Linear(120, 84)
        self.fc3 = nn.Linear(84, num_classes)

    def forward(self, x):
        x = self.pool(torch.tanh(self.conv1(x)))
        x = self.pool(torch.tanh(self.conv2(x)))
        x = torch.flatten(x, 1)
        x = torch.relu(self.fc1(x))
        x = torch.relu(self.fc2(x))
        return self.fc3(x)

    def layer_descriptors(self) -> list[LayerDescriptor]:
        return [
            LayerDescriptor("conv1", "conv2d", input_h=32, input_w=32),
            LayerDescriptor("conv2", "conv2d", input_h=14, input_w=14),
            LayerDescriptor("fc1", "linear"),
            LayerDescriptor("fc2", "linear"),
            LayerDescriptor("fc3", "linear"),
        ]


class MnistNet(nn.Module):
    def __init__(self, num_classes: int = 10):
        super().__init__()
        self.conv1 = nn.Conv2d(1, 10, kernel_size=5)
        self.conv2 = nn.Conv2d(10, 20, kernel_size=5)
        self.dropout = nn.Dropout2d(p=0.5)
        self.pool = nn.MaxPool2d(2, 2)
        self.fc1 = nn.Linear(320, 50)
        self.fc2 = nn.Linear(50, num_classes)

    def forward(self, x):
        x = torch.relu(self.pool(self.conv1(x)))
        x = torch.relu(self.pool(self.dropout(self.conv2(x))))
        x = torch.flatten(x, 1)
        x = torch.relu(self.fc1(x))
        return self.fc2(x)

    def layer_descriptors(self) -> list[LayerDescriptor]:
        return [
            LayerDescriptor("conv1", "conv2d", input_h=28, input_w=28),
            LayerDescriptor("conv2", "conv2d", input_h=12, input_w=12),
            LayerDescriptor("fc1", "linear"),
            LayerDescriptor("fc2", "linear"),
        ]


def build_model(dataset: str) -> nn.Module:
    if dataset in ("cifar10", "synthetic-cifar10"):
        return CifarNet(num_classes=10)
    if dataset in ("cifar100", "synthetic-cifar100"):
        return CifarNet(num_classes=100)
    if dataset in ("mnist", "synthetic-mnist"):
        return MnistNet(num_classes=10)
    raise ValueError(f"no model for dataset {dataset!r}")


def kaiming_init(model: nn.Module, seed: int) -> nn.Module:
    """Zero-mean normal weights with variance 2/fan_in; zero biases."""
    generator = torch.Generator().manual_seed(seed)
    for module in model.modules():
        if isinstance(module, nn.Linear):
            fan_in = module.in_features
        elif isinstance(module, nn.Conv2d):
            fan_in = module.in_channels * module.kernel_size[0] * module.kernel_size[1]
        else:
            continue
        std = math.sqrt(2.0 / fan_in)
        with torch.no_grad():
            module.weight.normal_(0.0, std, generator=generator)
            if module.bias is not None:
                module.bias.zero_()
    return model
