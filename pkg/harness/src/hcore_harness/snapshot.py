"""Export/import between torch models and HCW1 snapshots."""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from .hcw1 import LayerRecord, SnapshotFile, read_hcw1, write_hcw1

__all__ = ["export_snapshot", "import_snapshot"]


def _descriptor_modules(model: nn.Module):
    for desc in model.layer_descriptors():
        module = getattr(model, desc.name)
        yield desc, module


def export_snapshot(model: nn.Module, epoch: int) -> bytes:
    """HCW1 bytes for every trainable layer of the model (binary32 lossless)."""
    layers = []
    for desc, module in _descriptor_modules(model):
        if desc.kind == "linear":
            if not isinstance(module, nn.Linear):
                raise TypeError(f"layer {desc.name!r}: expected Linear, got {type(module).__name__}")
            dims = {"fanin": module.in_features, "fanout": module.out_features}
        elif desc.kind == "conv2d":
            if not isinstance(module, nn.Conv2d):
                raise TypeError(f"layer {desc.name!r}: expected Conv2d, got {type(module).__name__}")
            if module.stride[0] != module.stride[1] or module.padding[0] != module.padding[1]:
                raise ValueError(f"layer {desc.name!r}: non-square stride/padding unsupported")
            dims = {
                "in_channels": module.in_channels,
                "out_channels": module.out_channels,
                "kernel_h": module.kernel_size[0],
                "kernel_w": module.kernel_size[1],
                "stride": module.stride[0],
                "padding": module.padding[0],
                "input_h": desc.input_h,
                "input_w": desc.input_w,
            }
        else:
            raise ValueError(f"layer {desc.name!r}: unsupported kind {desc.kind!r}")
        weights = module.weight.detach().cpu().numpy().astype(np.float32)
        bias = None
        if module.bias is not None:
            bias = module.bias.detach().cpu().numpy().astype(np.float32)
        layers.append(
            LayerRecord(kind=desc.kind, name=desc.name, dims=dims, weights=weights, bias=bias)
        )
    return write_hcw1(SnapshotFile(epoch_tag=epoch, layers=layers))


def import_snapshot(model: nn.Module, payload: bytes) -> nn.Module:
    """Load HCW1 weights back into the model in place (names must match)."""
    snapshot = read_hcw1(payload)
    by_name = {layer.name: layer for layer in snapshot.layers}
    for desc, module in _descriptor_modules(model):
        record = by_name.pop(desc.name, None)
        if record is None:
            raise ValueError(f"snapshot is missing layer {desc.name!r}")
        weight = torch.from_numpy(record.weights)
        if weight.shape != module.weight.shape:
            raise ValueError(
                f"layer {desc.name!r}: snapshot weight {tuple(weight.shape)} "
                f"!= model {tuple(module.weight.shape)}"
            )
        with torch.no_grad():
            module.weight.copy_(weight)
            if record.bias is not None and module.bias is not None:
                module.bias.copy_(torch.from_numpy(record.bias))
    if by_name:
        raise ValueError(f"snapshot has extra layers: {sorted(by_name)}")
    return model
