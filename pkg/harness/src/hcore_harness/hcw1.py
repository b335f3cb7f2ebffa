"""Harness-side HCW1 reader/writer.

Independent implementation of the wire contract (little-endian): magic
"HCW1", version u16 = 1, epoch u32, layer count u32, then per layer a
kind byte (0 linear / 1 conv2d), length-prefixed UTF-8 name, dimension
words (linear: fanin, fanout; conv: in, out, kh, kw, stride, padding,
input_h, input_w), a bias flag, float32 weights, and the bias values.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

__all__ = ["LayerRecord", "SnapshotFile", "read_hcw1", "write_hcw1"]

MAGIC = b"HCW1"
VERSION = 1


@dataclass
class LayerRecord:
    kind: str  # "linear" | "conv2d"
    name: str
    dims: dict
    weights: np.ndarray  # float32
    bias: np.ndarray | None


@dataclass
class SnapshotFile:
    epoch_tag: int
    layers: list[LayerRecord]


def write_hcw1(snapshot: SnapshotFile) -> bytes:
    out = bytearray()
    out += MAGIC
    out += struct.pack("<H", VERSION)
    out += struct.pack("<I", snapshot.epoch_tag)
    out += struct.pack("<I", len(snapshot.layers))
    for layer in snapshot.layers:
        name = layer.name.encode("utf-8")
        if layer.kind == "linear":
            out += struct.pack("<B", 0)
            out += struct.pack("<H", len(name)) + name
            out += struct.pack("<II", layer.dims["fanin"], layer.dims["fanout"])
        elif layer.kind == "conv2d":
            out += struct.pack("<B", 1)
            out += struct.pack("<H", len(name)) + name
            out += struct.pack(
                "<8I",
                layer.dims["in_channels"],
                layer.dims["out_channels"],
                layer.dims["kernel_h"],
                layer.dims["kernel_w"],
                layer.dims["stride"],
                layer.dims["padding"],
                layer.dims["input_h"],
                layer.dims["input_w"],
            )
        else:
            raise ValueError(f"unsupported layer kind {layer.kind!r}")
        out += struct.pack("<B", 0 if layer.bias is None else 1)
        out += np.ascontiguousarray(layer.weights, dtype="<f4").tobytes()
        if layer.bias is not None:
            out += np.ascontiguousarray(layer.bias, dtype="<f4").tobytes()
    return bytes(out)


def read_hcw1(data: bytes) -> SnapshotFile:
    pos = 0

    def take(n):
        nonlocal pos
        if pos + n > len(data):
            raise ValueError(f"truncated HCW1 payload at offset {pos}")
        chunk = data[pos : pos + n]
        pos += n
        return chunk

    if take(4) != MAGIC:
        raise ValueError("bad HCW1 magic")
    (version,) = struct.unpack("<H", take(2))
    if version != VERSION:
        raise ValueError(f"unsupported HCW1 version {version}")
    (epoch_tag,) = struct.unpack("<I", take(4))
    (count,) = struct.unpack("<I", take(4))
    layers = []
    for _ in range(count):
        (kind_code,) = struct.unpack("<B", take(1))
        (name_len,) = struct.unpack("<H", take(2))
        name = take(name_len).decode("utf-8")
        if kind_code == 0:
            fanin, fanout = struct.unpack("<II", take(8))
            dims = {"fanin": fanin, "fanout": fanout}
            shape = (fanout, fanin)
            bias_len = fanout
            kind = "linear"
        elif kind_code == 1:
            fields = struct.unpack("<8I", take(32))
            dims = dict(
                zip(
                    (
                        "in_channels", "out_channels", "kernel_h", "kernel_w",
                        "stride", "padding", "input_h", "input_w",
                    ),
                    fields,
                )
            )
            shape = (
                dims["out_channels"], dims["in_channels"],
                dims["kernel_h"], dims["kernel_w"],
            )
            bias_len = dims["out_channels"]
            kind = "conv2d"
        else:
            raise ValueError(f"unknown layer kind byte {kind_code}")
        (has_bias,) = struct.unpack("<B", take(1))
        n_weights = int(np.prod(shape))
        weights = np.frombuffer(take(4 * n_weights), dtype="<f4").reshape(shape).copy()
        bias = None
        if has_bias:
            bias = np.frombuffer(take(4 * bias_len), dtype="<f4").copy()
        layers.append(LayerRecord(kind=kind, name=name, dims=dims, weights=weights, bias=bias))
    if pos != len(data):
        raise ValueError(f"{len(data) - pos} trailing bytes in HCW1 payload")
    return SnapshotFile(epoch_tag=epoch_tag, layers=layers)
