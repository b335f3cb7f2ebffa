"""Serialization: the HCW1 snapshot container, edge lists, and CSV codecs.

HCW1 layout (all integers little-endian):

    magic   4 bytes  b"HCW1"
    version u16      = 1
    epoch   u32      pretraining epoch tag
    count   u32      number of layer records

    per layer:
      kind      u8   0 = linear, 1 = conv2d
      name_len  u16  followed by UTF-8 name bytes
      dims           linear: fanin u32, fanout u32
                     conv2d: in u32, out u32, kernel_h u32, kernel_w u32,
                             stride u32, padding u32, input_h u32, input_w u32
      has_bias  u8
      weights        IEEE-754 binary32 LE; linear row-major [output][input],
                     conv [out][in][kh][kw]
      bias           binary32 LE values when has_bias = 1
"""

from __future__ import annotations

import csv
import struct
from typing import IO, Iterable

import numpy as np

from .hypergraph import CoreVector, WeightedIncidenceGraph
from .nngraph import CONV2D, LINEAR, LayerSpec, SnapshotLayer, WeightSnapshot

__all__ = [
    "Hcw1FormatError",
    "EdgeListFormatError",
    "encode_hcw1",
    "decode_hcw1",
    "read_edge_list",
    "write_edge_list",
    "write_core_csv",
    "write_plan_csv",
    "write_metrics_csv",
    "read_metrics_csv",
]

HCW1_MAGIC = b"HCW1"
HCW1_VERSION = 1
_KIND_CODES = {LINEAR: 0, CONV2D: 1}
_KIND_NAMES = {0: LINEAR, 1: CONV2D}


class Hcw1FormatError(ValueError):
    """Malformed HCW1 payload; carries the byte offset of the failure."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset


class EdgeListFormatError(ValueError):
    """Malformed edge-list text; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def encode_hcw1(snapshot: WeightSnapshot) -> bytes:
    out = bytearray()
    out += HCW1_MAGIC
    out += struct.pack("<H", HCW1_VERSION)
    out += struct.pack("<I", snapshot.epoch_tag)
    out += struct.pack("<I", len(snapshot.layers))
    for layer in snapshot.layers:
        spec = layer.spec
        name = spec.name.encode("utf-8")
        if len(name) > 0xFFFF:
            raise ValueError(f"layer name too long to encode ({len(name)} bytes)")
        out += struct.pack("<B", _KIND_CODES[spec.kind])
        out += struct.pack("<H", len(name))
        out += name
        if spec.kind == LINEAR:
            out += struct.pack("<II", spec.fanin, spec.fanout)
        else:
            out += struct.pack(
                "<8I",
                spec.in_channels,
                spec.out_channels,
                spec.kernel_h,
                spec.kernel_w,
                spec.stride,
                spec.padding,
                spec.input_h,
                spec.input_w,
            )
        out += struct.pack("<B", 0 if layer.bias is None else 1)
        out += np.ascontiguousarray(layer.weights, dtype="<f4").tobytes()
        if layer.bias is not None:
            out += np.ascontiguousarray(layer.bias, dtype="<f4").tobytes()
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if n < 0 or self.pos + n > len(self.data):
            raise Hcw1FormatError(self.pos, f"truncated while reading {what}")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self, what: str) -> int:
        return self.take(1, what)[0]

    def u16(self, what: str) -> int:
        return struct.unpack("<H", self.take(2, what))[0]

    def u32(self, what: str) -> int:
        return struct.unpack("<I", self.take(4, what))[0]


def decode_hcw1(data: bytes) -> WeightSnapshot:
    """Inverse of :func:`encode_hcw1`; total on arbitrary byte input
    (raises :class:`Hcw1FormatError`, never crashes)."""
    r = _Reader(data)
    magic = r.take(4, "magic")
    if magic != HCW1_MAGIC:
        raise Hcw1FormatError(0, f"bad magic {magic!r}")
    version = r.u16("version")
    if version != HCW1_VERSION:
        raise Hcw1FormatError(4, f"unsupported version {version}")
    epoch_tag = r.u32("epoch tag")
    layer_count = r.u32("layer count")
    layers = []
    for index in range(layer_count):
        kind_offset = r.pos
        kind_code = r.u8("layer kind")
        if kind_code not in _KIND_NAMES:
            raise Hcw1FormatError(kind_offset, f"unknown layer kind byte {kind_code}")
        name_len = r.u16("name length")
        name_offset = r.pos
        try:
            name = r.take(name_len, "layer name").decode("utf-8")
        except UnicodeDecodeError as exc:
            raise Hcw1FormatError(name_offset, f"layer name is not UTF-8: {exc}") from None
        dims_offset = r.pos
        try:
            if kind_code == 0:
                fanin = r.u32("fanin")
                fanout = r.u32("fanout")
                spec = LayerSpec.linear(name, fanin=fanin, fanout=fanout)
            else:
                fields = [r.u32(f) for f in (
                    "in_channels", "out_channels", "kernel_h", "kernel_w",
                    "stride", "padding", "input_h", "input_w",
                )]
                spec = LayerSpec.conv2d(
                    name,
                    in_channels=fields[0],
                    out_channels=fields[1],
                    kernel_h=fields[2],
                    kernel_w=fields[3],
                    stride=fields[4],
                    padding=fields[5],
                    input_h=fields[6],
                    input_w=fields[7],
                )
        except Hcw1FormatError:
            raise
        except ValueError as exc:
            raise Hcw1FormatError(dims_offset, f"invalid layer dimensions: {exc}") from None
        has_bias = r.u8("bias flag")
        if has_bias not in (0, 1):
            raise Hcw1FormatError(r.pos - 1, f"bias flag must be 0 or 1, got {has_bias}")
        shape = spec.weight_shape()
        n_weights = 1
        for d in shape:
            n_weights *= d
        weight_bytes = r.take(4 * n_weights, f"weights of layer {index}")
        weights = np.frombuffer(weight_bytes, dtype="<f4").reshape(shape).copy()
        bias = None
        if has_bias:
            n_bias = spec.bias_shape()[0]
            bias_bytes = r.take(4 * n_bias, f"bias of layer {index}")
            bias = np.frombuffer(bias_bytes, dtype="<f4").copy()
        layers.append(SnapshotLayer(spec=spec, weights=weights, bias=bias))
    if r.pos != len(data):
        raise Hcw1FormatError(r.pos, f"{len(data) - r.pos} trailing bytes after last layer")
    return WeightSnapshot(layers=tuple(layers), epoch_tag=epoch_tag)


def read_edge_list(lines: Iterable[str]) -> WeightedIncidenceGraph:
    """Parse `left right [weight]` lines; `#` comments and blanks ignored.

    Node counts are inferred from the largest ids present.
    """
    edges = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if len(parts) not in (2, 3):
            raise EdgeListFormatError(lineno, f"expected 2 or 3 fields, got {len(parts)}")
        try:
            left = int(parts[0])
            right = int(parts[1])
        except ValueError:
            raise EdgeListFormatError(lineno, f"non-integer node id in {text!r}") from None
        weight = 1.0
        if len(parts) == 3:
            try:
                weight = float(parts[2])
            except ValueError:
                raise EdgeListFormatError(lineno, f"non-numeric weight {parts[2]!r}") from None
        if left < 0 or right < 0:
            raise EdgeListFormatError(lineno, "node ids must be nonnegative")
        if weight < 0:
            raise EdgeListFormatError(lineno, f"negative weight {weight}")
        edges.append((left, right, weight))
    return WeightedIncidenceGraph(edges)


def write_edge_list(graph: WeightedIncidenceGraph, fh: IO[str]) -> None:
    for left, right, weight in graph.edges():
        fh.write(f"{left} {right} {weight!r}\n")


def write_core_csv(cores: CoreVector, fh: IO[str]) -> None:
    writer = csv.writer(fh)
    writer.writerow(["node_id", "core"])
    for node, value in cores.items():
        if not cores.weighted:
            value = int(value)
        writer.writerow([node, value])


def write_plan_csv(plan, base_path) -> list[str]:
    """Write per-kind plan CSVs next to ``base_path``.

    Linear rows: layer,unit_or_filter,mean_pos,mean_neg,variance
    Conv rows:   layer,k,kprime,M,variance
    Returns the list of files written (kinds with no entries are skipped).
    """
    from .plans import ConvPlanEntry, LinearPlanEntry  # local import, no cycle

    base = str(base_path)
    written = []
    linear_rows = []
    conv_rows = []
    for _, entry in sorted(plan.entries.items()):
        if isinstance(entry, LinearPlanEntry):
            for j in range(entry.mean_pos.size):
                linear_rows.append(
                    [entry.layer, j, repr(float(entry.mean_pos[j])),
                     repr(float(entry.mean_neg[j])), repr(entry.variance)]
                )
        elif isinstance(entry, ConvPlanEntry):
            n_out, n_in = entry.filter_means.shape
            for ki in range(n_in):
                for ko in range(n_out):
                    conv_rows.append(
                        [entry.layer, ki, ko,
                         repr(float(entry.filter_means[ko, ki])), repr(entry.variance)]
                    )
        else:
            raise TypeError(f"unknown plan entry type {type(entry).__name__}")
    if linear_rows:
        path = base + ".plan-linear.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["layer", "unit_or_filter", "mean_pos", "mean_neg", "variance"])
            writer.writerows(linear_rows)
        written.append(path)
    if conv_rows:
        path = base + ".plan-conv.csv"
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["layer", "k", "kprime", "M", "variance"])
            writer.writerows(conv_rows)
        written.append(path)
    return written


def write_metrics_csv(log, fh: IO[str]) -> None:
    writer = csv.writer(fh)
    writer.writerow(["epoch", "split", "loss", "accuracy"])
    for rec in log.records:
        writer.writerow([rec.epoch, rec.split, repr(rec.loss), repr(rec.accuracy)])


def read_metrics_csv(fh: IO[str]):
    from .mlp import MetricRecord, MetricsLog  # local import, no cycle

    reader = csv.reader(fh)
    header = next(reader, None)
    if header != ["epoch", "split", "loss", "accuracy"]:
        raise ValueError(f"unexpected metrics header {header!r}")
    records = [
        MetricRecord(epoch=int(row[0]), split=row[1], loss=float(row[2]), accuracy=float(row[3]))
        for row in reader
        if row
    ]
    return MetricsLog(records=records, metadata={})
