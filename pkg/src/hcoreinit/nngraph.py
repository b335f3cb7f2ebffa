"""Signed incidence graphs of linear and convolutional layers.

Each layer yields two graphs: g_plus holds the positive weights, g_minus
the absolute values of the negative ones.  Orientation is fixed for both
layer kinds: input side = hyperedges (left), output side = vertices
(right).  Zero weights join neither graph.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .hypergraph import WeightedIncidenceGraph

__all__ = [
    "LayerSpec",
    "SnapshotLayer",
    "WeightSnapshot",
    "SignedLayerGraphs",
    "linear_layer_graphs",
    "conv_layer_graphs",
    "snapshot_graphs",
    "conv_left_id",
    "conv_right_id",
    "conv_channel_right_ids",
    "layer_selected",
]

LINEAR = "linear"
CONV2D = "conv2d"

SELECTORS = ("linear", "conv", "all")
_SELECTOR_ALIASES = {"linear_only": "linear", "conv_only": "conv"}


def normalize_selector(selector: str) -> str:
    selector = _SELECTOR_ALIASES.get(selector, selector)
    if selector not in SELECTORS:
        raise ValueError(f"unknown selector {selector!r}; expected one of {SELECTORS}")
    return selector


def layer_selected(spec: "LayerSpec", selector: str) -> bool:
    selector = normalize_selector(selector)
    if selector == "all":
        return True
    return spec.kind == (LINEAR if selector == "linear" else CONV2D)


@dataclass(frozen=True)
class LayerSpec:
    """Shape description of one layer; conv fields are zero for linear."""

    kind: str
    name: str
    fanin: int = 0
    fanout: int = 0
    in_channels: int = 0
    out_channels: int = 0
    kernel_h: int = 0
    kernel_w: int = 0
    stride: int = 1
    padding: int = 0
    input_h: int = 0
    input_w: int = 0

    def __post_init__(self):
        if self.kind == LINEAR:
            if self.fanin < 1 or self.fanout < 1:
                raise ValueError(f"linear layer {self.name!r} needs positive fanin/fanout")
        elif self.kind == CONV2D:
            dims = (
                self.in_channels,
                self.out_channels,
                self.kernel_h,
                self.kernel_w,
                self.stride,
                self.input_h,
                self.input_w,
            )
            if any(d < 1 for d in dims) or self.padding < 0:
                raise ValueError(f"conv layer {self.name!r} has non-positive dimensions")
            if self.output_h < 1 or self.output_w < 1:
                raise ValueError(
                    f"conv layer {self.name!r} produces empty output "
                    f"({self.output_h}x{self.output_w})"
                )
        else:
            raise ValueError(f"unknown layer kind {self.kind!r}")

    @classmethod
    def linear(cls, name: str, fanin: int, fanout: int) -> "LayerSpec":
        return cls(kind=LINEAR, name=name, fanin=fanin, fanout=fanout)

    @classmethod
    def conv2d(
        cls,
        name: str,
        in_channels: int,
        out_channels: int,
        kernel_h: int,
        kernel_w: int,
        input_h: int,
        input_w: int,
        stride: int = 1,
        padding: int = 0,
    ) -> "LayerSpec":
        return cls(
            kind=CONV2D,
            name=name,
            in_channels=in_channels,
            out_channels=out_channels,
            kernel_h=kernel_h,
            kernel_w=kernel_w,
            stride=stride,
            padding=padding,
            input_h=input_h,
            input_w=input_w,
        )

    @property
    def output_h(self) -> int:
        return (self.input_h + 2 * self.padding - self.kernel_h) // self.stride + 1

    @property
    def output_w(self) -> int:
        return (self.input_w + 2 * self.padding - self.kernel_w) // self.stride + 1

    def weight_shape(self) -> tuple[int, ...]:
        if self.kind == LINEAR:
            return (self.fanout, self.fanin)
        return (self.out_channels, self.in_channels, self.kernel_h, self.kernel_w)

    def bias_shape(self) -> tuple[int, ...]:
        return (self.fanout,) if self.kind == LINEAR else (self.out_channels,)


@dataclass(frozen=True)
class SnapshotLayer:
    spec: LayerSpec
    weights: np.ndarray
    bias: np.ndarray | None = None

    def __post_init__(self):
        weights = np.ascontiguousarray(self.weights, dtype=np.float32)
        object.__setattr__(self, "weights", weights)
        if weights.shape != self.spec.weight_shape():
            raise ValueError(
                f"layer {self.spec.name!r}: weight shape {weights.shape} != "
                f"expected {self.spec.weight_shape()}"
            )
        if self.bias is not None:
            bias = np.ascontiguousarray(self.bias, dtype=np.float32)
            object.__setattr__(self, "bias", bias)
            if bias.shape != self.spec.bias_shape():
                raise ValueError(
                    f"layer {self.spec.name!r}: bias shape {bias.shape} != "
                    f"expected {self.spec.bias_shape()}"
                )

    def __eq__(self, other):
        if not isinstance(other, SnapshotLayer):
            return NotImplemented
        if self.spec != other.spec:
            return False
        if self.weights.tobytes() != other.weights.tobytes():
            return False
        if (self.bias is None) != (other.bias is None):
            return False
        return self.bias is None or self.bias.tobytes() == other.bias.tobytes()


@dataclass(frozen=True)
class WeightSnapshot:
    """Ordered per-layer weights captured at a training checkpoint."""

    layers: tuple[SnapshotLayer, ...]
    epoch_tag: int = 0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if self.epoch_tag < 0:
            raise ValueError(f"epoch_tag must be nonnegative, got {self.epoch_tag}")

    def layer_names(self) -> list[str]:
        return [layer.spec.name for layer in self.layers]


@dataclass(frozen=True)
class SignedLayerGraphs:
    """Positive and negative incidence graphs of one layer."""

    spec: LayerSpec
    g_plus: WeightedIncidenceGraph
    g_minus: WeightedIncidenceGraph


def conv_left_id(spec: LayerSpec, in_channel: int, iy: int, ix: int) -> int:
    return in_channel * (spec.input_h * spec.input_w) + iy * spec.input_w + ix


def conv_right_id(spec: LayerSpec, out_channel: int, oy: int, ox: int) -> int:
    return out_channel * (spec.output_h * spec.output_w) + oy * spec.output_w + ox


def conv_channel_right_ids(spec: LayerSpec, out_channel: int) -> range:
    block = spec.output_h * spec.output_w
    return range(out_channel * block, (out_channel + 1) * block)


def linear_layer_graphs(spec: LayerSpec, weights: np.ndarray) -> SignedLayerGraphs:
    """Left nodes = fanin inputs, right nodes = fanout outputs; edge (i, j)
    carries w[j, i], routed to g_plus or g_minus by sign."""
    if spec.kind != LINEAR:
        raise ValueError(f"expected a linear spec, got {spec.kind!r}")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != (spec.fanout, spec.fanin):
        raise ValueError(
            f"layer {spec.name!r}: weight shape {weights.shape} != "
            f"({spec.fanout}, {spec.fanin})"
        )
    jp, ip = np.nonzero(weights > 0)
    jn, im = np.nonzero(weights < 0)
    plus = list(zip(ip.tolist(), jp.tolist(), weights[jp, ip].tolist()))
    minus = list(zip(im.tolist(), jn.tolist(), (-weights[jn, im]).tolist()))
    return SignedLayerGraphs(
        spec=spec,
        g_plus=WeightedIncidenceGraph(plus, num_left=spec.fanin, num_right=spec.fanout),
        g_minus=WeightedIncidenceGraph(minus, num_left=spec.fanin, num_right=spec.fanout),
    )


def conv_layer_graphs(spec: LayerSpec, weights: np.ndarray) -> SignedLayerGraphs:
    """Unrolled convolution: every in-range receptive-field tap becomes an
    edge from its input position to its output position, carrying the raw
    filter coefficient (weight sharing is preserved, not collapsed).  Taps
    that fall in the zero padding produce no edge."""
    if spec.kind != CONV2D:
        raise ValueError(f"expected a conv2d spec, got {spec.kind!r}")
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != spec.weight_shape():
        raise ValueError(
            f"layer {spec.name!r}: weight shape {weights.shape} != "
            f"expected {spec.weight_shape()}"
        )
    n_h, n_w = spec.input_h, spec.input_w
    m_h, m_w = spec.output_h, spec.output_w
    num_left = spec.in_channels * n_h * n_w
    num_right = spec.out_channels * m_h * m_w

    oy = np.arange(m_h)
    ox = np.arange(m_w)
    plus: list[tuple[int, int, float]] = []
    minus: list[tuple[int, int, float]] = []
    for u in range(spec.kernel_h):
        iy = oy * spec.stride - spec.padding + u
        oy_ok = oy[(iy >= 0) & (iy < n_h)]
        iy_ok = iy[(iy >= 0) & (iy < n_h)]
        for v in range(spec.kernel_w):
            ix = ox * spec.stride - spec.padding + v
            ox_ok = ox[(ix >= 0) & (ix < n_w)]
            ix_ok = ix[(ix >= 0) & (ix < n_w)]
            if oy_ok.size == 0 or ox_ok.size == 0:
                continue
            # Position grids shared by every (out_channel, in_channel) pair.
            in_pos = (iy_ok[:, None] * n_w + ix_ok[None, :]).ravel()
            out_pos = (oy_ok[:, None] * m_w + ox_ok[None, :]).ravel()
            for ko in range(spec.out_channels):
                rights = (ko * m_h * m_w + out_pos).tolist()
                for ki in range(spec.in_channels):
                    coef = float(weights[ko, ki, u, v])
                    if coef == 0.0:
                        continue
                    lefts = (ki * n_h * n_w + in_pos).tolist()
                    target = plus if coef > 0 else minus
                    mag = coef if coef > 0 else -coef
                    target.extend(
                        (left, right, mag) for left, right in zip(lefts, rights)
                    )
    return SignedLayerGraphs(
        spec=spec,
        g_plus=WeightedIncidenceGraph(plus, num_left=num_left, num_right=num_right),
        g_minus=WeightedIncidenceGraph(minus, num_left=num_left, num_right=num_right),
    )


def layer_graphs(spec: LayerSpec, weights: np.ndarray) -> SignedLayerGraphs:
    if spec.kind == LINEAR:
        return linear_layer_graphs(spec, weights)
    return conv_layer_graphs(spec, weights)


def snapshot_graphs(
    snapshot: WeightSnapshot, selector: str = "all"
) -> list[tuple[str, SignedLayerGraphs]]:
    """One SignedLayerGraphs per selected layer, snapshot order preserved."""
    selector = normalize_selector(selector)
    out = []
    for layer in snapshot.layers:
        if layer_selected(layer.spec, selector):
            out.append((layer.spec.name, layer_graphs(layer.spec, layer.weights)))
    return out
