"""Re-initialization plans: core-number means plus the Kaiming variance.

For a linear layer the means are the normalized WHcore numbers of the
output neurons, one group per weight sign.  For a conv layer each filter
gets a single signed mean: the larger of the two per-channel average
core numbers, carrying the sign of the graph it came from.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .hypergraph import whcore_numbers
from .nngraph import (
    CONV2D,
    LINEAR,
    LayerSpec,
    SignedLayerGraphs,
    SnapshotLayer,
    WeightSnapshot,
    conv_channel_right_ids,
    layer_graphs,
    layer_selected,
    normalize_selector,
)

__all__ = [
    "LinearPlanEntry",
    "ConvPlanEntry",
    "InitPlan",
    "PlanMismatchError",
    "kaiming_variance",
    "normalized_means",
    "fcnn_plan",
    "cnn_plan",
    "build_plan",
    "sample_reinit",
]


class PlanMismatchError(ValueError):
    """The plan does not cover a selected layer or disagrees with its spec."""


def kaiming_variance(spec: LayerSpec) -> float:
    """2 / fan_in, with fan_in = incoming units (I*kh*kw for conv)."""
    if spec.kind == LINEAR:
        fan_in = spec.fanin
    else:
        fan_in = spec.in_channels * spec.kernel_h * spec.kernel_w
    return 2.0 / fan_in


@dataclass(frozen=True)
class LinearPlanEntry:
    layer: str
    mean_pos: np.ndarray  # per output neuron, normalized to sum 1 (or all 0)
    mean_neg: np.ndarray
    variance: float


@dataclass(frozen=True)
class ConvPlanEntry:
    layer: str
    filter_means: np.ndarray  # signed M, shape (out_channels, in_channels)
    variance: float


@dataclass(frozen=True)
class InitPlan:
    """Plan entries keyed by layer index within the source snapshot."""

    entries: dict[int, LinearPlanEntry | ConvPlanEntry] = field(default_factory=dict)


def normalized_means(values: np.ndarray) -> np.ndarray:
    """values / sum(values), or all zeros when the sum is zero."""
    values = np.asarray(values, dtype=np.float64)
    total = values.sum()
    if total == 0.0:
        return np.zeros(values.shape)
    return values / total


def _normalized_cores(graph, count: int) -> np.ndarray:
    cores = whcore_numbers(graph)
    return normalized_means([cores[j] for j in range(count)])


def fcnn_plan(graphs: SignedLayerGraphs, spec: LayerSpec) -> LinearPlanEntry:
    """Per-output-neuron means c_j / sum(c) for each sign group; a sign
    group whose cores sum to zero gets all-zero means."""
    if spec.kind != LINEAR:
        raise ValueError(f"fcnn_plan expects a linear spec, got {spec.kind!r}")
    return LinearPlanEntry(
        layer=spec.name,
        mean_pos=_normalized_cores(graphs.g_plus, spec.fanout),
        mean_neg=_normalized_cores(graphs.g_minus, spec.fanout),
        variance=kaiming_variance(spec),
    )


def cnn_plan(graphs: SignedLayerGraphs, spec: LayerSpec) -> ConvPlanEntry:
    """Signed filter means from per-channel average core numbers.

    m(W+) and m(W-) average the cores of a filter's output channel over
    all of its output positions; M = +m(W+) when m(W+) >= m(W-), else
    -m(W-).  The input-channel index never subsets the output nodes, so
    M varies only with the output channel.
    """
    if spec.kind != CONV2D:
        raise ValueError(f"cnn_plan expects a conv2d spec, got {spec.kind!r}")
    cores_pos = whcore_numbers(graphs.g_plus)
    cores_neg = whcore_numbers(graphs.g_minus)
    positions = spec.output_h * spec.output_w
    means = np.zeros((spec.out_channels, spec.in_channels))
    for ko in range(spec.out_channels):
        ids = conv_channel_right_ids(spec, ko)
        m_pos = sum(cores_pos[j] for j in ids) / positions
        m_neg = sum(cores_neg[j] for j in ids) / positions
        m = m_pos if m_pos >= m_neg else -m_neg
        means[ko, :] = m
    return ConvPlanEntry(
        layer=spec.name,
        filter_means=means,
        variance=kaiming_variance(spec),
    )


def build_plan(snapshot: WeightSnapshot, selector: str = "all") -> InitPlan:
    """Plan entries for every selected layer of the snapshot."""
    selector = normalize_selector(selector)
    entries: dict[int, LinearPlanEntry | ConvPlanEntry] = {}
    for index, layer in enumerate(snapshot.layers):
        if not layer_selected(layer.spec, selector):
            continue
        graphs = layer_graphs(layer.spec, layer.weights)
        if layer.spec.kind == LINEAR:
            entries[index] = fcnn_plan(graphs, layer.spec)
        else:
            entries[index] = cnn_plan(graphs, layer.spec)
    return InitPlan(entries=entries)


def sample_reinit(
    snapshot: WeightSnapshot,
    plan: InitPlan,
    seed: int,
    selector: str = "all",
) -> WeightSnapshot:
    """Resample the selected layers' weights from the plan's normals.

    Linear: weight (i, j) draws from Normal(+mean_pos[j], var) when the
    pretrained value is >= 0, else Normal(-mean_neg[j], var).  Conv: every
    coefficient of filter (k, k') draws from Normal(M[k', k], var).  Biases
    and unselected layers are copied unchanged.  The generator is seeded
    per layer with seed XOR layer-index, so output is a pure function of
    (snapshot, plan, seed, selector).
    """
    selector = normalize_selector(selector)
    if seed < 0:
        raise ValueError("seed must be nonnegative")
    new_layers = []
    for index, layer in enumerate(snapshot.layers):
        spec = layer.spec
        if not layer_selected(spec, selector):
            new_layers.append(layer)
            continue
        entry = plan.entries.get(index)
        if entry is None:
            raise PlanMismatchError(
                f"plan has no entry for selected layer {index} ({spec.name!r})"
            )
        if entry.layer != spec.name:
            raise PlanMismatchError(
                f"plan entry for layer {index} names {entry.layer!r}, "
                f"snapshot has {spec.name!r}"
            )
        rng = np.random.default_rng(seed ^ index)
        std = float(np.sqrt(entry.variance))
        old = np.asarray(layer.weights, dtype=np.float64)
        if spec.kind == LINEAR:
            if not isinstance(entry, LinearPlanEntry) or entry.mean_pos.size != spec.fanout:
                raise PlanMismatchError(
                    f"plan entry for layer {index} does not match the linear spec"
                )
            means = np.where(
                old >= 0.0,
                entry.mean_pos[:, None],
                -entry.mean_neg[:, None],
            )
        else:
            if not isinstance(entry, ConvPlanEntry) or entry.filter_means.shape != (
                spec.out_channels,
                spec.in_channels,
            ):
                raise PlanMismatchError(
                    f"plan entry for layer {index} does not match the conv spec"
                )
            means = np.broadcast_to(
                entry.filter_means[:, :, None, None], old.shape
            )
        fresh = means + rng.normal(0.0, std, size=old.shape)
        new_layers.append(
            SnapshotLayer(spec=spec, weights=fresh.astype(np.float32), bias=layer.bias)
        )
    return WeightSnapshot(layers=tuple(new_layers), epoch_tag=snapshot.epoch_tag)
