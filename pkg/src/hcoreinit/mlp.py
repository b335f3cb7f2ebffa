"""Minimal MLP training runtime: ReLU hidden layers, softmax cross-entropy
head, momentum SGD, and the pretrain / re-initialize / resume experiment."""

from __future__ import annotations

import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .datasets import Dataset
from .nngraph import LayerSpec, SnapshotLayer, WeightSnapshot
from .plans import build_plan, sample_reinit

__all__ = [
    "DivergenceError",
    "TrainConfig",
    "MetricRecord",
    "MetricsLog",
    "MlpModel",
    "init_baseline",
    "train",
    "run_experiment",
]

INIT_SCHEMES = ("kaiming", "xavier", "hcore")


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""


@dataclass(frozen=True)
class TrainConfig:
    arch: tuple[int, ...]
    epochs: int
    learning_rate: float = 0.001
    momentum: float = 0.9
    batch_size: int = 64
    pretrain_epochs: int = 10
    seed: int = 0
    init: str = "kaiming"

    def __post_init__(self):
        object.__setattr__(self, "arch", tuple(int(n) for n in self.arch))
        if len(self.arch) < 2 or any(n < 1 for n in self.arch):
            raise ValueError(f"arch must be >= 2 positive sizes, got {self.arch}")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")
        if not 0 <= self.pretrain_epochs <= self.epochs:
            raise ValueError(
                f"pretrain_epochs must lie in [0, epochs], got "
                f"{self.pretrain_epochs} with epochs={self.epochs}"
            )
        if self.learning_rate <= 0 or self.batch_size < 1:
            raise ValueError("learning_rate and batch_size must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
        if self.init not in INIT_SCHEMES:
            raise ValueError(f"init must be one of {INIT_SCHEMES}, got {self.init!r}")


@dataclass(frozen=True)
class MetricRecord:
    epoch: int
    split: str  # "train" | "test"
    loss: float
    accuracy: float


@dataclass
class MetricsLog:
    records: list[MetricRecord] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def final_test_accuracy(self) -> float:
        tests = [r for r in self.records if r.split == "test"]
        if not tests:
            raise ValueError("log has no test records")
        return tests[-1].accuracy

    def split_series(self, split: str) -> list[tuple[int, float, float]]:
        return [(r.epoch, r.loss, r.accuracy) for r in self.records if r.split == split]


class MlpModel:
    """Fully connected ReLU network; weights are (fanout, fanin) float64."""

    def __init__(self, sizes, weights, biases):
        self.sizes = tuple(int(n) for n in sizes)
        self.weights = [np.asarray(w, dtype=np.float64) for w in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            expected = (self.sizes[i + 1], self.sizes[i])
            if w.shape != expected or b.shape != (self.sizes[i + 1],):
                raise ValueError(
                    f"layer {i}: got weight {w.shape} / bias {b.shape}, "
                    f"expected {expected} / ({self.sizes[i + 1]},)"
                )

    @classmethod
    def zeros(cls, sizes) -> "MlpModel":
        sizes = tuple(sizes)
        weights = [np.zeros((sizes[i + 1], sizes[i])) for i in range(len(sizes) - 1)]
        biases = [np.zeros(sizes[i + 1]) for i in range(len(sizes) - 1)]
        return cls(sizes, weights, biases)

    def copy(self) -> "MlpModel":
        return MlpModel(
            self.sizes,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
        )

    def check_finite(self) -> None:
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if not (np.isfinite(w).all() and np.isfinite(b).all()):
                raise DivergenceError(f"non-finite parameters in layer {i}")

    def forward_logits(self, x: np.ndarray) -> np.ndarray:
        a = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            a = np.maximum(z, 0.0) if i < len(self.weights) - 1 else z
        return a

    def loss_and_accuracy(self, x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
        logits = self.forward_logits(x)
        probs = _softmax(logits)
        with np.errstate(divide="ignore"):  # inf loss signals divergence
            loss = float(-np.log(probs[np.arange(len(y)), y]).mean())
        accuracy = float((logits.argmax(axis=1) == y).mean())
        return loss, accuracy

    def loss_and_grads(self, x: np.ndarray, y: np.ndarray):
        """Mean cross-entropy over the batch plus analytic gradients."""
        activations = [x]
        pre = []
        a = x
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = a @ w.T + b
            pre.append(z)
            a = np.maximum(z, 0.0) if i < len(self.weights) - 1 else z
            activations.append(a)
        probs = _softmax(activations[-1])
        n = len(y)
        with np.errstate(divide="ignore"):  # inf loss signals divergence
            loss = float(-np.log(probs[np.arange(n), y]).mean())
        accuracy = float((activations[-1].argmax(axis=1) == y).mean())

        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        grads_w = [np.empty(0)] * len(self.weights)
        grads_b = [np.empty(0)] * len(self.biases)
        for i in range(len(self.weights) - 1, -1, -1):
            grads_w[i] = delta.T @ activations[i]
            grads_b[i] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.weights[i]) * (pre[i - 1] > 0.0)
        return loss, accuracy, grads_w, grads_b

    def to_snapshot(self, epoch_tag: int = 0) -> WeightSnapshot:
        layers = []
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            spec = LayerSpec.linear(f"fc{i + 1}", fanin=self.sizes[i], fanout=self.sizes[i + 1])
            layers.append(
                SnapshotLayer(
                    spec=spec,
                    weights=w.astype(np.float32),
                    bias=b.astype(np.float32),
                )
            )
        return WeightSnapshot(layers=tuple(layers), epoch_tag=epoch_tag)

    @classmethod
    def from_snapshot(cls, snapshot: WeightSnapshot) -> "MlpModel":
        specs = [layer.spec for layer in snapshot.layers]
        if any(spec.kind != "linear" for spec in specs):
            raise ValueError("snapshot contains non-linear layers")
        for prev, nxt in zip(specs, specs[1:]):
            if prev.fanout != nxt.fanin:
                raise ValueError(
                    f"layer sizes do not chain: {prev.name} fanout {prev.fanout} "
                    f"!= {nxt.name} fanin {nxt.fanin}"
                )
        sizes = [specs[0].fanin] + [spec.fanout for spec in specs]
        weights = [np.asarray(layer.weights, dtype=np.float64) for layer in snapshot.layers]
        biases = [
            np.zeros(spec.fanout) if layer.bias is None else np.asarray(layer.bias, dtype=np.float64)
            for spec, layer in zip(specs, snapshot.layers)
        ]
        return cls(sizes, weights, biases)


def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=1, keepdims=True)


def init_baseline(model: MlpModel, scheme: str, seed: int) -> MlpModel:
    """Zero-mean normal weights (variance 2/fanin for kaiming, 1/fanin for
    xavier), zero biases."""
    if scheme not in ("kaiming", "xavier"):
        raise ValueError(f"baseline scheme must be kaiming or xavier, got {scheme!r}")
    rng = np.random.default_rng(seed)
    weights = []
    for i in range(len(model.sizes) - 1):
        fanin = model.sizes[i]
        variance = 2.0 / fanin if scheme == "kaiming" else 1.0 / fanin
        weights.append(
            rng.normal(0.0, np.sqrt(variance), size=(model.sizes[i + 1], fanin))
        )
    biases = [np.zeros(n) for n in model.sizes[1:]]
    return MlpModel(model.sizes, weights, biases)


def train(
    model: MlpModel,
    dataset: Dataset,
    config: TrainConfig,
    epoch_offset: int = 0,
) -> tuple[MlpModel, MetricsLog]:
    """Momentum SGD (v <- mu*v - lr*g; w <- w + v) over per-epoch shuffles.

    Logs train loss/accuracy averaged over the epoch's minibatches and test
    loss/accuracy evaluated after each epoch.  Epoch numbers start at
    ``epoch_offset`` + 1.
    """
    if len(dataset.train_x) == 0:
        raise ValueError("dataset has no training examples")
    started = time.perf_counter()
    model = model.copy()
    rng = np.random.default_rng(config.seed)
    vel_w = [np.zeros_like(w) for w in model.weights]
    vel_b = [np.zeros_like(b) for b in model.biases]
    log = MetricsLog(metadata={"config": asdict(config), "epoch_offset": epoch_offset})
    n = len(dataset.train_x)
    for epoch_index in range(config.epochs):
        epoch = epoch_offset + epoch_index + 1
        order = rng.permutation(n)
        seen = 0
        loss_sum = 0.0
        correct = 0.0
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            xb = dataset.train_x[idx]
            yb = dataset.train_y[idx]
            loss, accuracy, grads_w, grads_b = model.loss_and_grads(xb, yb)
            if not np.isfinite(loss):
                raise DivergenceError(
                    f"non-finite loss {loss} at epoch {epoch}, batch {start // config.batch_size}"
                )
            for i in range(len(model.weights)):
                vel_w[i] = config.momentum * vel_w[i] - config.learning_rate * grads_w[i]
                vel_b[i] = config.momentum * vel_b[i] - config.learning_rate * grads_b[i]
                model.weights[i] += vel_w[i]
                model.biases[i] += vel_b[i]
            seen += len(idx)
            loss_sum += loss * len(idx)
            correct += accuracy * len(idx)
        model.check_finite()
        log.records.append(
            MetricRecord(epoch=epoch, split="train", loss=loss_sum / seen, accuracy=correct / seen)
        )
        test_loss, test_accuracy = model.loss_and_accuracy(dataset.test_x, dataset.test_y)
        log.records.append(
            MetricRecord(epoch=epoch, split="test", loss=test_loss, accuracy=test_accuracy)
        )
    log.metadata["wall_time_s"] = time.perf_counter() - started
    return model, log


def run_experiment(dataset: Dataset, config: TrainConfig) -> tuple[MetricsLog, MetricsLog]:
    """Baseline arm vs. re-initialization arm.

    Arm 1 trains a Kaiming-initialized model for the full epoch budget.
    Arm 2 trains the same initial model for N = pretrain_epochs epochs,
    re-initializes its linear layers from the snapshot's core numbers
    (biases preserved), and trains for the remaining epochs; its epoch
    axis includes the pretraining epochs, so both logs align.
    """
    if config.pretrain_epochs < 1:
        raise ValueError("run_experiment needs pretrain_epochs >= 1")
    start_model = init_baseline(MlpModel.zeros(config.arch), "kaiming", config.seed)

    _, baseline_log = train(start_model, dataset, config)

    pretrain_cfg = replace(config, epochs=config.pretrain_epochs, pretrain_epochs=0)
    pretrained, pretrain_log = train(start_model, dataset, pretrain_cfg)
    snapshot = pretrained.to_snapshot(epoch_tag=config.pretrain_epochs)
    plan = build_plan(snapshot, selector="linear")
    reinit_snap = sample_reinit(snapshot, plan, seed=config.seed, selector="linear")
    resumed = MlpModel.from_snapshot(reinit_snap)

    rest_cfg = replace(
        config, epochs=config.epochs - config.pretrain_epochs, pretrain_epochs=0
    )
    _, rest_log = train(resumed, dataset, rest_cfg, epoch_offset=config.pretrain_epochs)

    hcore_log = MetricsLog(
        records=pretrain_log.records + rest_log.records,
        metadata={
            "config": asdict(config),
            "pretrain_wall_time_s": pretrain_log.metadata.get("wall_time_s"),
            "wall_time_s": (
                (pretrain_log.metadata.get("wall_time_s") or 0.0)
                + (rest_log.metadata.get("wall_time_s") or 0.0)
            ),
        },
    )
    return baseline_log, hcore_log
