"""Dataset ingestion: MNIST IDX files and seeded synthetic blobs."""

from __future__ import annotations

import gzip
import os
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Dataset",
    "IdxFormatError",
    "load_mnist_idx",
    "mnist_dataset",
    "blob_dataset",
    "resolve_data_dir",
]

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801
DATA_DIR_ENV = "HCORE_DATA_DIR"


class IdxFormatError(ValueError):
    """Malformed IDX payload; the message names the failing byte offset."""


@dataclass(frozen=True)
class Dataset:
    name: str
    train_x: np.ndarray
    train_y: np.ndarray
    test_x: np.ndarray
    test_y: np.ndarray
    num_classes: int

    @property
    def num_features(self) -> int:
        return self.train_x.shape[1]


def _read_file(path) -> bytes:
    path = Path(path)
    if path.suffix == ".gz":
        with gzip.open(path, "rb") as fh:
            return fh.read()
    return path.read_bytes()


def _be32(data: bytes, offset: int, what: str) -> int:
    if offset + 4 > len(data):
        raise IdxFormatError(f"offset {offset}: truncated while reading {what}")
    return struct.unpack(">I", data[offset : offset + 4])[0]


def load_mnist_idx(images_path, labels_path, limit: int | None = None):
    """Parse an IDX image/label file pair.

    Returns (x, y): pixels scaled to [0, 1], shape (n, rows*cols) float64,
    and integer labels 0-9.  ``limit`` truncates to the first n items.
    """
    img = _read_file(images_path)
    magic = _be32(img, 0, "image magic")
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(
            f"offset 0: bad image magic 0x{magic:08x} (expected 0x{IMAGE_MAGIC:08x})"
        )
    count = _be32(img, 4, "image count")
    rows = _be32(img, 8, "row count")
    cols = _be32(img, 12, "column count")
    expected = 16 + count * rows * cols
    if len(img) != expected:
        raise IdxFormatError(
            f"offset {min(len(img), expected)}: image payload is {len(img)} bytes, "
            f"header promises {expected}"
        )

    lab = _read_file(labels_path)
    magic = _be32(lab, 0, "label magic")
    if magic != LABEL_MAGIC:
        raise IdxFormatError(
            f"offset 0: bad label magic 0x{magic:08x} (expected 0x{LABEL_MAGIC:08x})"
        )
    label_count = _be32(lab, 4, "label count")
    if len(lab) != 8 + label_count:
        raise IdxFormatError(
            f"offset {min(len(lab), 8 + label_count)}: label payload is "
            f"{len(lab)} bytes, header promises {8 + label_count}"
        )
    if label_count != count:
        raise IdxFormatError(
            f"offset 4: {count} images but {label_count} labels"
        )

    x = np.frombuffer(img, dtype=np.uint8, offset=16).reshape(count, rows * cols)
    y = np.frombuffer(lab, dtype=np.uint8, offset=8).astype(np.int64)
    if count and (y.min() < 0 or y.max() > 9):
        raise IdxFormatError(f"offset 8: label outside 0-9 range (max {y.max()})")
    if limit is not None:
        x = x[:limit]
        y = y[:limit]
    return x.astype(np.float64) / 255.0, y


def resolve_data_dir(root=None) -> Path:
    """Dataset root: explicit argument, then $HCORE_DATA_DIR, then ./data/mnist."""
    if root is not None:
        return Path(root)
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path("data") / "mnist"


def _find_idx(root: Path, stem: str) -> Path:
    for name in (stem, stem + ".gz"):
        candidate = root / name
        if candidate.exists():
            return candidate
    raise FileNotFoundError(f"no {stem}[.gz] under {root}")


def mnist_dataset(
    root=None,
    train_limit: int | None = None,
    test_limit: int | None = None,
) -> Dataset:
    """Load the train/t10k IDX pairs found under the dataset root."""
    root = resolve_data_dir(root)
    train_x, train_y = load_mnist_idx(
        _find_idx(root, "train-images-idx3-ubyte"),
        _find_idx(root, "train-labels-idx1-ubyte"),
        limit=train_limit,
    )
    test_x, test_y = load_mnist_idx(
        _find_idx(root, "t10k-images-idx3-ubyte"),
        _find_idx(root, "t10k-labels-idx1-ubyte"),
        limit=test_limit,
    )
    return Dataset(
        name="mnist",
        train_x=train_x,
        train_y=train_y,
        test_x=test_x,
        test_y=test_y,
        num_classes=10,
    )


def blob_dataset(
    n_train: int = 512,
    n_test: int = 128,
    n_features: int = 8,
    n_classes: int = 2,
    seed: int = 0,
    separation: float = 6.0,
) -> Dataset:
    """Linearly separable Gaussian blobs, one unit-variance cloud per class."""
    rng = np.random.default_rng(seed)
    if n_classes <= n_features:
        # Orthonormal centers keep every pair separation*sqrt(2) apart.
        square = rng.normal(size=(n_features, n_features))
        q, _ = np.linalg.qr(square)
        directions = q[:n_classes]
    else:
        directions = rng.normal(size=(n_classes, n_features))
        directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    centers = directions * separation

    def make(n):
        ys = rng.integers(0, n_classes, size=n)
        xs = centers[ys] + rng.normal(size=(n, n_features))
        return xs, ys.astype(np.int64)

    train_x, train_y = make(n_train)
    test_x, test_y = make(n_test)
    return Dataset(
        name="synthetic",
        train_x=train_x,
        train_y=train_y,
        test_x=test_x,
        test_y=test_y,
        num_classes=n_classes,
    )
