"""Dataset plumbing: CIFAR via torchvision files, MNIST via IDX files,
and synthetic stand-ins shaped like either (for tests and smoke runs)."""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np
import torch
from torch.utils.data import TensorDataset

__all__ = ["load_datasets", "DATA_DIR_ENV"]

DATA_DIR_ENV = "HCORE_DATA_DIR"

# Standard per-dataset normalization constants.
MNIST_MEAN, MNIST_STD = 0.1307, 0.3081
CIFAR_MEAN = (0.4914, 0.4822, 0.4465)
CIFAR_STD = (0.2470, 0.2435, 0.2616)


def _data_root(root) -> Path:
    if root is not None:
        return Path(root)
    env = os.environ.get(DATA_DIR_ENV)
    if env:
        return Path(env)
    return Path("data")


def _read_idx_pair(images_path: Path, labels_path: Path):
    img = images_path.read_bytes()
    magic, count, rows, cols = struct.unpack(">IIII", img[:16])
    if magic != 0x803:
        raise ValueError(f"{images_path}: bad IDX image magic 0x{magic:08x}")
    pixels = np.frombuffer(img, dtype=np.uint8, offset=16).reshape(count, rows, cols)
    lab = labels_path.read_bytes()
    magic, lab_count = struct.unpack(">II", lab[:8])
    if magic != 0x801:
        raise ValueError(f"{labels_path}: bad IDX label magic 0x{magic:08x}")
    if lab_count != count:
        raise ValueError(f"{images_path}: {count} images vs {lab_count} labels")
    labels = np.frombuffer(lab, dtype=np.uint8, offset=8)
    return pixels, labels


def _mnist_tensors(root: Path, split: str, limit):
    stem = "train" if split == "train" else "t10k"
    pixels, labels = _read_idx_pair(
        root / f"{stem}-images-idx3-ubyte", root / f"{stem}-labels-idx1-ubyte"
    )
    if limit is not None:
        pixels, labels = pixels[:limit], labels[:limit]
    x = torch.from_numpy(pixels.astype(np.float32) / 255.0).unsqueeze(1)
    x = (x - MNIST_MEAN) / MNIST_STD
    y = torch.from_numpy(labels.astype(np.int64))
    return TensorDataset(x, y)


def _cifar_tensors(root: Path, name: str, split: str, limit):
    import torchvision

    cls = torchvision.datasets.CIFAR10 if name == "cifar10" else torchvision.datasets.CIFAR100
    ds = cls(root=str(root), train=(split == "train"), download=False)
    data = ds.data  # (N, 32, 32, 3) uint8
    labels = np.asarray(ds.targets, dtype=np.int64)
    if limit is not None:
        data, labels = data[:limit], labels[:limit]
    x = torch.from_numpy(data.astype(np.float32) / 255.0).permute(0, 3, 1, 2)
    mean = torch.tensor(CIFAR_MEAN).view(1, 3, 1, 1)
    std = torch.tensor(CIFAR_STD).view(1, 3, 1, 1)
    x = (x - mean) / std
    return TensorDataset(x, torch.from_numpy(labels))


def _synthetic(shape, num_classes, n_train, n_test, seed):
    generator = torch.Generator().manual_seed(seed)
    # Class-dependent channel offsets keep the task learnable.
    def make(n):
        y = torch.randint(0, num_classes, (n,), generator=generator)
        x = torch.randn((n, *shape), generator=generator)
        offsets = (y.float() / num_classes - 0.5).view(n, *([1] * len(shape)))
        return TensorDataset(x + offsets, y)

    return make(n_train), make(n_test)


def load_datasets(
    name: str,
    root=None,
    train_limit: int | None = None,
    test_limit: int | None = None,
    seed: int = 0,
):
    """(train, test) TensorDatasets plus the class count for ``name``.

    ``mnist`` reads IDX files under the dataset root (the primary package's
    bundled subset works); ``cifar10``/``cifar100`` need the torchvision
    binary batches already present under the root (no downloading here);
    ``synthetic-*`` fabricates correctly shaped random tensors.
    """
    root = _data_root(root)
    if name == "mnist":
        mnist_root = root if (root / "train-images-idx3-ubyte").exists() else root / "mnist"
        train = _mnist_tensors(mnist_root, "train", train_limit)
        test = _mnist_tensors(mnist_root, "test", test_limit)
        return train, test, 10
    if name in ("cifar10", "cifar100"):
        classes = 10 if name == "cifar10" else 100
        train = _cifar_tensors(root, name, "train", train_limit)
        test = _cifar_tensors(root, name, "test", test_limit)
        return train, test, classes
    if name in ("synthetic-cifar10", "synthetic-cifar100", "synthetic-mnist"):
        classes = {"synthetic-cifar10": 10, "synthetic-cifar100": 100, "synthetic-mnist": 10}[name]
        shape = (1, 28, 28) if name == "synthetic-mnist" else (3, 32, 32)
        train, test = _synthetic(
            shape, classes, train_limit or 256, test_limit or 64, seed
        )
        return train, test, classes
    raise ValueError(f"unknown dataset {name!r}")
