#!/usr/bin/env python3
"""Build MNIST IDX fixture files from the `mnist` npm package's digit JSON.

That package ships 10,000 genuine MNIST digits as per-class JSON arrays of
784 grayscale values rounded to 3 decimals; round(v * 255) recovers the
original byte pixels exactly (the rounding error bound 0.0005 * 255 < 0.5).
The samples are grouped by class, so we shuffle with a fixed seed before
splitting into train/t10k pairs.

Usage:
    npm install mnist
    python3 scripts/build_mnist_fixture.py node_modules/mnist/src/digits data/mnist
"""

import json
import struct
import sys
from pathlib import Path

import numpy as np

TEST_COUNT = 1000
SHUFFLE_SEED = 20240120


def load_digits(digits_dir: Path):
    images = []
    labels = []
    for digit in range(10):
        with open(digits_dir / f"{digit}.json") as fh:
            flat = json.load(fh)["data"]
        arr = np.asarray(flat, dtype=np.float64).reshape(-1, 784)
        images.append(np.rint(arr * 255.0).astype(np.uint8))
        labels.append(np.full(len(arr), digit, dtype=np.uint8))
    return np.concatenate(images), np.concatenate(labels)


def write_idx_images(path: Path, images: np.ndarray):
    n = len(images)
    with open(path, "wb") as fh:
        fh.write(struct.pack(">IIII", 0x803, n, 28, 28))
        fh.write(images.tobytes())


def write_idx_labels(path: Path, labels: np.ndarray):
    with open(path, "wb") as fh:
        fh.write(struct.pack(">II", 0x801, len(labels)))
        fh.write(labels.tobytes())


def main():
    if len(sys.argv) != 3:
        print(__doc__)
        return 2
    digits_dir = Path(sys.argv[1])
    out_dir = Path(sys.argv[2])
    out_dir.mkdir(parents=True, exist_ok=True)

    images, labels = load_digits(digits_dir)
    order = np.random.default_rng(SHUFFLE_SEED).permutation(len(images))
    images, labels = images[order], labels[order]

    train_img, test_img = images[:-TEST_COUNT], images[-TEST_COUNT:]
    train_lab, test_lab = labels[:-TEST_COUNT], labels[-TEST_COUNT:]
    write_idx_images(out_dir / "train-images-idx3-ubyte", train_img)
    write_idx_labels(out_dir / "train-labels-idx1-ubyte", train_lab)
    write_idx_images(out_dir / "t10k-images-idx3-ubyte", test_img)
    write_idx_labels(out_dir / "t10k-labels-idx1-ubyte", test_lab)
    print(f"wrote {len(train_img)} train / {len(test_img)} test samples to {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
