"""Monte-Carlo check that the signed-max statistic is centered.

The statistic under test is Z = sign(argmax(f(X+), f(X-))) * max(f(X+), f(X-))
for an exchangeable positive pair (X+, X-).  Exact ties take a fair coin
for the sign, which keeps Z centered even for distributions with atoms
(a constant f must yield mean 0, not -f).

Two sample sources are provided: independent half-normal scalars with
f = identity, and the pipeline's own statistic, where each draw is a
freshly Kaiming-initialized small conv layer, X+/X- are its signed tap
magnitudes, and f is the average weighted core number of the outputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .nngraph import LayerSpec, conv_left_id, conv_right_id
from .plans import kaiming_variance

__all__ = [
    "ZeroMeanCheck",
    "zero_mean_check",
    "halfnormal_pair_source",
    "conv_core_pair_source",
    "PROBE_CONV_SPEC",
]

MIN_SAMPLES = 10_000

# Small probe layer: 3x3 input, 2x2 kernel, valid convolution -> 2x2 output.
PROBE_CONV_SPEC = LayerSpec.conv2d(
    "probe", in_channels=1, out_channels=1, kernel_h=2, kernel_w=2, input_h=3, input_w=3
)


@dataclass(frozen=True)
class ZeroMeanCheck:
    mean: float
    stderr: float
    n_samples: int
    passed: bool

    def __str__(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        return (
            f"mean={self.mean:+.6e} stderr={self.stderr:.6e} "
            f"n={self.n_samples} [{verdict}]"
        )


def zero_mean_check(
    sample_pairs: Callable[[np.random.Generator, int], tuple[np.ndarray, np.ndarray]],
    f: Callable[[np.ndarray], np.ndarray],
    n_samples: int,
    seed: int = 0,
    batch_size: int = 1 << 15,
) -> ZeroMeanCheck:
    """Estimate E[Z]; passes iff |mean| <= 4 * stderr.

    ``sample_pairs(rng, count)`` returns a positive pair with the sample
    axis first; ``f`` maps each sample to a scalar, vectorized over that
    axis.
    """
    if n_samples < MIN_SAMPLES:
        raise ValueError(f"n_samples must be >= {MIN_SAMPLES}, got {n_samples}")
    rng = np.random.default_rng(seed)
    total = 0.0
    total_sq = 0.0
    remaining = n_samples
    while remaining > 0:
        count = min(batch_size, remaining)
        x_pos, x_neg = sample_pairs(rng, count)
        f_pos = np.asarray(f(x_pos), dtype=np.float64)
        f_neg = np.asarray(f(x_neg), dtype=np.float64)
        sign = np.where(f_pos > f_neg, 1.0, -1.0)
        ties = f_pos == f_neg
        if ties.any():
            sign[ties] = rng.choice([-1.0, 1.0], size=int(ties.sum()))
        z = sign * np.maximum(f_pos, f_neg)
        total += float(z.sum())
        total_sq += float(np.square(z).sum())
        remaining -= count
    mean = total / n_samples
    variance = max(total_sq / n_samples - mean * mean, 0.0)
    stderr = math.sqrt(variance / n_samples)
    return ZeroMeanCheck(
        mean=mean,
        stderr=stderr,
        n_samples=n_samples,
        passed=abs(mean) <= 4.0 * stderr,
    )


def halfnormal_pair_source(shift: float = 0.0):
    """I.i.d. |Normal(0,1)| scalars; a nonzero shift on X- breaks the
    identical-distribution assumption (negative control)."""

    def sample(rng: np.random.Generator, count: int):
        x_pos = np.abs(rng.standard_normal(count))
        x_neg = np.abs(rng.standard_normal(count)) + shift
        return x_pos, x_neg

    def f(x: np.ndarray) -> np.ndarray:
        return x

    return sample, f


def _conv_tap_structure(spec: LayerSpec):
    """(left, right, coefficient-index) per in-range tap of the probe conv."""
    lefts, rights, coefs = [], [], []
    for ko in range(spec.out_channels):
        for oy in range(spec.output_h):
            for ox in range(spec.output_w):
                for ki in range(spec.in_channels):
                    for u in range(spec.kernel_h):
                        for v in range(spec.kernel_w):
                            iy = oy * spec.stride - spec.padding + u
                            ix = ox * spec.stride - spec.padding + v
                            if 0 <= iy < spec.input_h and 0 <= ix < spec.input_w:
                                lefts.append(conv_left_id(spec, ki, iy, ix))
                                rights.append(conv_right_id(spec, ko, oy, ox))
                                coefs.append(
                                    ((ko * spec.in_channels + ki) * spec.kernel_h + u)
                                    * spec.kernel_w
                                    + v
                                )
    return np.array(lefts), np.array(rights), np.array(coefs)


def batched_whcore_mean(
    tap_weights: np.ndarray,
    lefts: np.ndarray,
    rights: np.ndarray,
    n_left: int,
    n_right: int,
    l: int = 2,
) -> np.ndarray:
    """Average core number of the right nodes, for a batch of graphs that
    share one tap structure.  Mirrors min-degree peeling exactly: ties go
    to the smallest right id, hyperedges below ``l`` alive members stop
    counting, and the reported core is the running max of removal degrees.
    """
    count = tap_weights.shape[0]
    dense = np.zeros((count, n_left, n_right))
    dense[:, lefts, rights] = tap_weights
    present = dense > 0.0
    alive = np.ones((count, n_right), dtype=bool)
    running = np.zeros(count)
    cores = np.zeros((count, n_right))
    rows = np.arange(count)
    for _ in range(n_right):
        members = present & alive[:, None, :]
        left_alive = members.sum(axis=2) >= l
        degrees = (dense * left_alive[:, :, None] * alive[:, None, :]).sum(axis=1)
        masked = np.where(alive, degrees, np.inf)
        picked = np.argmin(masked, axis=1)
        np.maximum(running, masked[rows, picked], out=running)
        cores[rows, picked] = running
        alive[rows, picked] = False
    return cores.mean(axis=1)


def conv_core_pair_source(spec: LayerSpec = PROBE_CONV_SPEC):
    """Pipeline statistic: draw a Kaiming-initialized conv layer, split the
    tap magnitudes by sign, and score each side by its average WHcore
    number.  The zero-mean initial law makes the two sides exchangeable."""
    lefts, rights, coefs = _conv_tap_structure(spec)
    n_left = spec.in_channels * spec.input_h * spec.input_w
    n_right = spec.out_channels * spec.output_h * spec.output_w
    n_coefs = (
        spec.out_channels * spec.in_channels * spec.kernel_h * spec.kernel_w
    )
    std = math.sqrt(kaiming_variance(spec))

    def sample(rng: np.random.Generator, count: int):
        kernel = rng.normal(0.0, std, size=(count, n_coefs))
        taps = kernel[:, coefs]
        x_pos = np.where(taps > 0.0, taps, 0.0)
        x_neg = np.where(taps < 0.0, -taps, 0.0)
        return x_pos, x_neg

    def f(tap_weights: np.ndarray) -> np.ndarray:
        return batched_whcore_mean(tap_weights, lefts, rights, n_left, n_right)

    return sample, f
