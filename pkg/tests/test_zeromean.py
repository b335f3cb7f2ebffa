"""Centered-statistic checks: Monte Carlo modes, negative control, and
agreement of the vectorized peel with the production decomposition."""

import numpy as np
import pytest

from hcoreinit.hypergraph import whcore_numbers
from hcoreinit.nngraph import conv_layer_graphs
from hcoreinit.plans import kaiming_variance
from hcoreinit.zeromean import (
    PROBE_CONV_SPEC,
    _conv_tap_structure,
    batched_whcore_mean,
    conv_core_pair_source,
    halfnormal_pair_source,
    zero_mean_check,
)


def test_rejects_small_sample_counts():
    sample, f = halfnormal_pair_source()
    with pytest.raises(ValueError, match="n_samples"):
        zero_mean_check(sample, f, n_samples=1000, seed=0)


def test_mode_a_identity_halfnormal_passes():
    sample, f = halfnormal_pair_source()
    result = zero_mean_check(sample, f, n_samples=100_000, seed=1)
    assert result.passed
    assert abs(result.mean) <= 4 * result.stderr


def test_constant_statistic_is_centered_by_coin_flip():
    sample, _ = halfnormal_pair_source()

    def const(x):
        return np.full(len(x), 2.5)

    result = zero_mean_check(sample, const, n_samples=100_000, seed=2)
    assert result.passed
    assert abs(result.mean) < 0.05


def test_shifted_law_negative_control_fails():
    sample, f = halfnormal_pair_source(shift=0.5)
    result = zero_mean_check(sample, f, n_samples=100_000, seed=3)
    assert not result.passed
    assert result.mean < 0  # the shifted side wins the max more often


def test_mode_b_pipeline_statistic_passes():
    sample, f = conv_core_pair_source()
    result = zero_mean_check(sample, f, n_samples=100_000, seed=4)
    assert result.passed


def test_batched_peel_matches_production_whcore():
    spec = PROBE_CONV_SPEC
    lefts, rights, coefs = _conv_tap_structure(spec)
    n_left = spec.in_channels * spec.input_h * spec.input_w
    n_right = spec.out_channels * spec.output_h * spec.output_w
    rng = np.random.default_rng(55)
    std = np.sqrt(kaiming_variance(spec))
    kernels = rng.normal(0.0, std, size=(200, 4))
    taps = kernels[:, coefs]
    x_pos = np.where(taps > 0.0, taps, 0.0)
    x_neg = np.where(taps < 0.0, -taps, 0.0)
    got_pos = batched_whcore_mean(x_pos, lefts, rights, n_left, n_right)
    got_neg = batched_whcore_mean(x_neg, lefts, rights, n_left, n_right)
    for i in range(kernels.shape[0]):
        graphs = conv_layer_graphs(spec, kernels[i].reshape(spec.weight_shape()))
        want_pos = np.mean([whcore_numbers(graphs.g_plus)[j] for j in range(n_right)])
        want_neg = np.mean([whcore_numbers(graphs.g_minus)[j] for j in range(n_right)])
        assert got_pos[i] == pytest.approx(want_pos, abs=1e-9)
        assert got_neg[i] == pytest.approx(want_neg, abs=1e-9)


def test_results_are_deterministic_per_seed():
    sample, f = conv_core_pair_source()
    a = zero_mean_check(sample, f, n_samples=20_000, seed=9)
    b = zero_mean_check(sample, f, n_samples=20_000, seed=9)
    assert (a.mean, a.stderr) == (b.mean, b.stderr)
