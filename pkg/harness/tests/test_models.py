"""Architecture checks: exact layer dimensions and forward shapes."""

import math

import pytest
import torch

from hcore_harness.models import CifarNet, MnistNet, build_model, kaiming_init


class TestCifarNet:
    def test_layer_dimensions(self):
        model = CifarNet(num_classes=10)
        assert (model.conv1.in_channels, model.conv1.out_channels) == (3, 6)
        assert model.conv1.kernel_size == (5, 5)
        assert (model.conv2.in_channels, model.conv2.out_channels) == (6, 16)
        assert (model.fc1.in_features, model.fc1.out_features) == (400, 120)
        assert (model.fc2.in_features, model.fc2.out_features) == (120, 84)
        assert (model.fc3.in_features, model.fc3.out_features) == (84, 10)

    def test_cifar100_head(self):
        assert build_model("cifar100").fc3.out_features == 100

    def test_forward_shape(self):
        model = CifarNet()
        out = model(torch.randn(4, 3, 32, 32))
        assert out.shape == (4, 10)

    def test_five_layer_records(self):
        assert len(CifarNet().layer_descriptors()) == 5


class TestMnistNet:
    def test_layer_dimensions(self):
        model = MnistNet()
        assert (model.conv1.in_channels, model.conv1.out_channels) == (1, 10)
        assert (model.conv2.in_channels, model.conv2.out_channels) == (10, 20)
        assert model.dropout.p == 0.5
        assert (model.fc1.in_features, model.fc1.out_features) == (320, 50)
        assert (model.fc2.in_features, model.fc2.out_features) == (50, 10)

    def test_forward_shape(self):
        out = MnistNet()(torch.randn(2, 1, 28, 28))
        assert out.shape == (2, 10)

    def test_four_layer_records(self):
        assert len(MnistNet().layer_descriptors()) == 4


class TestKaimingInit:
    def test_variance_and_zero_bias(self):
        model = kaiming_init(CifarNet(), seed=0)
        w = model.fc1.weight.detach()
        assert w.var().item() == pytest.approx(2.0 / 400, rel=0.1)
        assert torch.all(model.fc1.bias == 0)
        conv_w = model.conv1.weight.detach()
        assert conv_w.var().item() == pytest.approx(2.0 / 75, rel=0.1)

    def test_seeded_reproducibility(self):
        a = kaiming_init(CifarNet(), seed=3)
        b = kaiming_init(CifarNet(), seed=3)
        assert torch.equal(a.conv2.weight, b.conv2.weight)
        c = kaiming_init(CifarNet(), seed=4)
        assert not torch.equal(a.conv2.weight, c.conv2.weight)
