"""
Tests for layers: RCL, batch norm, dropout, classifier, convolution.
"""
import math

import numpy as np
import pytest

from irrcnn.autograd.tape import Tape
from irrcnn.core import ops
from irrcnn.core.tensor import Precision
from irrcnn.exceptions import ArchitectureError, ShapeError
from irrcnn.layers import (
    BatchNorm2d,
    BatchNormParams,
    Classifier,
    ClassifierParams,
    Conv2d,
    RecurrentConv2d,
    batch_norm,
    classifier_forward,
    dropout,
)
from irrcnn.layers.base import ForwardContext
from irrcnn.layers.rcl import RclParams, UntiedConvChain, rcl_forward, unrolled_rcl_forward


def rcl_inputs(rng, c_in=3, c_out=4, kernel=3):
    tape = Tape(record=False)
    x = tape.constant(rng.normal(size=(2, c_in, 6, 6)))
    w_f = tape.constant(rng.normal(scale=0.3, size=(c_out, c_in, kernel, kernel)))
    w_r = tape.constant(rng.normal(scale=0.3, size=(c_out, c_out, kernel, kernel)))
    bias = tape.constant(rng.normal(scale=0.1, size=c_out))
    return tape, x, w_f, w_r, bias


class TestRcl:
    """Recurrent convolution with tied weights."""

    def test_scalar_unroll(self):
        tape = Tape(record=False)
        one = np.ones((1, 1, 1, 1))
        out = rcl_forward(
            tape.constant(one),
            tape.constant(one),
            tape.constant(one),
            tape.constant(np.zeros(1)),
            k=2,
        )
        assert out.value.item() == 3.0

    def test_k0_is_plain_conv(self, rng):
        _, x, w_f, w_r, bias = rcl_inputs(rng)
        out = rcl_forward(x, w_f, w_r, bias, k=0)
        expected = ops.relu(ops.conv2d(x.value, w_f.value, bias.value))
        np.testing.assert_array_equal(out.value, expected)

    def test_zero_recurrent_kernel_ignores_k(self, rng):
        tape, x, w_f, w_r, bias = rcl_inputs(rng)
        zero = tape.constant(np.zeros_like(w_r.value))
        outputs = [rcl_forward(x, w_f, zero, bias, k=k).value for k in range(4)]
        for out in outputs[1:]:
            np.testing.assert_array_equal(out, outputs[0])

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_unroll_equivalence(self, rng, k):
        _, x, w_f, w_r, bias = rcl_inputs(rng)
        tied = rcl_forward(x, w_f, w_r, bias, k)
        unrolled = unrolled_rcl_forward(x, w_f, [w_r] * k, bias)
        np.testing.assert_array_equal(tied.value, unrolled.value)

    def test_untied_copies_reproduce_tied(self, rng):
        tape, x, w_f, w_r, bias = rcl_inputs(rng)
        copies = [tape.constant(w_r.value.copy()) for _ in range(2)]
        np.testing.assert_array_equal(
            rcl_forward(x, w_f, w_r, bias, 2).value,
            unrolled_rcl_forward(x, w_f, copies, bias).value,
        )

    def test_tape_records_k_plus_one_convolutions(self, rng):
        layer = RecurrentConv2d("rcl", 3, 4, 3, k=2)
        tape = Tape()
        ctx = ForwardContext.train(tape, rng)
        layer.forward(ctx, tape.constant(rng.normal(size=(1, 3, 5, 5))))
        assert sum(node.op == "conv2d" for node in tape.nodes) == 3

    @pytest.mark.parametrize("k", [0, 1, 2, 3])
    def test_param_count_independent_of_k(self, k):
        assert RecurrentConv2d("rcl", 8, 8, 3, k).param_count() == 1160

    def test_params_validation(self):
        with pytest.raises(ShapeError):
            RclParams(w_f=np.zeros((4, 3, 3, 3)), w_r=np.zeros((4, 3, 3, 3)), bias=np.zeros(4), k=1)
        with pytest.raises(ValueError):
            RecurrentConv2d("rcl", 3, 4, 3, k=-1)

    def test_layer_forward_matches_function(self, rng):
        layer = RecurrentConv2d("rcl", 3, 4, 1, k=2, precision=Precision.WIDE)
        layer.w_f.value[...] = rng.normal(size=layer.w_f.value.shape)
        layer.w_r.value[...] = rng.normal(size=layer.w_r.value.shape)
        x = rng.normal(size=(2, 3, 4, 4))
        tape = Tape(record=False)
        out = layer.forward(ForwardContext.infer(tape), tape.constant(x))
        p = layer.params
        expected = rcl_forward(
            tape.constant(x), tape.constant(p.w_f), tape.constant(p.w_r), tape.constant(p.bias), 2
        )
        np.testing.assert_array_equal(out.value, expected.value)

    def test_untied_chain_has_its_own_kernels(self):
        chain = UntiedConvChain("chain", 8, 8, 3, k=2)
        assert len(chain.weight_sites()) == 3
        assert chain.param_count() == 3 * (9 * 8 * 8 + 8)


class TestConv2dLayer:
    def test_param_count(self):
        assert Conv2d("conv", 3, 16, 3).param_count() == 448

    def test_unsupported_kernel(self):
        with pytest.raises(ArchitectureError):
            Conv2d("conv", 3, 16, 5)


class TestBatchNorm:
    def test_train_mode_normalizes(self, rng):
        tape = Tape(record=False)
        x = tape.constant(rng.normal(loc=2.0, scale=3.0, size=(4, 3, 8, 8)))
        out = batch_norm(x, BatchNormParams.identity(3, Precision.WIDE), "train").value
        np.testing.assert_allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-5)
        np.testing.assert_allclose(out.var(axis=(0, 2, 3)), 1.0, atol=1e-3)

    def test_train_mode_updates_running_stats(self, rng):
        tape = Tape(record=False)
        values = rng.normal(loc=1.0, size=(4, 2, 4, 4))
        p = BatchNormParams.identity(2, Precision.WIDE)
        batch_norm(tape.constant(values), p, "train")
        np.testing.assert_allclose(p.running_mean, 0.01 * values.mean(axis=(0, 2, 3)))
        np.testing.assert_allclose(p.running_var, 0.99 + 0.01 * values.var(axis=(0, 2, 3)))

    def test_constant_input_gives_beta(self):
        tape = Tape(record=False)
        p = BatchNormParams.identity(2, Precision.WIDE)
        p.beta[...] = [0.5, -0.25]
        out = batch_norm(tape.constant(np.full((2, 2, 3, 3), 7.0)), p, "train").value
        np.testing.assert_allclose(out[:, 0], 0.5, atol=1e-6)
        np.testing.assert_allclose(out[:, 1], -0.25, atol=1e-6)

    def test_infer_mode_identity(self, rng):
        tape = Tape(record=False)
        x = rng.normal(size=(2, 3, 4, 4))
        p = BatchNormParams.identity(3, Precision.WIDE)
        out = batch_norm(tape.constant(x), p, "infer").value
        np.testing.assert_allclose(out, x / math.sqrt(1.0 + p.epsilon))
        assert np.all(p.running_mean == 0)

    def test_channel_mismatch(self):
        tape = Tape(record=False)
        with pytest.raises(ShapeError):
            BatchNorm2d("bn", 4).forward(
                ForwardContext.infer(tape), tape.constant(np.zeros((1, 3, 2, 2)))
            )

    def test_layer_buffers_are_named(self):
        names = [name for name, _ in BatchNorm2d("bn", 4).buffers()]
        assert names == ["bn.running_mean", "bn.running_var"]


class TestDropout:
    def test_infer_is_identity(self, rng):
        x = Tape(record=False).constant(rng.normal(size=(2, 3, 4, 4)))
        assert dropout(x, 0.5, "infer") is x

    def test_zero_rate_is_identity(self, rng):
        x = Tape(record=False).constant(rng.normal(size=(2, 3, 4, 4)))
        assert dropout(x, 0.0, "train", seed=1) is x
        assert dropout(x, 0.0, "infer") is x

    def test_expectation(self):
        x = Tape(record=False).constant(np.ones((1, 1, 100, 100)))
        out = dropout(x, 0.5, "train", seed=0).value
        assert abs(out.mean() - 1.0) < 0.05
        assert set(np.unique(out)) <= {0.0, 2.0}

    def test_seeded_masks_repeat(self):
        x = Tape(record=False).constant(np.ones((1, 1, 10, 10)))
        np.testing.assert_array_equal(
            dropout(x, 0.5, "train", seed=3).value, dropout(x, 0.5, "train", seed=3).value
        )

    def test_rate_validation(self):
        x = Tape(record=False).constant(np.ones((1, 1, 2, 2)))
        with pytest.raises(ValueError):
            dropout(x, 1.0, "train", seed=0)


class TestClassifier:
    def test_zero_weights_give_uniform(self, rng):
        tape = Tape(record=False)
        features = tape.constant(rng.normal(size=(3, 5, 1, 1)))
        probs = classifier_forward(features, ClassifierParams(weight=np.zeros((5, 10))))
        np.testing.assert_allclose(probs.value, 0.1)

    def test_closed_form(self):
        tape = Tape(record=False)
        features = tape.constant(np.ones((1, 1, 1, 1)))
        weight = np.array([[math.log(2), 0.0]])
        probs = classifier_forward(features, ClassifierParams(weight=weight))
        np.testing.assert_allclose(probs.value, [[2 / 3, 1 / 3]])

    def test_argmax_shift_invariant(self, rng):
        tape = Tape(record=False)
        features = tape.constant(rng.normal(size=(4, 3, 1, 1)))
        weight = rng.normal(size=(3, 5))
        plain = classifier_forward(features, ClassifierParams(weight=weight))
        shifted = classifier_forward(
            features, ClassifierParams(weight=weight, bias=np.full(5, 3.0))
        )
        np.testing.assert_array_equal(plain.value.argmax(axis=1), shifted.value.argmax(axis=1))

    def test_needs_two_classes(self):
        with pytest.raises(ArchitectureError):
            ClassifierParams(weight=np.zeros((4, 1)))
        with pytest.raises(ArchitectureError):
            Classifier("head", 4, 1)

    def test_feature_length_mismatch(self):
        tape = Tape(record=False)
        with pytest.raises(ShapeError):
            classifier_forward(
                tape.constant(np.ones((1, 3, 1, 1))), ClassifierParams(np.zeros((4, 2)))
            )

    def test_layer_returns_logits(self):
        head = Classifier("head", 4, 3)
        head.bias.value[...] = [1.0, 2.0, 3.0]
        tape = Tape(record=False)
        features = tape.constant(np.zeros((2, 4, 1, 1), np.float32))
        logits = head.forward(ForwardContext.infer(tape), features)
        assert logits.shape == (2, 3)
        np.testing.assert_array_equal(logits.value[0], [1.0, 2.0, 3.0])
