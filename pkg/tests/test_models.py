"""
Tests for blocks, whole networks, parameter accounting and width calibration.
"""
from fractions import Fraction

import numpy as np
import pytest

from irrcnn.autograd import functional as F
from irrcnn.autograd.gradcheck import check_gradients
from irrcnn.autograd.tape import Tape, backward
from irrcnn.core import ops
from irrcnn.core.tensor import Precision
from irrcnn.exceptions import ArchitectureError, ShapeError
from irrcnn.init.uniform import init_model
from irrcnn.layers.base import ForwardContext
from irrcnn.layers.conv import Conv2d
from irrcnn.models import (
    InceptionUnit,
    IrrcnnBlock,
    TransitionBlock,
    arch_param_count,
    build_equivalent,
    build_model,
    calibrate_width,
    cifar_arch,
    desk_arch,
    ircnn_unit_forward,
    irrcnn_block_forward,
    miniature_arch,
    param_count,
    parity_report,
    transition_forward,
)
from irrcnn.models.arch import CALIBRATION_STEPS, PARITY_TOLERANCE, parity_violations
from irrcnn.schemas.arch import (
    Activation,
    ArchSpec,
    InceptionUnitSpec,
    StageSpec,
    TransitionSpec,
    Variant,
    scale_allocation,
)

RESIDUAL = [Variant.IRRCNN, Variant.EIRN]
PLAIN = [Variant.IRCNN, Variant.EIN]
PARITY_VARIANTS = (Variant.IRRCNN, Variant.EIN, Variant.EIRN)


def unit_spec(c_in=8, alloc=(2, 4, 2), k=2, activation=Activation.RELU):
    return InceptionUnitSpec(c_in=c_in, alloc=alloc, k=k, activation=activation)


def infer_on(x):
    tape = Tape(record=False)
    return ForwardContext.infer(tape), tape.constant(x)


class TestInceptionUnit:
    def test_zero_weights_give_zero_output(self, rng):
        unit = InceptionUnit("unit", unit_spec())
        ctx, x = infer_on(rng.normal(size=(2, 8, 8, 8)).astype(np.float32))
        assert np.all(unit.forward(ctx, x).value == 0)

    def test_shape_contract(self, rng):
        unit = InceptionUnit("unit", unit_spec())
        init_model(unit, rng)
        x = Tape(record=False).constant(rng.normal(size=(2, 8, 8, 8)).astype(np.float32))
        assert ircnn_unit_forward(x, unit).shape == (2, 8, 8, 8)

    def test_first_channels_come_from_1x1_branch(self, rng):
        unit = InceptionUnit("unit", unit_spec())
        init_model(unit, rng)
        ctx, x = infer_on(rng.normal(size=(1, 8, 5, 5)).astype(np.float32))
        out = unit.forward(ctx, x).value
        np.testing.assert_array_equal(out[:, :2], unit.branch_1x1.forward(ctx, x).value)

    def test_allocation_must_sum_to_width(self):
        with pytest.raises(ValueError):
            unit_spec(alloc=(2, 2, 2))

    def test_channel_mismatch(self, rng):
        unit = InceptionUnit("unit", unit_spec())
        ctx, x = infer_on(np.zeros((1, 6, 4, 4), np.float32))
        with pytest.raises(ShapeError):
            unit.forward(ctx, x)


class TestIrrcnnBlock:
    """Residual identity and shape preservation."""

    @pytest.mark.parametrize("variant", RESIDUAL)
    def test_zero_unit_is_identity(self, rng, variant):
        block = IrrcnnBlock("block", unit_spec(), variant)
        ctx, x = infer_on(rng.normal(size=(2, 8, 8, 8)).astype(np.float32))
        np.testing.assert_array_equal(block.pre_bn(ctx, x).value, x.value)

    @pytest.mark.parametrize("variant", PLAIN)
    def test_zero_unit_without_skip_is_zero(self, rng, variant):
        block = IrrcnnBlock("block", unit_spec(), variant)
        ctx, x = infer_on(rng.normal(size=(2, 8, 8, 8)).astype(np.float32))
        assert np.all(block.pre_bn(ctx, x).value == 0)

    def test_shape_preserved_for_random_configs(self):
        rng = np.random.default_rng(11)
        for trial in range(12):
            c_in = int(rng.integers(4, 13))
            variant = list(Variant)[trial % 4]
            spec = unit_spec(c_in=c_in, alloc=(1, c_in - 2, 1), k=int(rng.integers(0, 3)))
            block = IrrcnnBlock(f"block{trial}", spec, variant)
            init_model(block, rng)
            x = Tape(record=False).constant(rng.normal(size=(2, c_in, 5, 5)).astype(np.float32))
            out = irrcnn_block_forward(x, block, "train", rng)
            assert out.shape == x.shape

    @pytest.mark.parametrize("variant", list(Variant))
    def test_gradients_match_finite_differences(self, variant):
        rng = np.random.default_rng(5)
        spec = unit_spec(c_in=4, alloc=(1, 2, 1), k=1, activation=Activation.ELU)
        block = IrrcnnBlock("block", spec, variant, Precision.WIDE)
        init_model(block, rng)
        x = rng.normal(size=(2, 4, 4, 4))
        weights = rng.normal(size=(2, 4, 4, 4))
        params = {p.name: p.value for p in block.parameters()}

        def forward():
            tape = Tape()
            ctx = ForwardContext(tape=tape, training=True)
            out = block.forward(ctx, tape.constant(x))
            return tape, F.total(F.mul(out, tape.constant(weights)))

        tape, loss = forward()
        rows = check_gradients(
            lambda: float(forward()[1].value), params, backward(tape, loss), 1e-4, 12
        )
        assert all(row.passed for row in rows), {r.name: r.worst_relative_error for r in rows}


class TestTransition:
    def test_param_count(self):
        transition = TransitionBlock("t", TransitionSpec(c_in=16, c_out=32, pool=False))
        assert transition.param_count() == 4640

    def test_infer_without_pool_is_conv_and_activation(self, rng):
        transition = TransitionBlock("t", TransitionSpec(c_in=3, c_out=4, pool=False))
        init_model(transition, rng)
        x = Tape(record=False).constant(rng.normal(size=(2, 3, 6, 6)).astype(np.float32))
        out = transition_forward(x, transition, "infer")
        expected = ops.relu(
            ops.conv2d(x.value, transition.conv.weight.value, transition.conv.bias.value)
        )
        np.testing.assert_array_equal(out.value, expected)
        np.testing.assert_array_equal(transition_forward(x, transition, "infer").value, out.value)

    def test_pooling_trace(self, rng):
        transition = TransitionBlock("t", TransitionSpec(c_in=2, c_out=4, pool=True))
        assert transition.output_hw(32, 32) == (15, 15)
        assert transition.output_hw(15, 15) == (7, 7)
        x = Tape(record=False).constant(rng.normal(size=(1, 2, 32, 32)).astype(np.float32))
        assert transition_forward(x, transition, "train", rng).shape == (1, 4, 15, 15)

    def test_must_not_narrow(self):
        with pytest.raises(ValueError):
            TransitionSpec(c_in=8, c_out=4)


class TestBuildModel:
    def test_cifar10_logits(self):
        model = build_model(cifar_arch())
        logits = model.logits(np.zeros((1, 3, 32, 32), np.float32))
        assert logits.shape == (1, 10)

    def test_cifar100_head(self):
        model = build_model(cifar_arch(classes=100))
        assert model.classifier.classes == 100
        assert model.classifier.features == 384

    def test_spatial_trace(self):
        assert build_model(cifar_arch()).spatial_trace() == [32, 32, 15, 7, 1]
        assert build_model(miniature_arch()).spatial_trace() == [8, 8, 3, 1, 1]

    def test_layer_order(self):
        names = build_model(miniature_arch()).layer_names()
        assert names == [
            "stem0",
            "block0",
            "transition0",
            "block1",
            "transition1",
            "block2",
            "transition2",
            "classifier",
        ]

    def test_predict_rows_are_distributions(self, miniature, rng):
        probs = miniature.predict(rng.random((3, 3, 8, 8)).astype(np.float32))
        assert probs.shape == (3, 4)
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, rtol=1e-5)

    def test_input_shape_checked(self, miniature):
        with pytest.raises(ShapeError):
            miniature.predict(np.zeros((1, 3, 16, 16), np.float32))

    def test_state_includes_running_stats(self, miniature):
        state = miniature.state()
        assert "stem0.bn.running_mean" in state
        assert "block2.bn.running_var" in state
        assert len(state) == len(list(miniature.parameters())) + len(list(miniature.buffers()))

    def test_widths_must_chain(self):
        arch = ArchSpec(stem=[8], stages=[StageSpec(width=16, transition_out=16)])
        with pytest.raises(ArchitectureError):
            build_model(arch)

    def test_input_too_small(self):
        arch = miniature_arch().with_changes(input_shape=(3, 4, 4))
        with pytest.raises(ArchitectureError):
            build_model(arch)

    def test_wide_precision(self):
        model = build_model(miniature_arch(precision=Precision.WIDE))
        assert all(p.value.dtype == np.float64 for p in model.parameters())



def explicit_alloc_arch(multiplier="1"):
    return ArchSpec(
        input_shape=(3, 8, 8),
        stem=[32],
        stages=[StageSpec(width=32, transition_out=32, pool=False, alloc=(4, 20, 8))],
        classes=4,
        width_multiplier=multiplier,
    )


class TestAllocation:
    def test_kept_at_unit_multiplier(self):
        unit, _ = explicit_alloc_arch().resolve()[0]
        assert unit.alloc == (4, 20, 8)

    def test_scaled_with_multiplier(self):
        unit, _ = explicit_alloc_arch("1/2").resolve()[0]
        assert unit.alloc == (2, 10, 4)
        unit, _ = explicit_alloc_arch("3/4").resolve()[0]
        assert unit.alloc == (3, 15, 6)

    def test_rounding_and_floor(self):
        assert scale_allocation((4, 20, 8), 13) == (2, 8, 3)
        assert scale_allocation((1, 6, 1), 4) == (1, 2, 1)
        with pytest.raises(ValueError):
            scale_allocation((2, 1, 2), 4)

    def test_calibrated_equivalent_keeps_proportions(self):
        model = build_equivalent(explicit_alloc_arch(), Variant.EIN)
        unit, _ = model.arch.resolve()[0]
        assert model.arch.multiplier < 1
        assert unit.alloc == scale_allocation((4, 20, 8), unit.c_in)
        assert arch_param_count(model.arch) == param_count(model)


class TestParamCount:
    def test_empty(self):
        assert param_count([]) == 0

    def test_single_conv(self):
        assert param_count([Conv2d("conv", 3, 16, 3)]) == 448

    def test_cifar_budget(self):
        count = param_count(build_model(cifar_arch()))
        assert 3_000_000 < count < 4_000_000
        print(f"✅ IRRCNN CIFAR parameters: {count:,}")

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_irrcnn_count_independent_of_k(self, k):
        assert arch_param_count(cifar_arch(k=k)) == arch_param_count(cifar_arch(k=2))

    @pytest.mark.parametrize("variant", list(Variant))
    def test_analytic_count_matches_built_model(self, variant):
        for arch in (cifar_arch(variant), desk_arch(variant), miniature_arch(variant, k=3)):
            assert arch_param_count(arch) == param_count(build_model(arch))


class TestCalibration:
    def test_recurrent_variants_keep_multiplier(self):
        assert calibrate_width(cifar_arch(), Variant.IRCNN) == 1
        assert calibrate_width(desk_arch(), Variant.IRRCNN) == Fraction(1, 4)

    def test_equivalent_multiplier_shrinks(self):
        multiplier = calibrate_width(cifar_arch(), Variant.EIN)
        assert 0 < multiplier < 1
        assert (multiplier * CALIBRATION_STEPS).denominator == 1

    def test_parity_within_tolerance(self):
        rows = parity_report(cifar_arch())
        compared = [row for row in rows if row.variant in PARITY_VARIANTS]
        assert len(compared) == 3
        assert parity_violations(compared, PARITY_TOLERANCE) == []
        for row in rows:
            print(f"{row.variant.value}: {row.param_count:,} ({row.deviation:+.2%})")

    def test_build_equivalent_matches_report(self):
        rows = {row.variant: row for row in parity_report(desk_arch())}
        model = build_equivalent(desk_arch(), Variant.EIRN)
        assert model.arch.variant == Variant.EIRN
        assert param_count(model) == rows[Variant.EIRN].param_count

    def test_build_equivalent_rejects_irrcnn(self):
        with pytest.raises(ArchitectureError):
            build_equivalent(cifar_arch(), Variant.IRRCNN)
        with pytest.raises(ArchitectureError):
            build_equivalent(cifar_arch(), "resnet")

    def test_violations_are_reported(self):
        rows = parity_report(cifar_arch())
        uncalibrated = [
            row.model_copy(update={"param_count": arch_param_count(cifar_arch(row.variant))})
            for row in rows
            if row.variant in PARITY_VARIANTS
        ]
        assert parity_violations(uncalibrated)
