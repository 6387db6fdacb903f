"""
Model construction, parameter accounting and width calibration.

The equivalent networks (EIN, EIRN) replace every RCL with an untied chain of
``k + 1`` convolutions, which costs more parameters than the tied RCL. To keep
the comparison at an equal budget, ``calibrate_width`` searches a rational
width multiplier (steps of 1/1024) that brings the equivalent network's count
closest to the IRRCNN reference. The multiplier applies to every width because
the residual add forces block widths to match the incoming widths.
"""
from fractions import Fraction
from itertools import combinations
from typing import Iterable, List, Union

from loguru import logger
from pydantic import ValidationError

from irrcnn.core.tensor import Precision
from irrcnn.exceptions import ArchitectureError, ShapeError
from irrcnn.layers.base import Layer
from irrcnn.layers.classifier import Classifier
from irrcnn.models.blocks import ConvBnAct, IrrcnnBlock, TransitionBlock
from irrcnn.models.network import Network
from irrcnn.schemas.arch import Activation, ArchSpec, ParityRow, StageSpec, Variant

PARITY_TOLERANCE = 0.02
CALIBRATION_STEPS = 1024
# Published budget of the CIFAR model; summaries print it next to ours.
REFERENCE_PARAM_COUNT = 3_500_000

EQUIVALENT_VARIANTS = (Variant.IRCNN, Variant.EIN, Variant.EIRN)


def cifar_arch(
    variant: Variant = Variant.IRRCNN,
    classes: int = 10,
    k: int = 2,
    activation: Activation = Activation.RELU,
    precision: Precision = Precision.STANDARD,
    dropout_rate: float = 0.5,
    width_multiplier: Union[str, Fraction] = "1",
) -> ArchSpec:
    """
    Three blocks, three transitions, pooling in the first two.

    Widths 96 / 192 / 384 put the IRRCNN model at about 3.66M parameters.
    """
    return ArchSpec(
        variant=variant,
        input_shape=(3, 32, 32),
        stem=[96, 96],
        stages=[
            StageSpec(width=96, transition_out=192, pool=True),
            StageSpec(width=192, transition_out=384, pool=True),
            StageSpec(width=384, transition_out=384, pool=False),
        ],
        k=k,
        classes=classes,
        activation=activation,
        dropout_rate=dropout_rate,
        width_multiplier=str(width_multiplier),
        precision=precision,
    )


def desk_arch(variant: Variant = Variant.IRRCNN, **changes: object) -> ArchSpec:
    """CIFAR layout at a quarter of the width (stem 24, blocks 24 / 48 / 96)."""
    return cifar_arch(variant).with_changes(width_multiplier="1/4", **changes)


def miniature_arch(
    variant: Variant = Variant.IRRCNN,
    k: int = 2,
    activation: Activation = Activation.RELU,
    precision: Precision = Precision.STANDARD,
    classes: int = 4,
    dropout_rate: float = 0.5,
) -> ArchSpec:
    """8x8 inputs, widths at most 8: spatial trace 8 -> 8 -> 3 -> 1 -> 1."""
    return ArchSpec(
        variant=variant,
        input_shape=(3, 8, 8),
        stem=[4],
        stages=[
            StageSpec(width=4, transition_out=8, pool=True),
            StageSpec(width=8, transition_out=8, pool=True),
            StageSpec(width=8, transition_out=8, pool=False),
        ],
        k=k,
        classes=classes,
        activation=activation,
        dropout_rate=dropout_rate,
        precision=precision,
    )


def build_model(arch: ArchSpec) -> Network:
    """
    Instantiate the layers of ``arch`` with zero-filled parameters.

    Call an initializer before training.

    Raises:
        ArchitectureError: widths do not chain or the input is too small to pool
    """
    try:
        resolved = arch.resolve()
    except (ValueError, ValidationError) as e:
        raise ArchitectureError(f"Inconsistent widths in {arch.variant.value} config: {e}") from e

    act = arch.activation.value
    c = arch.input_shape[0]
    stem = []
    for i, width in enumerate(arch.scaled_stem()):
        stem.append(
            ConvBnAct(
                f"stem{i}", c, width, act, arch.precision, arch.bn_momentum, arch.bn_epsilon
            )
        )
        c = width

    stages = []
    for i, (unit, transition) in enumerate(resolved):
        block = IrrcnnBlock(
            f"block{i}", unit, arch.variant, arch.precision, arch.bn_momentum, arch.bn_epsilon
        )
        stages.append((block, TransitionBlock(f"transition{i}", transition, arch.precision)))
        c = transition.c_out

    model = Network(arch, stem, stages, Classifier("classifier", c, arch.classes, arch.precision))
    try:
        model.spatial_trace()
    except ShapeError as e:
        raise ArchitectureError(
            f"Input {arch.input_shape} is too small for this layout: {e}"
        ) from e
    logger.debug(f"Built {arch.variant.value} model with {param_count(model)} parameters")
    return model


def build_equivalent(arch: ArchSpec, variant: Union[Variant, str]) -> Network:
    """
    Control network for ``arch`` at the IRRCNN parameter budget.

    Raises:
        ArchitectureError: ``variant`` is not one of ircnn, ein, eirn
    """
    try:
        variant = Variant(variant)
    except ValueError:
        raise ArchitectureError(f"Unknown variant: {variant!r}") from None
    if variant not in EQUIVALENT_VARIANTS:
        raise ArchitectureError(
            f"Equivalent variant must be one of {[v.value for v in EQUIVALENT_VARIANTS]}, "
            f"got {variant.value!r}"
        )
    multiplier = calibrate_width(arch, variant)
    return build_model(arch.with_changes(variant=variant, width_multiplier=multiplier))


def param_count(model: Union[Layer, Iterable[Layer]]) -> int:
    """Number of trainable scalars (conv weights, biases, BN gamma/beta, classifier)."""
    if isinstance(model, Layer):
        return model.param_count()
    return sum(layer.param_count() for layer in model)


def _rcl_count(c_in: int, c_out: int, kernel: int) -> int:
    area = kernel * kernel
    return area * c_in * c_out + area * c_out * c_out + c_out


def _chain_count(c_in: int, c_out: int, kernel: int, k: int) -> int:
    area = kernel * kernel
    return area * c_in * c_out + c_out + k * (area * c_out * c_out + c_out)


def arch_param_count(arch: ArchSpec) -> int:
    """``param_count(build_model(arch))`` without allocating any arrays."""
    total = 0
    c = arch.input_shape[0]
    for width in arch.scaled_stem():
        total += 9 * c * width + width + 2 * width
        c = width
    for unit, transition in arch.resolve():
        c_1x1, c_3x3, c_pool = unit.alloc
        if arch.variant.recurrent:
            total += _rcl_count(unit.c_in, c_1x1, 1) + _rcl_count(unit.c_in, c_3x3, 3)
        else:
            total += _chain_count(unit.c_in, c_1x1, 1, unit.k)
            total += _chain_count(unit.c_in, c_3x3, 3, unit.k)
        total += unit.c_in * c_pool + c_pool + 2 * unit.c_in
        total += 9 * transition.c_in * transition.c_out + transition.c_out
        c = transition.c_out
    return total + c * arch.classes + arch.classes


def calibrate_width(arch: ArchSpec, variant: Union[Variant, str]) -> Fraction:
    """
    Width multiplier giving ``variant`` the parameter count closest to IRRCNN's.

    The reference is ``arch`` built as IRRCNN at its own multiplier. Recurrent
    variants share the reference count, so their multiplier is returned as is.
    Ties between two candidate multipliers go to the smaller one.
    """
    variant = Variant(variant)
    base = arch.multiplier
    if variant.recurrent:
        return base
    reference = arch_param_count(arch.with_changes(variant=Variant.IRRCNN))

    def count(n: int) -> int:
        m = base * Fraction(n, CALIBRATION_STEPS)
        return arch_param_count(arch.with_changes(variant=variant, width_multiplier=m))

    lo, hi = 1, 2 * CALIBRATION_STEPS
    # largest n whose count does not exceed the reference
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if count(mid) <= reference:
            lo = mid
        else:
            hi = mid - 1
    best = lo
    if abs(count(lo + 1) - reference) < abs(count(lo) - reference):
        best = lo + 1
    multiplier = base * Fraction(best, CALIBRATION_STEPS)
    logger.debug(f"Calibrated {variant.value} width multiplier: {multiplier}")
    return multiplier


def parity_report(arch: ArchSpec) -> List[ParityRow]:
    """Calibrated parameter counts of all four variants against the IRRCNN reference."""
    reference = arch_param_count(arch.with_changes(variant=Variant.IRRCNN))
    rows = []
    for variant in Variant:
        multiplier = calibrate_width(arch, variant)
        count = arch_param_count(arch.with_changes(variant=variant, width_multiplier=multiplier))
        rows.append(
            ParityRow(
                variant=variant,
                width_multiplier=str(multiplier),
                param_count=count,
                deviation=(count - reference) / reference,
            )
        )
    return rows


def parity_violations(rows: List[ParityRow], tolerance: float = PARITY_TOLERANCE) -> List[str]:
    """Variant pairs whose counts differ by more than ``tolerance`` of the smaller count."""
    violations = []
    for a, b in combinations(rows, 2):
        spread = abs(a.param_count - b.param_count) / min(a.param_count, b.param_count)
        if spread > tolerance:
            violations.append(f"{a.variant.value}/{b.variant.value}: {spread:.2%}")
    return violations
