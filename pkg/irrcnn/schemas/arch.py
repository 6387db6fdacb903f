"""
Architecture schemas.
"""
import math
from enum import Enum
from fractions import Fraction
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from irrcnn.core.tensor import Precision

MIN_BLOCK_WIDTH = 4


class Variant(str, Enum):
    """Model family: recurrent or untied branches, with or without the residual add."""

    IRRCNN = "irrcnn"
    IRCNN = "ircnn"
    EIN = "ein"
    EIRN = "eirn"

    @property
    def residual(self) -> bool:
        return self in (Variant.IRRCNN, Variant.EIRN)

    @property
    def recurrent(self) -> bool:
        return self in (Variant.IRRCNN, Variant.IRCNN)


class Activation(str, Enum):
    RELU = "relu"
    ELU = "elu"


def default_allocation(c_in: int) -> Tuple[int, int, int]:
    """(1x1, 3x3, pool) branch widths: a quarter, the remainder, a quarter."""
    quarter = c_in // 4
    return quarter, c_in - 2 * quarter, quarter


def scale_width(width: int, multiplier: Fraction) -> int:
    """Scale a channel count, rounding half down, never below ``MIN_BLOCK_WIDTH``."""
    return max(MIN_BLOCK_WIDTH, math.ceil(Fraction(width) * multiplier - Fraction(1, 2)))


def scale_allocation(alloc: Tuple[int, int, int], width: int) -> Tuple[int, int, int]:
    """
    Stretch an explicit (1x1, 3x3, pool) allocation to ``width`` channels.

    The 1x1 and pool branches scale proportionally (half down, at least one
    channel); the 3x3 branch takes the remainder.

    Raises:
        ValueError: ``width`` leaves the 3x3 branch without a channel
    """
    ratio = Fraction(width, sum(alloc))
    one, pool = (max(1, math.ceil(a * ratio - Fraction(1, 2))) for a in (alloc[0], alloc[2]))
    middle = width - one - pool
    if middle < 1:
        raise ValueError(f"Allocation {alloc} cannot be scaled to {width} channels")
    return one, middle, pool


class InceptionUnitSpec(BaseModel):
    """Branch layout of one inception unit."""

    model_config = ConfigDict(frozen=True)

    c_in: int = Field(..., ge=3, description="Input (and output) channels")
    alloc: Tuple[int, int, int] = Field(..., description="(1x1, 3x3, pool) branch widths")
    k: int = Field(default=2, ge=0, description="RCL time steps")
    activation: Activation = Activation.RELU

    @model_validator(mode="after")
    def check_allocation(self) -> "InceptionUnitSpec":
        if min(self.alloc) < 1:
            raise ValueError(f"Every branch needs at least one channel, got {self.alloc}")
        if sum(self.alloc) != self.c_in:
            raise ValueError(
                f"Branch allocation {self.alloc} sums to {sum(self.alloc)}, expected {self.c_in}"
            )
        return self


class TransitionSpec(BaseModel):
    """Conv 3x3 -> activation -> optional max pool -> dropout."""

    model_config = ConfigDict(frozen=True)

    c_in: int = Field(..., ge=1)
    c_out: int = Field(..., ge=1)
    pool: bool = True
    dropout_rate: float = Field(default=0.5, ge=0.0, lt=1.0)
    activation: Activation = Activation.RELU

    @model_validator(mode="after")
    def check_widening(self) -> "TransitionSpec":
        if self.c_out < self.c_in:
            raise ValueError(f"Transition must not narrow: {self.c_in} -> {self.c_out}")
        return self


class StageSpec(BaseModel):
    """One block followed by one transition, described by base widths."""

    width: int = Field(..., ge=1, description="Block width (before the multiplier)")
    transition_out: int = Field(..., ge=1, description="Transition output width")
    pool: bool = True
    alloc: Optional[Tuple[int, int, int]] = Field(
        default=None,
        description="Branch widths at multiplier 1, scaled with it; default (1/4, 1/2, 1/4)",
    )


class ArchSpec(BaseModel):
    """Declarative model description."""

    variant: Variant = Variant.IRRCNN
    input_shape: Tuple[int, int, int] = Field(default=(3, 32, 32), description="(c, h, w)")
    stem: List[int] = Field(default_factory=lambda: [96, 96], min_length=1)
    stages: List[StageSpec] = Field(..., min_length=1)
    k: int = Field(default=2, ge=0)
    classes: int = Field(default=10, ge=2)
    activation: Activation = Activation.RELU
    dropout_rate: float = Field(default=0.5, ge=0.0, lt=1.0)
    width_multiplier: str = Field(default="1", description="Rational multiplier, e.g. '15/16'")
    precision: Precision = Precision.STANDARD
    bn_momentum: float = Field(default=0.99, gt=0.0, lt=1.0)
    bn_epsilon: float = Field(default=1e-5, gt=0.0)

    @field_validator("width_multiplier")
    @classmethod
    def validate_multiplier(cls, v: str) -> str:
        value = Fraction(v)
        if value <= 0:
            raise ValueError("width_multiplier must be positive")
        return str(value)

    @property
    def multiplier(self) -> Fraction:
        return Fraction(self.width_multiplier)

    def with_changes(self, **changes: object) -> "ArchSpec":
        """Validated copy with some fields replaced."""
        data = self.model_dump()
        data.update(changes)
        if isinstance(data.get("width_multiplier"), Fraction):
            data["width_multiplier"] = str(data["width_multiplier"])
        return ArchSpec.model_validate(data)

    def scaled_stem(self) -> List[int]:
        return [scale_width(w, self.multiplier) for w in self.stem]

    def resolve(self) -> List[Tuple[InceptionUnitSpec, TransitionSpec]]:
        """
        Apply the width multiplier and default allocations.

        Raises:
            ValueError: widths do not chain (stem -> block -> transition -> next block)
        """
        m = self.multiplier
        previous = self.scaled_stem()[-1]
        resolved = []
        for index, stage in enumerate(self.stages):
            width = scale_width(stage.width, m)
            if width != previous:
                raise ValueError(
                    f"Stage {index} block width {width} does not match incoming width {previous}"
                )
            if stage.alloc is None:
                alloc = default_allocation(width)
            elif m == 1:
                alloc = stage.alloc
            else:
                alloc = scale_allocation(stage.alloc, width)
            unit = InceptionUnitSpec(c_in=width, alloc=alloc, k=self.k, activation=self.activation)
            transition = TransitionSpec(
                c_in=width,
                c_out=scale_width(stage.transition_out, m),
                pool=stage.pool,
                dropout_rate=self.dropout_rate,
                activation=self.activation,
            )
            resolved.append((unit, transition))
            previous = transition.c_out
        return resolved


class ParityRow(BaseModel):
    """Parameter budget of one variant next to the IRRCNN reference."""

    variant: Variant
    width_multiplier: str = Field(..., description="Calibrated multiplier")
    param_count: int = Field(..., ge=0)
    deviation: float = Field(..., description="Relative difference from the IRRCNN count")
