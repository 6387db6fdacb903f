"""
Training-side schemas: initializer and optimizer settings, report rows.
"""
from enum import Enum
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


class InitScheme(str, Enum):
    SCALED_UNIFORM = "scaled"
    LSUV = "lsuv"


class OptimizerName(str, Enum):
    SGD = "sgd"
    EVE = "eve"


class L2Scope(str, Enum):
    """Which weights the L2 penalty covers."""

    BLOCKS = "blocks"
    ALL = "all"


class InitConfig(BaseModel):
    """Initializer selection and LSUV loop settings."""

    model_config = ConfigDict(extra="forbid")

    scheme: InitScheme = InitScheme.SCALED_UNIFORM
    tol_var: float = Field(default=0.05, gt=0.0, description="Accepted |variance - 1|")
    max_iterations: int = Field(default=10, ge=1, description="LSUV rescaling rounds per layer")
    probe_size: int = Field(default=128, ge=2, description="Images in the LSUV probe batch")
    seed: Optional[int] = Field(
        default=None, ge=0, description="Weight seed; the run seed when unset"
    )


class SgdConfig(BaseModel):
    """SGD with momentum and per-update learning-rate decay."""

    model_config = ConfigDict(extra="forbid")

    learning_rate: float = Field(default=0.01, gt=0.0)
    momentum: float = Field(default=0.9, ge=0.0, lt=1.0)
    decay: float = Field(default=9.99e-7, ge=0.0)


class EveConfig(BaseModel):
    """EVE hyperparameters."""

    model_config = ConfigDict(extra="forbid")

    learning_rate: float = Field(default=1e-4, gt=0.0, description="lambda")
    decay: float = Field(default=1e-4, ge=0.0, description="gamma")
    beta1: float = Field(default=0.9, ge=0.0, lt=1.0)
    beta2: float = Field(default=0.999, ge=0.0, lt=1.0)
    beta3: float = Field(default=0.9999, ge=0.0, lt=1.0)
    lower_threshold: float = Field(default=0.1, gt=0.0, description="kappa")
    upper_threshold: float = Field(default=10.0, gt=0.0, description="K")
    epsilon: float = Field(default=1e-8, gt=0.0)


class MetricsRow(BaseModel):
    """One line of the per-epoch metrics file."""

    epoch: int = Field(..., ge=1)
    train_loss: float
    train_acc: float = Field(..., ge=0.0, le=1.0)
    val_loss: float
    val_acc: float = Field(..., ge=0.0, le=1.0)
    top5_acc: float = Field(..., ge=0.0, le=1.0)
    learning_rate: float
    seconds: float = Field(..., ge=0.0)


class LsuvReportRow(BaseModel):
    """Outcome of LSUV at one weight site."""

    layer: str
    iterations: int = Field(..., ge=0)
    variance: float = Field(..., ge=0.0, description="Output variance after the last rescale")
    converged: bool


class EvalResult(BaseModel):
    """Loss and top-k accuracies over one dataset pass."""

    loss: float
    top1: float = Field(..., ge=0.0, le=1.0)
    top5: float = Field(..., ge=0.0, le=1.0)
    samples: int = Field(..., ge=0)
