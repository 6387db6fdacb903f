"""
Pydantic schemas shared by the engine, the storage formats and the CLI.
"""
from irrcnn.schemas.arch import (
    Activation,
    ArchSpec,
    InceptionUnitSpec,
    ParityRow,
    StageSpec,
    TransitionSpec,
    Variant,
)

__all__ = [
    "Activation",
    "ArchSpec",
    "InceptionUnitSpec",
    "ParityRow",
    "StageSpec",
    "TransitionSpec",
    "Variant",
]
