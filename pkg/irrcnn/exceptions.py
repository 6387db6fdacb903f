"""
Exception hierarchy for the engine.

Shape and configuration problems also subclass ``ValueError`` so callers that
only know about the builtin still catch them.
"""
from typing import Optional


class IrrcnnError(Exception):
    """Base class for all engine errors."""


class ShapeError(IrrcnnError, ValueError):
    """Tensor shapes are incompatible with the requested operation."""


class ArchitectureError(IrrcnnError, ValueError):
    """Architecture description is inconsistent (widths, variant, allocation)."""


class ConfigError(IrrcnnError, ValueError):
    """Run configuration failed validation."""


class DatasetError(IrrcnnError):
    """Dataset files are missing or unreadable."""


class DatasetFormatError(DatasetError, ValueError):
    """Dataset bytes do not follow the expected record layout."""


class CheckpointError(IrrcnnError):
    """Checkpoint is corrupt or does not match its architecture header."""


class AutogradError(IrrcnnError):
    """Invalid use of the tape (loss not recorded, non-scalar loss, ...)."""


class LsuvError(IrrcnnError):
    """LSUV initialization hit a degenerate layer."""

    def __init__(self, layer: str, message: str):
        self.layer = layer
        super().__init__(f"{layer}: {message}")


class NonFiniteError(IrrcnnError):
    """A loss, gradient or parameter became NaN or infinite."""

    def __init__(
        self,
        message: str,
        epoch: Optional[int] = None,
        batch: Optional[int] = None,
    ):
        self.epoch = epoch
        self.batch = batch
        context = []
        if epoch is not None:
            context.append(f"epoch={epoch}")
        if batch is not None:
            context.append(f"batch={batch}")
        suffix = f" ({', '.join(context)})" if context else ""
        super().__init__(f"{message}{suffix}")
