"""
Layer building blocks: parameters, forward context and the layer base class.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterator, List, Optional, Tuple

import numpy as np

from irrcnn.autograd.tape import Tape, Var
from irrcnn.core.tensor import Precision

Observer = Callable[[str, np.ndarray], None]


class ParamRole(str, Enum):
    WEIGHT = "weight"
    BIAS = "bias"
    GAMMA = "gamma"
    BETA = "beta"


@dataclass(eq=False)
class Parameter:
    """A named trainable array plus what initializers and regularizers need to know."""

    name: str
    value: np.ndarray
    role: ParamRole
    fan_in: int = 1
    fan_out: int = 1
    regularized: bool = False

    @property
    def size(self) -> int:
        return int(self.value.size)


@dataclass
class WeightSite:
    """Weights whose output variance LSUV normalizes together."""

    name: str
    weights: List[Parameter]


@dataclass
class ForwardContext:
    """
    Per-pass state shared by all layers.

    Attributes:
        tape: Where operations are recorded
        training: Batch norm uses batch statistics
        dropout: Dropout masks are drawn
        update_stats: Batch norm running statistics are updated
        rng: Source of dropout masks
        observer: Receives (site name, pre-activation value) at every weight site
    """

    tape: Tape
    training: bool = False
    dropout: bool = False
    update_stats: bool = False
    rng: Optional[np.random.Generator] = None
    observer: Optional[Observer] = field(default=None, repr=False)

    @classmethod
    def train(cls, tape: Tape, rng: np.random.Generator) -> "ForwardContext":
        return cls(tape=tape, training=True, dropout=True, update_stats=True, rng=rng)

    @classmethod
    def infer(cls, tape: Optional[Tape] = None) -> "ForwardContext":
        return cls(tape=tape if tape is not None else Tape(record=False))

    @classmethod
    def probe(
        cls, tape: Optional[Tape] = None, observer: Optional[Observer] = None
    ) -> "ForwardContext":
        """Batch statistics without running-stat updates or dropout."""
        return cls(
            tape=tape if tape is not None else Tape(record=False),
            training=True,
            observer=observer,
        )

    def param(self, p: Parameter) -> Var:
        return self.tape.param(p.name, p.value, trainable=True)

    def observe(self, site: str, value: np.ndarray) -> None:
        if self.observer is not None:
            self.observer(site, value)


class Layer(ABC):
    """Base class: owns parameters and buffers, may own child layers."""

    def __init__(self, name: str):
        self.name = name

    def own_parameters(self) -> List[Parameter]:
        return []

    def own_buffers(self) -> List[Tuple[str, np.ndarray]]:
        return []

    def children(self) -> List["Layer"]:
        return []

    def parameters(self) -> Iterator[Parameter]:
        yield from self.own_parameters()
        for child in self.children():
            yield from child.parameters()

    def buffers(self) -> Iterator[Tuple[str, np.ndarray]]:
        yield from self.own_buffers()
        for child in self.children():
            yield from child.buffers()

    def weight_sites(self) -> List[WeightSite]:
        """Weight sites in the order ``forward`` reaches them."""
        sites: List[WeightSite] = []
        for child in self.children():
            sites.extend(child.weight_sites())
        return sites

    def param_count(self) -> int:
        return sum(p.size for p in self.parameters())

    @abstractmethod
    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        """Run the layer on ``x``."""

    def output_hw(self, h: int, w: int) -> Tuple[int, int]:
        """Spatial size after this layer (identity unless overridden)."""
        return h, w

    def describe(self) -> str:
        return f"{self.name} ({type(self).__name__}, {self.param_count()} params)"


def zeros(shape: Tuple[int, ...], precision: Precision) -> np.ndarray:
    return np.zeros(shape, dtype=precision.dtype)
