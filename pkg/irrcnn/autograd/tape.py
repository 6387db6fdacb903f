"""
Define-by-run tape for reverse-mode differentiation.

Operations append nodes while the forward pass runs; ``backward`` walks the
nodes in reverse. A parameter used at several sites (RCL weight tying) is one
leaf ``Var`` and its gradients from all sites are summed.
"""
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from irrcnn.exceptions import AutogradError, ShapeError

GradMap = Dict[str, np.ndarray]
BackwardFn = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


@dataclass(eq=False)
class Var:
    """A value reference on a tape."""

    value: np.ndarray
    tape: Optional["Tape"] = field(default=None, repr=False)
    index: int = -1
    name: Optional[str] = None
    trainable: bool = False
    requires_grad: bool = False

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.value.shape

    @property
    def dtype(self) -> np.dtype:
        return self.value.dtype

    @property
    def is_leaf(self) -> bool:
        return self.index < 0


@dataclass(eq=False)
class Node:
    """One recorded operation: inputs, output and the rule mapping output grad to input grads."""

    op: str
    inputs: Tuple[Var, ...]
    output: Var
    backward: BackwardFn


class Tape:
    """
    Ordered record of operations plus the registry of named leaves.

    With ``record=False`` operations still compute values but keep no nodes and
    no saved intermediates, which is what inference and LSUV probing use.
    """

    def __init__(self, record: bool = True):
        self.record = record
        self.nodes: List[Node] = []
        self.params: Dict[str, Var] = {}

    def __len__(self) -> int:
        return len(self.nodes)

    def param(self, name: str, value: np.ndarray, trainable: bool = True) -> Var:
        """Register (or fetch) a named leaf; repeated calls return the same ``Var``."""
        existing = self.params.get(name)
        if existing is not None:
            if existing.value is not value:
                raise AutogradError(f"Parameter name {name!r} registered twice with different data")
            return existing
        var = Var(
            value=value,
            tape=self,
            name=name,
            trainable=trainable,
            requires_grad=trainable and self.record,
        )
        self.params[name] = var
        return var

    def constant(self, value: np.ndarray) -> Var:
        """Non-trainable, unnamed leaf (inputs, labels, masks)."""
        return Var(value=value, tape=self)

    def apply(
        self,
        op: str,
        inputs: Sequence[Var],
        value: np.ndarray,
        backward: BackwardFn,
    ) -> Var:
        """
        Record the result of an operation.

        Args:
            op: Operation id
            inputs: Input value refs, all on this tape
            value: Computed output
            backward: Maps the output gradient to one gradient (or None) per input

        Returns:
            Output ``Var``
        """
        for inp in inputs:
            if inp.tape is not self:
                raise AutogradError(f"{op}: input belongs to a different tape")
        needs_grad = self.record and any(inp.requires_grad for inp in inputs)
        if not needs_grad:
            return Var(value=value, tape=self)

        value.flags.writeable = False
        out = Var(value=value, tape=self, index=len(self.nodes), requires_grad=True)
        self.nodes.append(Node(op=op, inputs=tuple(inputs), output=out, backward=backward))
        return out


def backward(tape: Tape, loss: Var) -> GradMap:
    """
    Gradients of a scalar loss with respect to every trainable leaf.

    Args:
        tape: Tape the loss was computed on
        loss: Scalar output of a recorded node

    Returns:
        Mapping parameter name -> gradient (same shape as the parameter); a
        trainable leaf the loss does not depend on gets a zero gradient.

    Raises:
        AutogradError: loss is not on the tape or not a scalar
    """
    if loss.tape is not tape or loss.is_leaf or loss.index >= len(tape.nodes):
        raise AutogradError("Loss is not recorded on this tape")
    if tape.nodes[loss.index].output is not loss:
        raise AutogradError("Loss is not recorded on this tape")
    if loss.value.size != 1:
        raise AutogradError(f"Loss must be a scalar, got shape {loss.value.shape}")

    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.value)}
    for node in reversed(tape.nodes[: loss.index + 1]):
        upstream = grads.pop(id(node.output), None)
        if upstream is None:
            continue
        input_grads = node.backward(upstream)
        if len(input_grads) != len(node.inputs):
            raise AutogradError(
                f"{node.op}: backward returned {len(input_grads)} grads"
                f" for {len(node.inputs)} inputs"
            )
        for inp, grad in zip(node.inputs, input_grads):
            if grad is None or not inp.requires_grad:
                continue
            if grad.shape != inp.value.shape:
                raise ShapeError(
                    f"{node.op}: gradient shape {grad.shape} does not match input {inp.value.shape}"
                )
            key = id(inp)
            if key in grads:
                grads[key] = grads[key] + grad
            else:
                grads[key] = grad

    result: GradMap = {}
    for name, var in tape.params.items():
        if not var.trainable:
            continue
        grad = grads.get(id(var))
        result[name] = np.zeros_like(var.value) if grad is None else np.asarray(grad)
    logger.debug(f"Backward over {loss.index + 1} nodes produced {len(result)} gradients")
    return result


def merge_grads(maps: Iterable[GradMap]) -> GradMap:
    """Elementwise sum of gradient maps produced on independent tapes."""
    merged: GradMap = {}
    for grad_map in maps:
        for name, grad in grad_map.items():
            if name in merged:
                if merged[name].shape != grad.shape:
                    raise ShapeError(f"Cannot merge gradients for {name}: shape mismatch")
                merged[name] = merged[name] + grad
            else:
                merged[name] = grad.copy()
    return merged
