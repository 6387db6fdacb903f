"""
Whole-model container: stem, stages, global pooling and classifier.
"""
from typing import Dict, List, Optional, Tuple

import numpy as np

from irrcnn.autograd import functional as F
from irrcnn.autograd.tape import Tape, Var
from irrcnn.core.tensor import check_rank4
from irrcnn.exceptions import ShapeError
from irrcnn.layers.base import ForwardContext, Layer, Parameter
from irrcnn.layers.classifier import Classifier
from irrcnn.models.blocks import ConvBnAct, IrrcnnBlock, TransitionBlock
from irrcnn.schemas.arch import ArchSpec


class Network(Layer):
    """
    Sequential model built from an ``ArchSpec``.

    ``forward`` returns logits (n, K); softmax is applied by the loss and by
    ``predict``.
    """

    def __init__(
        self,
        arch: ArchSpec,
        stem: List[ConvBnAct],
        stages: List[Tuple[IrrcnnBlock, TransitionBlock]],
        classifier: Classifier,
    ):
        super().__init__(arch.variant.value)
        self.arch = arch
        self.precision = arch.precision
        self.stem = stem
        self.stages = stages
        self.classifier = classifier

    def children(self) -> List[Layer]:
        layers: List[Layer] = list(self.stem)
        for block, transition in self.stages:
            layers.extend([block, transition])
        layers.append(self.classifier)
        return layers

    def layer_names(self) -> List[str]:
        """Top-level layers in execution order."""
        return [layer.name for layer in self.children()]

    def named_parameters(self) -> Dict[str, Parameter]:
        return {p.name: p for p in self.parameters()}

    def state(self) -> Dict[str, np.ndarray]:
        """Parameter values followed by batch-norm buffers, by name."""
        values = {p.name: p.value for p in self.parameters()}
        values.update(dict(self.buffers()))
        return values

    def input(self, tape: Tape, images: np.ndarray) -> Var:
        """Cast an image batch to the model precision and put it on ``tape``."""
        c, h, w = self.arch.input_shape
        _, ic, ih, iw = check_rank4(images, "images")
        if (ic, ih, iw) != (c, h, w):
            raise ShapeError(f"Model expects images shaped {(c, h, w)}, got {(ic, ih, iw)}")
        return tape.constant(np.ascontiguousarray(images, dtype=self.precision.dtype))

    def forward(self, ctx: ForwardContext, x: Var) -> Var:
        return self.run_layers(ctx, x)

    def run_layers(
        self, ctx: ForwardContext, x: Var, start: int = 0, stop: Optional[int] = None
    ) -> Var:
        """
        Apply the top-level layers ``children()[start:stop]`` to ``x``.

        Global average pooling runs in front of the classifier.
        """
        for layer in self.children()[start:stop]:
            if layer is self.classifier:
                x = F.global_avg_pool(x)
            x = layer.forward(ctx, x)
        return x

    def owner_index(self, site: str) -> int:
        """Index in ``children()`` of the top-level layer holding weight site ``site``."""
        for index, layer in enumerate(self.children()):
            if site == layer.name or site.startswith(layer.name + "."):
                return index
        raise KeyError(site)

    def logits(self, images: np.ndarray, ctx: Optional[ForwardContext] = None) -> np.ndarray:
        """Inference-mode logits for a raw image batch."""
        ctx = ctx if ctx is not None else ForwardContext.infer()
        return self.forward(ctx, self.input(ctx.tape, images)).value

    def predict(self, images: np.ndarray) -> np.ndarray:
        """Class probabilities (n, K) in inference mode."""
        tape = Tape(record=False)
        logits = self.forward(ForwardContext.infer(tape), self.input(tape, images))
        return F.softmax(logits).value

    def spatial_trace(self) -> List[int]:
        """Side length at the input, after the stem, after each pooling stage and at the end."""
        _, h, w = self.arch.input_shape
        trace = [h]
        for layer in self.stem:
            h, w = layer.output_hw(h, w)
        trace.append(h)
        for _, transition in self.stages:
            h, w = transition.output_hw(h, w)
            if transition.spec.pool:
                trace.append(h)
        trace.append(1)
        return trace
