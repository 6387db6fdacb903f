"""
Epoch loop: batches -> forward -> loss with L2 -> backward -> optimizer step.
"""
import math
import time
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger
from tqdm import tqdm

from irrcnn.autograd import functional as F
from irrcnn.autograd.loss import cross_entropy
from irrcnn.autograd.tape import Tape, backward
from irrcnn.config import RunConfig
from irrcnn.data.batching import BatchPlan, batches
from irrcnn.data.dataset import ArrayDataset
from irrcnn.exceptions import NonFiniteError
from irrcnn.layers.base import ForwardContext
from irrcnn.models.network import Network
from irrcnn.optim import Optimizer, apply_l2, covered_weights, l2_penalty, make_optimizer
from irrcnn.schemas.training import MetricsRow
from irrcnn.storage.metrics_log import MetricsLog
from irrcnn.training.evaluation import evaluate
from irrcnn.utils import metrics


class Trainer:
    """
    Trains one model under one ``RunConfig``.

    Everything random is seeded from ``config.seed``: the batch order and flips
    per epoch through ``BatchPlan``, the dropout masks through one generator
    owned by the trainer.
    """

    def __init__(
        self, model: Network, config: RunConfig, optimizer: Optional[Optimizer] = None
    ):
        self.model = model
        self.config = config
        self.optimizer = optimizer or make_optimizer(config.optimizer, config.sgd, config.eve)
        self.params = {p.name: p.value for p in model.parameters()}
        self.l2_weights = covered_weights(model.parameters(), config.l2_scope)
        self.rng = np.random.default_rng([config.seed, 2])

    def train_step(self, images: np.ndarray, labels: np.ndarray) -> Tuple[float, int]:
        """
        One update on one batch.

        Returns:
            (loss including the L2 term, correctly classified samples)

        Raises:
            NonFiniteError: the loss or a gradient is NaN or infinite
        """
        tape = Tape()
        ctx = ForwardContext.train(tape, self.rng)
        logits = self.model.forward(ctx, self.model.input(tape, images))
        penalty = l2_penalty(self.l2_weights, self.config.l2)
        loss = cross_entropy(F.softmax(logits), labels, l2_term=penalty)
        loss_value = float(loss.value)
        if not math.isfinite(loss_value):
            raise NonFiniteError(f"Non-finite loss {loss_value}")

        grads = apply_l2(backward(tape, loss), self.l2_weights, self.config.l2)
        self.optimizer.step(self.params, grads, loss_value)
        correct = int((np.argmax(logits.value, axis=1) == labels).sum())
        return loss_value, correct

    def train_epoch(self, train: ArrayDataset, epoch: int) -> Tuple[float, float]:
        """
        One pass over ``train``.

        Returns:
            (sample-weighted mean loss, training accuracy under dropout)
        """
        plan = BatchPlan(
            size=len(train), batch_size=self.config.batch_size, seed=self.config.seed, epoch=epoch
        )
        loss_sum = 0.0
        correct = 0
        progress = tqdm(
            batches(train, plan, augment=self.config.augment),
            total=plan.batch_count,
            desc=f"epoch {epoch}",
            leave=False,
            disable=not self.config.progress,
        )
        for index, (images, labels) in enumerate(progress):
            started = time.perf_counter()
            try:
                loss, hits = self.train_step(images, labels)
            except NonFiniteError as e:
                metrics.record_nonfinite()
                raise NonFiniteError(str(e), epoch=epoch, batch=index) from e
            metrics.record_step(
                self.config.optimizer.value,
                len(labels),
                time.perf_counter() - started,
                self.optimizer.learning_rate,
            )
            loss_sum += loss * len(labels)
            correct += hits
            progress.set_postfix(loss=f"{loss:.4f}")
            logger.debug(f"epoch={epoch} batch={index} loss={loss:.6f}")
        return loss_sum / len(train), correct / len(train)

    def fit(
        self,
        train: ArrayDataset,
        val: ArrayDataset,
        log: Optional[MetricsLog] = None,
    ) -> List[MetricsRow]:
        """Run ``config.epochs`` epochs; each one ends with a validation pass and a metrics row."""
        rows = []
        for epoch in range(1, self.config.epochs + 1):
            started = time.perf_counter()
            train_loss, train_acc = self.train_epoch(train, epoch)
            result = evaluate(self.model, val, self.config.batch_size)
            seconds = time.perf_counter() - started if self.config.timing else 0.0
            row = MetricsRow(
                epoch=epoch,
                train_loss=train_loss,
                train_acc=train_acc,
                val_loss=result.loss,
                val_acc=result.top1,
                top5_acc=result.top5,
                learning_rate=self.optimizer.learning_rate,
                seconds=seconds,
            )
            if log is not None:
                log.append(row)
            metrics.record_epoch(epoch, train_loss, result.top1)
            logger.info(
                f"Epoch {epoch}/{self.config.epochs}: train_loss={train_loss:.4f} "
                f"train_acc={train_acc:.4f} val_loss={result.loss:.4f} "
                f"val_acc={result.top1:.4f} top5={result.top5:.4f}"
            )
            rows.append(row)
        return rows
