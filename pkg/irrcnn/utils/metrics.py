"""
Prometheus metrics for training and evaluation runs.
"""
from pathlib import Path
from typing import Dict

from loguru import logger
from prometheus_client import REGISTRY, Counter, Gauge, Histogram, write_to_textfile

# Counters
training_steps = Counter(
    "irrcnn_training_steps_total",
    "Optimizer steps taken",
    ["optimizer"],
)

training_samples = Counter(
    "irrcnn_training_samples_total",
    "Images consumed by training steps",
)

nonfinite_aborts = Counter(
    "irrcnn_nonfinite_aborts_total",
    "Runs aborted because a loss or gradient became NaN or infinite",
)

lsuv_unconverged = Counter(
    "irrcnn_lsuv_unconverged_total",
    "LSUV layers that did not reach unit variance",
)

# Histograms
step_duration = Histogram(
    "irrcnn_step_duration_seconds",
    "Forward + backward + update duration per batch",
    buckets=[0.01, 0.05, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0],
)

eval_duration = Histogram(
    "irrcnn_eval_duration_seconds",
    "Duration of one evaluation pass",
    buckets=[0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0],
)

# Gauges
current_epoch = Gauge("irrcnn_epoch", "Epoch currently running")
train_loss = Gauge("irrcnn_train_loss", "Mean training loss of the last epoch")
learning_rate = Gauge("irrcnn_learning_rate", "Learning rate of the next step")
val_accuracy = Gauge("irrcnn_val_accuracy", "Top-1 validation accuracy of the last epoch")
model_parameters = Gauge("irrcnn_model_parameters", "Trainable parameters in the model")


def record_step(optimizer: str, samples: int, duration: float, lr: float) -> None:
    """
    Record one optimizer step.

    Args:
        optimizer: Optimizer name (sgd, eve)
        samples: Batch size
        duration: Seconds spent on the step
        lr: Learning rate for the next step
    """
    training_steps.labels(optimizer=optimizer).inc()
    training_samples.inc(samples)
    step_duration.observe(duration)
    learning_rate.set(lr)


def record_epoch(epoch: int, loss: float, val_acc: float) -> None:
    """Record the end of an epoch."""
    current_epoch.set(epoch)
    train_loss.set(loss)
    val_accuracy.set(val_acc)
    logger.debug(f"Epoch metrics recorded: epoch={epoch}, loss={loss:.4f}, val_acc={val_acc:.4f}")


def record_eval(duration: float) -> None:
    eval_duration.observe(duration)


def record_nonfinite() -> None:
    nonfinite_aborts.inc()
    logger.warning("Non-finite abort recorded")


def record_lsuv_unconverged(count: int) -> None:
    if count:
        lsuv_unconverged.inc(count)


def set_model_parameters(count: int) -> None:
    model_parameters.set(count)


def get_metrics_summary() -> Dict[str, float]:
    """
    Current gauge values.

    Returns:
        Mapping metric name -> value
    """
    return {
        "epoch": current_epoch._value.get(),
        "train_loss": train_loss._value.get(),
        "learning_rate": learning_rate._value.get(),
        "val_accuracy": val_accuracy._value.get(),
        "model_parameters": model_parameters._value.get(),
    }


def export_metrics(path: Path) -> Path:
    """
    Write every registered metric in the Prometheus text format.

    Args:
        path: Target file, typically ``<out>/metrics.prom``

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    write_to_textfile(str(path), REGISTRY)
    logger.debug(f"Prometheus metrics written to {path}")
    return path
