"""
End-to-end training run: data, model, initialization, epochs, artifacts.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple

from loguru import logger

from irrcnn.config import RunConfig
from irrcnn.data.cifar import DatasetName, load_cifar
from irrcnn.data.dataset import ArrayDataset
from irrcnn.data.synthetic import synthetic_dataset
from irrcnn.exceptions import DatasetError
from irrcnn.init import initialize
from irrcnn.models.arch import EQUIVALENT_VARIANTS, build_equivalent, build_model, param_count
from irrcnn.models.network import Network
from irrcnn.schemas.training import LsuvReportRow, MetricsRow
from irrcnn.storage.checkpoint import save_checkpoint
from irrcnn.storage.metrics_log import MetricsLog, write_lsuv_report
from irrcnn.training.trainer import Trainer
from irrcnn.utils import metrics

CHECKPOINT_NAME = "model.ckpt"
METRICS_NAME = "metrics.csv"
LSUV_NAME = "lsuv.csv"
PROMETHEUS_NAME = "metrics.prom"


@dataclass
class RunOutcome:
    model: Network
    rows: List[MetricsRow]
    lsuv: List[LsuvReportRow]
    checkpoint: Optional[Path]


def load_datasets(config: RunConfig) -> Tuple[ArrayDataset, ArrayDataset]:
    """
    Training and validation sets for ``config``.

    CIFAR's test split serves as the validation split.

    Raises:
        DatasetError: no data directory is configured or the files cannot be read
    """
    if config.dataset == DatasetName.SYNTHETIC:
        train = synthetic_dataset(
            config.synthetic_train, config.synthetic_classes, config.synthetic_size, config.seed
        )
        # distinct seed so validation images are not copies of training images
        val = synthetic_dataset(
            config.synthetic_val,
            config.synthetic_classes,
            config.synthetic_size,
            config.seed + 1_000_003,
        )
        return train, val

    data_dir = config.resolved_data_dir()
    if data_dir is None:
        raise DatasetError(
            f"{config.dataset.value} needs --data-dir (or IRRCNN_CIFAR_DIR in the environment)"
        )
    train = load_cifar(data_dir, config.dataset, "train", config.train_limit)
    val = load_cifar(data_dir, config.dataset, "test", config.val_limit)
    return train, val


def model_for_config(config: RunConfig) -> Network:
    """Build the configured variant; EIN/EIRN are width-calibrated unless disabled."""
    arch = config.arch_spec()
    if config.calibrate and arch.variant in EQUIVALENT_VARIANTS:
        return build_equivalent(arch, arch.variant)
    return build_model(arch)


def train_run(config: RunConfig, save: bool = True) -> RunOutcome:
    """
    Train one model and write its artifacts under ``config.out``.

    Files: ``metrics.csv``, ``lsuv.csv`` (LSUV only), ``model.ckpt`` and
    ``metrics.prom``.
    """
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    train, val = load_datasets(config)

    model = model_for_config(config)
    count = param_count(model)
    metrics.set_model_parameters(count)
    logger.info(
        f"🚀 Training {config.arch.value} ({count:,} parameters) on {len(train)} "
        f"{config.dataset.value} images for {config.epochs} epochs"
    )

    lsuv = initialize(model, config.init, train.images, config.seed)
    if lsuv:
        write_lsuv_report(out / LSUV_NAME, lsuv)
        metrics.record_lsuv_unconverged(sum(not row.converged for row in lsuv))

    trainer = Trainer(model, config)
    rows = trainer.fit(train, val, MetricsLog(out / METRICS_NAME))

    checkpoint = None
    if save:
        checkpoint = save_checkpoint(out / CHECKPOINT_NAME, model, config.epochs, config.seed)
    metrics.export_metrics(out / PROMETHEUS_NAME)
    summary = metrics.get_metrics_summary()
    logger.success(
        f"✅ Run finished: {out} (train loss {summary['train_loss']:.4f}, "
        f"val accuracy {summary['val_accuracy']:.4f})"
    )
    return RunOutcome(model=model, rows=rows, lsuv=lsuv, checkpoint=checkpoint)
