"""
``irrcnn eval``: top-1 / top-5 accuracy of a checkpoint on the validation split.
"""
import argparse
from pathlib import Path

from loguru import logger

from irrcnn.cli.options import add_run_options, config_from_args
from irrcnn.data.cifar import DatasetName
from irrcnn.exceptions import ShapeError
from irrcnn.storage.checkpoint import load_checkpoint
from irrcnn.training.evaluation import evaluate
from irrcnn.training.run import load_datasets
from irrcnn.utils.logger import setup_logging


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("eval", help="Evaluate a checkpoint")
    parser.add_argument("--checkpoint", type=Path, required=True, help="Checkpoint file")
    add_run_options(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    setup_logging()
    model, header = load_checkpoint(args.checkpoint)
    arch = header.arch

    if config.dataset == DatasetName.SYNTHETIC:
        # the synthetic task is regenerated to the checkpoint's shape and seed
        config = config.model_copy(
            update={
                "synthetic_classes": arch.classes,
                "synthetic_size": arch.input_shape[1],
                "seed": header.seed if args.seed is None else args.seed,
            }
        )
    elif config.dataset.classes != arch.classes:
        raise ShapeError(
            f"Checkpoint has {arch.classes} classes, {config.dataset.value} has "
            f"{config.dataset.classes}"
        )
    _, val = load_datasets(config)
    if val.image_shape != tuple(arch.input_shape):
        raise ShapeError(f"Checkpoint expects {arch.input_shape} images, got {val.image_shape}")

    logger.info(f"📊 Evaluating {arch.variant.value} (epoch {header.epoch}) on {len(val)} images")
    result = evaluate(model, val, config.batch_size)

    print("\n" + "=" * 70)
    print(f"📊 {args.checkpoint} on {config.dataset.value} ({result.samples} images)")
    print("=" * 70)
    print(f"   loss:  {result.loss:.4f}")
    print(f"   top-1: {result.top1:.4f}")
    print(f"   top-5: {result.top5:.4f}")
    return 0
