"""
Flags shared by the run-oriented commands and their mapping onto ``RunConfig``.
"""
import argparse
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from irrcnn.config import RunConfig, load_run_config
from irrcnn.data.cifar import DatasetName
from irrcnn.schemas.arch import Activation, Variant
from irrcnn.schemas.training import InitScheme, OptimizerName

ON_OFF = ("on", "off")


def _choices(enum: Any) -> list:
    return [member.value for member in enum]


def add_run_options(parser: argparse.ArgumentParser) -> None:
    """Config file plus the flags that override it."""
    parser.add_argument("--config", type=Path, help="TOML run configuration")
    parser.add_argument("--dataset", choices=_choices(DatasetName))
    parser.add_argument("--data-dir", type=Path, help="Directory with the CIFAR .bin files")
    parser.add_argument("--arch", choices=_choices(Variant))
    parser.add_argument("--k", type=int, help="RCL time steps")
    parser.add_argument("--init", choices=_choices(InitScheme))
    parser.add_argument("--optimizer", choices=_choices(OptimizerName))
    parser.add_argument("--activation", choices=_choices(Activation))
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", type=Path, help="Run directory")
    parser.add_argument("--augment", choices=ON_OFF)
    parser.add_argument("--precision", choices=("standard", "wide"))
    parser.add_argument("--width-multiplier", help="Rational width multiplier, e.g. 1/4")
    parser.add_argument("--train-limit", type=int, help="Use only the first N training images")
    parser.add_argument("--val-limit", type=int, help="Use only the first N validation images")
    parser.add_argument("--timing", choices=ON_OFF, help="Record seconds per epoch")
    parser.add_argument("--progress", choices=ON_OFF, help="Show progress bars")


def _switch(value: Optional[str]) -> Optional[bool]:
    return None if value is None else value == "on"


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Flag values as a nested override mapping; flags not given are None."""
    return {
        "dataset": args.dataset,
        "data_dir": args.data_dir,
        "arch": args.arch,
        "k": args.k,
        "init": {"scheme": args.init} if args.init else None,
        "optimizer": args.optimizer,
        "activation": args.activation,
        "epochs": args.epochs,
        "batch_size": args.batch_size,
        "seed": args.seed,
        "out": args.out,
        "augment": _switch(args.augment),
        "precision": args.precision,
        "width_multiplier": args.width_multiplier,
        "train_limit": args.train_limit,
        "val_limit": args.val_limit,
        "timing": _switch(args.timing),
        "progress": _switch(args.progress),
    }


def config_from_args(
    args: argparse.Namespace, defaults: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    return load_run_config(args.config, overrides_from_args(args), defaults)
