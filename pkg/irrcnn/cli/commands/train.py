"""
``irrcnn train``: initialize, train and checkpoint one model.
"""
import argparse

from irrcnn.cli.options import add_run_options, config_from_args
from irrcnn.training.run import train_run
from irrcnn.utils.logger import setup_logging


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("train", help="Train a model and write its checkpoint")
    add_run_options(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    setup_logging(config.out)
    outcome = train_run(config)

    last = outcome.rows[-1]
    print("\n" + "=" * 70)
    print(f"✅ {config.arch.value}: {config.epochs} epochs")
    print("=" * 70)
    print(f"   train loss: {last.train_loss:.4f}   train acc: {last.train_acc:.4f}")
    print(f"   val loss:   {last.val_loss:.4f}   top-1: {last.val_acc:.4f}")
    print(f"   top-5:      {last.top5_acc:.4f}")
    print(f"   checkpoint: {outcome.checkpoint}")
    return 0
