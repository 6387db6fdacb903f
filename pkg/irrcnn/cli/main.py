"""
Entry point of the ``irrcnn`` command.
"""
import argparse
import sys
from typing import List, Optional

from loguru import logger

from irrcnn import __version__
from irrcnn.cli.commands import COMMANDS
from irrcnn.exceptions import IrrcnnError


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="irrcnn",
        description="Train, evaluate and inspect inception recurrent residual networks on CPU",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse ``argv`` and run the chosen command.

    Returns:
        Exit status: 0 on success, 1 when the command failed with an engine error
    """
    args = build_parser().parse_args(argv)
    try:
        return int(args.handler(args))
    except IrrcnnError as e:
        logger.error(f"❌ {args.command} failed: {e}")
        return 1
    except Exception:
        logger.exception(f"❌ Unexpected error in {args.command}")
        raise


if __name__ == "__main__":
    sys.exit(main())
