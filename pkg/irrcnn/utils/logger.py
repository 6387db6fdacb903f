"""
Logging configuration.
"""
import sys
from pathlib import Path
from typing import Any, Optional

from loguru import logger

from irrcnn.config import settings

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> - <level>{message}</level>"
)


def setup_logging(log_dir: Optional[Path] = None) -> None:
    """
    Configure loguru for a CLI run.

    Console output goes to stderr so command output on stdout stays clean.
    When a directory is known (``log_dir`` or ``settings.log_dir``) a
    rotating run log and a separate error log are written there.

    Args:
        log_dir: Directory for the file logs, usually the run's output directory
    """
    logger.remove()

    level = "DEBUG" if settings.debug else settings.log_level
    if settings.log_json:
        logger.add(sys.stderr, serialize=True, level=level)
    else:
        logger.add(sys.stderr, colorize=True, format=CONSOLE_FORMAT, level=level)

    target = log_dir if log_dir is not None else settings.log_dir
    if target is None:
        logger.debug("File logging disabled")
        return

    target = Path(target)
    target.mkdir(parents=True, exist_ok=True)
    logger.add(
        target / "run_{time:YYYY-MM-DD}.log",
        rotation="50 MB",
        retention=5,
        level="DEBUG" if settings.debug else "INFO",
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function} - {message}",
    )
    logger.add(
        target / "errors_{time:YYYY-MM-DD}.log",
        rotation="10 MB",
        retention=5,
        level="ERROR",
        format=(
            "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}\n"
            "{exception}"
        ),
        backtrace=True,
        diagnose=True,
    )
    logger.debug(f"Log directory: {target.absolute()}")


def get_logger_for_module(module_name: str) -> Any:
    """
    Logger bound to a module name.

    Args:
        module_name: Module name

    Returns:
        Bound logger
    """
    return logger.bind(module=module_name)
