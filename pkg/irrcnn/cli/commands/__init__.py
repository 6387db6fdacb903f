"""
One module per subcommand. Each exposes ``register(subparsers)`` and a
handler returning the process exit status.
"""
from irrcnn.cli.commands import compare, evaluate, gradcheck, summary, train

COMMANDS = (train, evaluate, gradcheck, summary, compare)

__all__ = ["COMMANDS"]
