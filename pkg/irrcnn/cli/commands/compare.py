"""
``irrcnn compare``: final training loss of IRRCNN, EIRN and EIN over several seeds.
"""
import argparse
from typing import Any, Dict

from irrcnn.cli.options import add_run_options, config_from_args
from irrcnn.schemas.arch import Variant
from irrcnn.training.compare import compare_variants
from irrcnn.utils.logger import setup_logging

# Small synthetic task; a config file or flags replace any of these.
COMPARE_DEFAULTS: Dict[str, Any] = {
    "dataset": "synthetic",
    "synthetic_train": 128,
    "synthetic_val": 64,
    "synthetic_classes": 4,
    "synthetic_size": 16,
    "stem_widths": [8],
    "stage_widths": [8, 16, 16],
    "transition_widths": [16, 16, 16],
    "pools": [True, True, False],
    "epochs": 5,
    "batch_size": 16,
    "augment": False,
    "timing": False,
    "out": "runs/compare",
}


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser(
        "compare", help="Compare convergence of irrcnn against its equivalent networks"
    )
    add_run_options(parser)
    parser.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = config_from_args(args, COMPARE_DEFAULTS)
    setup_logging(config.out)
    report = compare_variants(config, args.seeds)

    print("\n" + "=" * 70)
    print(f"📈 Mean final training loss over seeds {report.seeds}")
    print("=" * 70)
    means = report.means()
    for variant, loss in sorted(means.items(), key=lambda item: item[1]):
        marker = " (reference)" if variant == Variant.IRRCNN else ""
        print(f"   {variant.value:<8} {loss:.4f}{marker}")

    violations = report.violations()
    if violations:
        for violation in violations:
            print(f"   ⚠️  {violation}")
    else:
        print("   ✅ irrcnn converged lowest")
    return 0
