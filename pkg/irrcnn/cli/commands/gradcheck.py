"""
``irrcnn gradcheck``: finite-difference check of a miniature model's backward pass.
"""
import argparse

from irrcnn.schemas.arch import Variant
from irrcnn.training.gradcheck import (
    GRADCHECK_MAX_ELEMENTS,
    GRADCHECK_TOLERANCE,
    gradcheck_variant,
)
from irrcnn.utils.logger import setup_logging

ALL = "all"


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("gradcheck", help="Check gradients against finite differences")
    parser.add_argument(
        "--arch", default=Variant.IRRCNN.value, choices=[v.value for v in Variant] + [ALL]
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--k", type=int, default=2, help="RCL time steps")
    parser.add_argument("--tolerance", type=float, default=GRADCHECK_TOLERANCE)
    parser.add_argument(
        "--max-elements",
        type=int,
        default=GRADCHECK_MAX_ELEMENTS,
        help="Sampled elements per tensor; 0 checks every element",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    setup_logging()
    variants = list(Variant) if args.arch == ALL else [Variant(args.arch)]
    max_elements = args.max_elements or None

    failed = 0
    for variant in variants:
        rows = gradcheck_variant(variant, args.seed, args.tolerance, max_elements, args.k)
        print("\n" + "=" * 70)
        print(f"🔍 {variant.value} (seed {args.seed}, tolerance {args.tolerance:g})")
        print("=" * 70)
        width = max(len(row.name) for row in rows)
        for row in rows:
            mark = "✅" if row.passed else "❌"
            print(
                f"   {mark} {row.name:<{width}}  {row.worst_relative_error:.3e}"
                f"  ({row.checked} elements)"
            )
        failed += sum(not row.passed for row in rows)

    if failed:
        print(f"\n❌ {failed} tensors exceed the tolerance")
        return 1
    print("\n✅ All gradients match")
    return 0
