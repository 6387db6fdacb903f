"""
``irrcnn summary``: parameter counts, layers and spatial trace of every variant.
"""
import argparse

from irrcnn.cli.options import add_run_options, config_from_args
from irrcnn.models.arch import (
    PARITY_TOLERANCE,
    REFERENCE_PARAM_COUNT,
    arch_param_count,
    build_model,
    parity_report,
    parity_violations,
)
from irrcnn.schemas.arch import Variant
from irrcnn.utils.logger import setup_logging

RECURRENCE_DEPTHS = (0, 1, 2)


def register(subparsers: argparse._SubParsersAction) -> None:
    parser = subparsers.add_parser("summary", help="Summarize the configured architectures")
    add_run_options(parser)
    parser.add_argument("--layers", choices=("on", "off"), default="on", help="List layers")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    setup_logging()
    arch = config.arch_spec()
    rows = parity_report(arch)

    for row in rows:
        variant_arch = arch.with_changes(variant=row.variant, width_multiplier=row.width_multiplier)
        model = build_model(variant_arch)
        print("\n" + "=" * 70)
        print(f"🏗️  {row.variant.value}: {row.param_count:,} parameters")
        print("=" * 70)
        print(f"   width multiplier: {row.width_multiplier}")
        print(f"   deviation from irrcnn: {row.deviation:+.2%}")
        print(f"   spatial trace: {' -> '.join(str(s) for s in model.spatial_trace())}")
        if args.layers == "on":
            for layer in model.children():
                print(f"     {layer.describe()}")

    print("\n" + "=" * 70)
    print("📊 Parameter parity")
    print("=" * 70)
    for k in RECURRENCE_DEPTHS:
        count = arch_param_count(arch.with_changes(variant=Variant.IRRCNN, k=k))
        print(f"   irrcnn k={k}: {count:,}")
    print(f"   reference budget: ~{REFERENCE_PARAM_COUNT:,}")

    compared = [row for row in rows if row.variant in (Variant.IRRCNN, Variant.EIN, Variant.EIRN)]
    violations = parity_violations(compared, PARITY_TOLERANCE)
    if violations:
        for violation in violations:
            print(f"   ⚠️  outside {PARITY_TOLERANCE:.0%}: {violation}")
    else:
        print(f"   ✅ irrcnn / ein / eirn within {PARITY_TOLERANCE:.0%}")
    return 0
