"""
Convergence-order comparison of IRRCNN against its equivalent networks.
"""
from pathlib import Path
from statistics import mean
from typing import Dict, List, Sequence

from pydantic import BaseModel, Field

from irrcnn.config import RunConfig
from irrcnn.schemas.arch import Variant
from irrcnn.training.run import train_run
from irrcnn.utils.logger import get_logger_for_module

log = get_logger_for_module(__name__)

COMPARED_VARIANTS = (Variant.IRRCNN, Variant.EIRN, Variant.EIN)


class VariantLosses(BaseModel):
    variant: Variant
    final_losses: List[float] = Field(..., description="Final training loss per seed")

    @property
    def mean_loss(self) -> float:
        return mean(self.final_losses)


class ComparisonReport(BaseModel):
    seeds: List[int]
    results: List[VariantLosses]

    def means(self) -> Dict[Variant, float]:
        return {r.variant: r.mean_loss for r in self.results}

    def violations(self) -> List[str]:
        """Equivalent variants that ended with a lower mean loss than IRRCNN."""
        means = self.means()
        reference = means[Variant.IRRCNN]
        return [
            f"{variant.value} ({loss:.4f}) < irrcnn ({reference:.4f})"
            for variant, loss in means.items()
            if variant != Variant.IRRCNN and loss < reference
        ]


def compare_variants(
    config: RunConfig,
    seeds: Sequence[int] = (0, 1, 2),
    variants: Sequence[Variant] = COMPARED_VARIANTS,
) -> ComparisonReport:
    """
    Train every variant at the calibrated equal budget for each seed.

    Runs go to ``<out>/<variant>/seed<n>``; no checkpoints are written.
    An ordering violation is logged as a warning, never raised.
    """
    results = []
    for variant in variants:
        losses = []
        for seed in seeds:
            run = config.model_copy(
                update={
                    "arch": variant,
                    "seed": seed,
                    "calibrate": True,
                    "out": Path(config.out) / variant.value / f"seed{seed}",
                }
            )
            outcome = train_run(run, save=False)
            losses.append(outcome.rows[-1].train_loss)
        results.append(VariantLosses(variant=variant, final_losses=losses))
        log.info(f"{variant.value}: final training losses {losses}")

    report = ComparisonReport(seeds=list(seeds), results=results)
    for violation in report.violations():
        log.warning(f"⚠️ Convergence order violated: {violation}")
    return report
