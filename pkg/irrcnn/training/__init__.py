"""
Training loop, evaluation, gradient checks and end-to-end runs.
"""
from irrcnn.training.compare import ComparisonReport, compare_variants
from irrcnn.training.evaluation import evaluate, topk_accuracy, topk_hits
from irrcnn.training.gradcheck import check_model_gradients, gradcheck_variant, miniature_model
from irrcnn.training.run import RunOutcome, load_datasets, model_for_config, train_run
from irrcnn.training.trainer import Trainer

__all__ = [
    "ComparisonReport",
    "RunOutcome",
    "Trainer",
    "check_model_gradients",
    "compare_variants",
    "evaluate",
    "gradcheck_variant",
    "load_datasets",
    "miniature_model",
    "model_for_config",
    "topk_accuracy",
    "topk_hits",
    "train_run",
]
