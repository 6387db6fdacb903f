"""
Shared fixtures: seeded generators, tiny models and a fast synthetic run config.
"""
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest
from loguru import logger

from irrcnn.config import RunConfig
from irrcnn.core.tensor import Precision
from irrcnn.init.uniform import init_model
from irrcnn.models.arch import build_model, miniature_arch
from irrcnn.models.network import Network
from irrcnn.schemas.arch import Activation, Variant

# Miniature layout on the synthetic task: runs a full epoch in well under a second.
TINY_RUN: Dict[str, Any] = {
    "dataset": "synthetic",
    "synthetic_train": 32,
    "synthetic_val": 16,
    "synthetic_classes": 4,
    "synthetic_size": 8,
    "stem_widths": [4],
    "stage_widths": [4, 8, 8],
    "transition_widths": [8, 8, 8],
    "pools": [True, True, False],
    "epochs": 2,
    "batch_size": 16,
    "timing": False,
    "progress": False,
}

TINY_TOML = """\
dataset = "synthetic"
synthetic_train = 32
synthetic_val = 16
synthetic_classes = 4
synthetic_size = 8
stem_widths = [4]
stage_widths = [4, 8, 8]
transition_widths = [8, 8, 8]
pools = [true, true, false]
epochs = 2
batch_size = 16
timing = false
progress = false

[sgd]
learning_rate = 0.01
"""


@pytest.fixture(autouse=True)
def reset_logging():
    """Drop handlers added by ``setup_logging`` so file sinks do not leak between tests."""
    yield
    logger.remove()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(0)


@pytest.fixture
def tiny_config(tmp_path: Path) -> RunConfig:
    return RunConfig(**TINY_RUN, out=tmp_path / "run")


@pytest.fixture
def tiny_toml(tmp_path: Path) -> Path:
    path = tmp_path / "tiny.toml"
    path.write_text(TINY_TOML)
    return path


@pytest.fixture
def miniature() -> Network:
    """Initialized miniature IRRCNN in standard precision."""
    model = build_model(miniature_arch(Variant.IRRCNN))
    init_model(model, np.random.default_rng(0))
    return model


@pytest.fixture
def wide_miniature() -> Network:
    """Initialized miniature IRRCNN in wide precision with ELU activations."""
    arch = miniature_arch(Variant.IRRCNN, activation=Activation.ELU, precision=Precision.WIDE)
    model = build_model(arch)
    init_model(model, np.random.default_rng(1))
    return model
