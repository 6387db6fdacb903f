"""
Tests for process settings and run configuration loading.
"""
from fractions import Fraction
from pathlib import Path

import pytest
from pydantic import ValidationError

from irrcnn.config import RunConfig, Settings, load_run_config
from irrcnn.exceptions import ConfigError
from irrcnn.schemas.arch import Variant
from irrcnn.schemas.training import InitScheme, OptimizerName


class TestRunConfigDefaults:
    def test_published_recipe(self):
        config = RunConfig()
        assert config.arch == Variant.IRRCNN
        assert config.k == 2
        assert config.epochs == 350
        assert config.batch_size == 128
        assert config.dropout == 0.5
        assert config.l2 == 0.002
        assert config.sgd.momentum == 0.9
        assert config.init.scheme == InitScheme.SCALED_UNIFORM

    def test_arch_spec(self):
        arch = RunConfig().arch_spec()
        assert arch.input_shape == (3, 32, 32)
        assert [stage.width for stage in arch.stages] == [96, 192, 384]
        assert arch.classes == 10

    def test_synthetic_shape(self):
        config = RunConfig(dataset="synthetic", synthetic_size=16, synthetic_classes=3)
        assert config.classes == 3
        assert config.arch_spec().input_shape == (3, 16, 16)

    def test_multiplier_normalized(self):
        assert RunConfig(width_multiplier="2/8").width_multiplier == "1/4"
        assert Fraction(RunConfig(width_multiplier=0.5).width_multiplier) == Fraction(1, 2)
        with pytest.raises(ValidationError):
            RunConfig(width_multiplier="-1")

    def test_stage_lists_must_align(self):
        with pytest.raises(ValidationError):
            RunConfig(stage_widths=[96, 192], transition_widths=[192, 384, 384])

    def test_environment_is_ignored(self, monkeypatch):
        monkeypatch.setenv("EPOCHS", "3")
        monkeypatch.setenv("IRRCNN_EPOCHS", "3")
        assert RunConfig().epochs == 350


class TestLoadRunConfig:
    def test_file_values(self, tiny_toml):
        config = load_run_config(tiny_toml)
        assert config.synthetic_size == 8
        assert config.pools == [True, True, False]
        assert config.timing is False

    def test_flags_win(self, tiny_toml):
        config = load_run_config(tiny_toml, {"epochs": 5, "batch_size": None, "seed": 3})
        assert config.epochs == 5
        assert config.batch_size == 16
        assert config.seed == 3

    def test_defaults_sit_under_the_file(self, tiny_toml):
        config = load_run_config(tiny_toml, defaults={"epochs": 9, "optimizer": "eve"})
        assert config.epochs == 2
        assert config.optimizer == OptimizerName.EVE

    def test_nested_sections_merge(self, tmp_path):
        path = tmp_path / "nested.toml"
        path.write_text('[init]\ntol_var = 0.1\n\n[sgd]\nlearning_rate = 0.05\n')
        config = load_run_config(path, {"init": {"scheme": "lsuv"}})
        assert config.init.scheme == InitScheme.LSUV
        assert config.init.tol_var == 0.1
        assert config.sgd.learning_rate == 0.05
        assert config.sgd.momentum == 0.9

    def test_no_file(self):
        assert load_run_config(None, {"arch": "ein"}).arch == Variant.EIN

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_run_config(tmp_path / "absent.toml")

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "broken.toml"
        path.write_text("epochs = = 3\n")
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_invalid_value(self, tmp_path):
        path = tmp_path / "bad.toml"
        path.write_text('arch = "resnet"\n')
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "extra.toml"
        path.write_text("learning_rate = 0.1\n")
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_unknown_nested_key(self, tmp_path):
        path = tmp_path / "extra.toml"
        path.write_text("[sgd]\nnesterov = true\n")
        with pytest.raises(ConfigError):
            load_run_config(path)

    def test_out_is_a_path(self, tiny_toml, tmp_path):
        config = load_run_config(tiny_toml, {"out": str(tmp_path / "x")})
        assert config.out == Path(tmp_path / "x")


class TestSettings:
    def test_log_level_normalized(self):
        assert Settings(log_level="debug").log_level == "DEBUG"

    def test_log_level_rejected(self):
        with pytest.raises(ValidationError):
            Settings(log_level="verbose")

    def test_environment_prefix(self, monkeypatch, tmp_path):
        monkeypatch.setenv("IRRCNN_CIFAR_DIR", str(tmp_path))
        monkeypatch.setenv("IRRCNN_PROGRESS_BARS", "false")
        settings = Settings()
        assert settings.cifar_dir == tmp_path
        assert settings.progress_bars is False


@pytest.mark.parametrize(
    "name", ["cifar10.toml", "cifar100_eve.toml", "desk_cifar10.toml", "smoke.toml"]
)
def test_shipped_configs_load(name):
    config = load_run_config(Path(__file__).parent.parent / "configs" / name)
    assert config.arch_spec().stages
