"""
Configuration module using pydantic-settings.

``Settings`` holds process-wide options read from the environment / ``.env``.
``RunConfig`` describes one experiment; it is read from a TOML file and
command-line overrides, never from the environment.
"""
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple, Type

from pydantic import Field, ValidationError, field_validator, model_validator
from pydantic_settings import (
    BaseSettings,
    PydanticBaseSettingsSource,
    SettingsConfigDict,
    TomlConfigSettingsSource,
)

from irrcnn.core.tensor import Precision
from irrcnn.data.cifar import DatasetName
from irrcnn.exceptions import ConfigError
from irrcnn.schemas.arch import Activation, ArchSpec, StageSpec, Variant
from irrcnn.schemas.training import EveConfig, InitConfig, L2Scope, OptimizerName, SgdConfig

LOG_LEVELS = ("TRACE", "DEBUG", "INFO", "SUCCESS", "WARNING", "ERROR", "CRITICAL")


class Settings(BaseSettings):
    """Process settings loaded from environment variables."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="IRRCNN_",
        case_sensitive=False,
        extra="ignore",
    )

    app_name: str = Field(default="irrcnn-engine", description="Application name")
    app_version: str = Field(default="0.1.0", description="Application version")
    debug: bool = Field(default=False, description="Debug mode (DEBUG console logs)")
    log_level: str = Field(default="INFO", description="Console logging level")
    log_json: bool = Field(default=False, description="Serialize console logs as JSON")
    log_dir: Optional[Path] = Field(
        default=None, description="Directory for rotating log files; the run directory if unset"
    )
    progress_bars: bool = Field(default=True, description="Show tqdm progress bars")
    cifar_dir: Optional[Path] = Field(
        default=None, description="Default directory holding the CIFAR binary batches"
    )

    @field_validator("log_level")
    @classmethod
    def validate_log_level(cls, v: str) -> str:
        """Validate the level is one loguru knows."""
        level = v.upper()
        if level not in LOG_LEVELS:
            raise ValueError(f"log_level must be one of {', '.join(LOG_LEVELS)}")
        return level


# Global settings instance
settings = Settings()


class RunConfig(BaseSettings):
    """
    One training / evaluation run.

    Defaults follow the published CIFAR recipe: SGD momentum 0.9, batch 128,
    350 epochs, dropout 0.5, L2 0.002, EVE hyperparameters as in ``EveConfig``.
    """

    model_config = SettingsConfigDict(extra="forbid", validate_default=True)

    # Architecture
    arch: Variant = Field(default=Variant.IRRCNN, description="Model variant")
    k: int = Field(default=2, ge=0, description="RCL time steps")
    activation: Activation = Activation.RELU
    stem_widths: List[int] = Field(default_factory=lambda: [96, 96], min_length=1)
    stage_widths: List[int] = Field(default_factory=lambda: [96, 192, 384], min_length=1)
    transition_widths: List[int] = Field(default_factory=lambda: [192, 384, 384], min_length=1)
    pools: List[bool] = Field(default_factory=lambda: [True, True, False])
    width_multiplier: str = Field(default="1", description="Rational width multiplier")
    dropout: float = Field(default=0.5, ge=0.0, lt=1.0)
    precision: Precision = Precision.STANDARD
    calibrate: bool = Field(
        default=True, description="Scale EIN/EIRN widths to the IRRCNN parameter budget"
    )

    # Data
    dataset: DatasetName = DatasetName.CIFAR10
    data_dir: Optional[Path] = None
    augment: bool = True
    train_limit: Optional[int] = Field(default=None, ge=1)
    val_limit: Optional[int] = Field(default=None, ge=1)
    synthetic_train: int = Field(default=512, ge=1)
    synthetic_val: int = Field(default=256, ge=1)
    synthetic_classes: int = Field(default=10, ge=2)
    synthetic_size: int = Field(default=32, ge=8)

    # Optimization
    optimizer: OptimizerName = OptimizerName.SGD
    sgd: SgdConfig = Field(default_factory=SgdConfig)
    eve: EveConfig = Field(default_factory=EveConfig)
    init: InitConfig = Field(default_factory=InitConfig)
    l2: float = Field(default=0.002, ge=0.0, description="L2 weight regularization")
    l2_scope: L2Scope = L2Scope.BLOCKS
    epochs: int = Field(default=350, ge=1)
    batch_size: int = Field(default=128, ge=1)
    seed: int = Field(default=0, ge=0)

    # Output
    out: Path = Field(default=Path("runs/latest"), description="Run directory")
    timing: bool = Field(default=True, description="Record wall-clock seconds per epoch")
    progress: bool = Field(
        default_factory=lambda: settings.progress_bars, description="Show progress bars"
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    @field_validator("width_multiplier", mode="before")
    @classmethod
    def validate_multiplier(cls, v: Any) -> str:
        value = Fraction(str(v))
        if value <= 0:
            raise ValueError("width_multiplier must be positive")
        return str(value)

    @model_validator(mode="after")
    def check_stages(self) -> "RunConfig":
        if not len(self.stage_widths) == len(self.transition_widths) == len(self.pools):
            raise ValueError("stage_widths, transition_widths and pools must have equal length")
        return self

    @property
    def classes(self) -> int:
        return self.dataset.classes or self.synthetic_classes

    @property
    def image_size(self) -> int:
        return self.synthetic_size if self.dataset == DatasetName.SYNTHETIC else 32

    def arch_spec(self) -> ArchSpec:
        """Architecture described by this run (before any width calibration)."""
        return ArchSpec(
            variant=self.arch,
            input_shape=(3, self.image_size, self.image_size),
            stem=self.stem_widths,
            stages=[
                StageSpec(width=w, transition_out=t, pool=p)
                for w, t, p in zip(self.stage_widths, self.transition_widths, self.pools)
            ],
            k=self.k,
            classes=self.classes,
            activation=self.activation,
            dropout_rate=self.dropout,
            width_multiplier=self.width_multiplier,
            precision=self.precision,
        )

    def resolved_data_dir(self) -> Optional[Path]:
        return self.data_dir if self.data_dir is not None else settings.cifar_dir


def _deep_merge(base: Mapping[str, Any], overrides: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(
    path: Optional[Path] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    defaults: Optional[Mapping[str, Any]] = None,
) -> RunConfig:
    """
    Build a ``RunConfig`` from a TOML file and command-line overrides (flags win).

    ``None`` override values mean "not given" and are skipped. ``defaults``
    sit underneath the file (commands use them for their own presets).

    Raises:
        ConfigError: the file is missing or malformed, or a value fails validation
    """
    data: Dict[str, Any] = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"Config file not found: {path}")
        try:
            data = dict(TomlConfigSettingsSource(RunConfig, toml_file=path)())
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"{path} is not valid TOML: {e}") from e
    merged = _deep_merge(_deep_merge(defaults or {}, data), overrides or {})
    try:
        return RunConfig(**merged)
    except ValidationError as e:
        raise ConfigError(f"Invalid run configuration:\n{e}") from e
