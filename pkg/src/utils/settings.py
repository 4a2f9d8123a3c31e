"""Run configuration.

Every knob of every component lives in one flat ``RunConfig``. Values are
resolved with the precedence: command-line flags, then the ``key=value``
config file, then ``E2V_*`` environment variables, then defaults. The
resolved configuration is echoed as ``resolved.cfg`` into each output
directory and can be fed back through ``--config``.
"""

import logging
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

from dotenv import dotenv_values
from pydantic import Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.core.evaluation.config import EvalConfig
from src.core.losses import LossWeights
from src.core.net import FusionMode, ModelConfig
from src.core.synth.models import SceneConfig
from src.core.training.config import Ablation, TrainConfig, split_seeds
from src.utils.exceptions import ConfigurationError, ErrorCode

logger = logging.getLogger(__name__)

RESOLVED_FILE = "resolved.cfg"


class RunConfig(BaseSettings):
    """Flat configuration of a command run; every key has a default."""

    model_config = SettingsConfigDict(env_prefix="E2V_", extra="forbid", case_sensitive=False)

    # Run
    seed: int = 0
    jobs: int = Field(default=1, ge=1)

    # Synthetic data
    sequences: int = Field(default=20, ge=1)
    width: int = 64
    height: int = 64
    duration: float = 2.0
    frame_rate: float = 50.0
    min_sprites: int = 2
    max_sprites: int = 4
    sprite_min_size: int = 10
    sprite_max_size: int = 24
    max_speed: float = 40.0
    epsilon_min: float = 0.1
    epsilon_max: float = 1.5
    offset: float = 1e-3

    # Teacher
    teacher: str = "oracle"
    teacher_masks: int = Field(default=10, ge=0)
    teacher_seed: int = 0

    # Network
    base_channels: int = 16
    num_encoders: int = 2
    num_residual_blocks: int = 2
    num_bins: int = 5
    use_cfhm: bool = True
    bottleneck_channels: int = 64
    cfhm_kernel: int = 3
    use_cfa: bool = True
    fusion: FusionMode = FusionMode.SFF
    detach_cfa_input: bool = False
    attention_heads: int = 4

    # Losses
    lambda_distill: float = 1.8
    alpha: float = 50.0

    # Training
    seq_len: int = 16
    batch_size: int = 2
    epochs: int = 8
    learning_rate: float = 1e-3
    grad_clip: float = 1.0
    ablation: Ablation = Ablation.FULL
    num_masks: int = 10
    reset_state_per_window: bool = True
    heldout_fraction: float = 0.2
    checkpoint_every: int = 1
    perceptual_seed: int = 0
    ablation_seeds: int = Field(default=5, ge=1)

    # Evaluation
    tolerance: float = 1e-3
    sparsity_scale: float = 0.1

    @model_validator(mode="after")
    def check_components(self) -> "RunConfig":
        for project in (self.scene_config, self.net_config, self.loss_weights, self.train_config, self.eval_config):
            try:
                project()
            except ValidationError as e:
                details = "; ".join(f"{'.'.join(map(str, p['loc'])) or '-'}: {p['msg']}" for p in e.errors())
                raise ValueError(details) from None
        return self

    def _project(self, cls: type, **extra: Any) -> Any:
        own = type(self).model_fields
        values = {name: getattr(self, name) for name in cls.model_fields if name in own}
        values.update(extra)
        return cls(**values)

    def scene_config(self) -> SceneConfig:
        return self._project(SceneConfig)

    def net_config(self) -> ModelConfig:
        return self._project(ModelConfig)

    def loss_weights(self) -> LossWeights:
        return self._project(LossWeights)

    def train_config(self) -> TrainConfig:
        return self._project(TrainConfig)

    def eval_config(self) -> EvalConfig:
        return self._project(EvalConfig, discard_seed=split_seeds(self.seed).discard)

    def ablation_seed_list(self) -> list[int]:
        return [self.seed + i for i in range(self.ablation_seeds)]

    @classmethod
    def load(
        cls,
        config_file: Path | None = None,
        overrides: Mapping[str, Any] | None = None,
    ) -> "RunConfig":
        """Resolve a configuration from an optional file and explicit overrides.

        Raises:
            ConfigurationError: On an unreadable file, an unknown key or an invalid value.
        """
        values: dict[str, Any] = {}
        if config_file is not None:
            values.update(read_config_file(config_file))
        values.update({k.lower(): v for k, v in (overrides or {}).items()})
        try:
            return cls(**values)
        except ValidationError as e:
            raise _configuration_error(e) from e

    def to_cfg_text(self, header: Iterable[str] = ()) -> str:
        lines = [f"# {line}" for line in header]
        for key, value in self.model_dump(mode="json").items():
            if isinstance(value, bool):
                value = "true" if value else "false"
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    def write_resolved(self, out_dir: Path, header: Iterable[str] = ()) -> Path:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        path = out_dir / RESOLVED_FILE
        path.write_text(self.to_cfg_text(header), encoding="utf-8")
        logger.debug(f"Wrote {path}")
        return path


def read_config_file(path: Path) -> dict[str, str]:
    """Parse a ``key=value`` file with ``#`` comments.

    Raises:
        ConfigurationError: If the file is missing or a line has no value.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"Config file not found: {path}", key="config")
    raw = dotenv_values(path, interpolate=False)
    empty = [k for k, v in raw.items() if v is None]
    if empty:
        raise ConfigurationError(f"Config keys without a value: {', '.join(empty)}", key=empty[0])
    return {k.lower(): v for k, v in raw.items()}


def parse_overrides(items: Iterable[str] | None) -> dict[str, str]:
    """Parse repeated ``--set key=value`` options.

    Raises:
        ConfigurationError: If an item has no ``=``.
    """
    result: dict[str, str] = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key.strip():
            raise ConfigurationError(f"Expected key=value, got {item!r}", key=item)
        result[key.strip().lower()] = value.strip()
    return result


def _configuration_error(error: ValidationError) -> ConfigurationError:
    problems = error.errors()
    unknown = [str(p["loc"][0]) for p in problems if p["type"] == "extra_forbidden" and p["loc"]]
    if unknown:
        return ConfigurationError(
            f"Unknown configuration key(s): {', '.join(unknown)}",
            error_code=ErrorCode.CONFIG_UNKNOWN_KEY,
            key=unknown[0],
        )
    first = problems[0]
    key = ".".join(str(part) for part in first["loc"]) or None
    return ConfigurationError(
        f"Invalid configuration: {first['msg']}" + (f" ({key})" if key else ""),
        details={"errors": [p["msg"] for p in problems]},
        key=key,
    )
