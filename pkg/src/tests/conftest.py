"""Shared fixtures: a tiny synthetic dataset, its teacher cache and a small network."""

from pathlib import Path

import pytest
import torch

from src.core.losses import stage0_size
from src.core.net import ModelConfig
from src.core.semantics.teacher import OracleTeacher, precompute_teacher
from src.core.synth.generator import generate_dataset
from src.core.synth.models import SceneConfig

SIZE = 32


@pytest.fixture(autouse=True)
def _deterministic_torch():
    torch.manual_seed(0)


@pytest.fixture(scope="session")
def scene_config() -> SceneConfig:
    """32x32 scenes of 15 frames (0.3 s at 50 fps)."""
    return SceneConfig(
        width=SIZE,
        height=SIZE,
        duration=0.3,
        sprite_min_size=8,
        sprite_max_size=14,
        epsilon_min=0.1,
        epsilon_max=0.3,
    )


@pytest.fixture(scope="session")
def small_model_config() -> ModelConfig:
    return ModelConfig(
        base_channels=4,
        num_encoders=2,
        num_residual_blocks=1,
        num_bins=3,
        bottleneck_channels=8,
        attention_heads=2,
    )


@pytest.fixture(scope="session")
def dataset_dir(tmp_path_factory, scene_config) -> Path:
    out = tmp_path_factory.mktemp("dataset")
    generate_dataset(out, 3, scene_config, seed=0)
    return out


@pytest.fixture(scope="session")
def teacher_cache(tmp_path_factory, dataset_dir, small_model_config) -> Path:
    root = tmp_path_factory.mktemp("teacher")
    provider = OracleTeacher(
        feature_shape=small_model_config.feature_shape((SIZE, SIZE)),
        mask_size=stage0_size(SIZE, SIZE),
        num_masks=4,
        seed=0,
    )
    precompute_teacher(dataset_dir, provider, root)
    return root
