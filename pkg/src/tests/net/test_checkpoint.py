"""Tests for checkpoint save and load."""

import pytest
import torch

from src.core.net import CHECKPOINT_FORMAT, E2VNet, load_checkpoint, save_checkpoint
from src.utils.exceptions import CheckpointError, ErrorCode


def test_round_trip_restores_outputs(tmp_path, small_model_config):
    model = E2VNet(small_model_config).eval()
    path = save_checkpoint(model, tmp_path / "run" / "model.pt", {"epoch": 3, "seed": 7})

    restored, metadata = load_checkpoint(path)
    assert metadata == {"epoch": 3, "seed": 7}
    assert restored.config == small_model_config
    assert not restored.training

    voxel = torch.randn(1, 3, 32, 32)
    with torch.no_grad():
        torch.testing.assert_close(restored(voxel).frame, model(voxel).frame)


def test_missing_file(tmp_path):
    with pytest.raises(CheckpointError) as exc_info:
        load_checkpoint(tmp_path / "absent.pt")
    assert exc_info.value.error_code is ErrorCode.CHECKPOINT_INVALID


def test_garbage_file(tmp_path):
    path = tmp_path / "garbage.pt"
    path.write_bytes(b"not a checkpoint")
    with pytest.raises(CheckpointError):
        load_checkpoint(path)


def test_foreign_format_tag(tmp_path, small_model_config):
    path = tmp_path / "other.pt"
    torch.save({"format": "OTHER/9", "config": small_model_config.model_dump(mode="json")}, path)
    with pytest.raises(CheckpointError, match="OTHER/9"):
        load_checkpoint(path)


def test_parameters_not_matching_config(tmp_path, small_model_config):
    path = tmp_path / "mismatch.pt"
    model = E2VNet(small_model_config)
    config = small_model_config.model_copy(update={"bottleneck_channels": 16}).model_dump(mode="json")
    torch.save({"format": CHECKPOINT_FORMAT, "config": config, "state_dict": model.state_dict()}, path)
    with pytest.raises(CheckpointError):
        load_checkpoint(path)
