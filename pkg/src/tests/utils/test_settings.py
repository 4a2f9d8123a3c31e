"""Tests for run configuration resolution."""

import pytest

from src.core.net import FusionMode
from src.utils.exceptions import ConfigurationError, ErrorCode
from src.utils.settings import RunConfig, parse_overrides, read_config_file


@pytest.fixture(autouse=True)
def _clean_env(monkeypatch):
    for key in ("E2V_SEED", "E2V_EPOCHS", "E2V_WIDTH"):
        monkeypatch.delenv(key, raising=False)


class TestPrecedence:
    def test_defaults(self):
        cfg = RunConfig.load()
        assert cfg.seed == 0
        assert cfg.lambda_distill == 1.8
        assert cfg.alpha == 50.0
        assert cfg.tolerance == 1e-3

    def test_environment_fills_in(self, monkeypatch):
        monkeypatch.setenv("E2V_SEED", "17")
        assert RunConfig.load().seed == 17

    def test_file_beats_environment(self, tmp_path, monkeypatch):
        monkeypatch.setenv("E2V_SEED", "17")
        path = tmp_path / "run.cfg"
        path.write_text("# comment\nseed=3\nepochs=2\n", encoding="utf-8")
        cfg = RunConfig.load(path)
        assert (cfg.seed, cfg.epochs) == (3, 2)

    def test_overrides_beat_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed=3\nfusion=add\n", encoding="utf-8")
        cfg = RunConfig.load(path, {"seed": 9})
        assert cfg.seed == 9
        assert cfg.fusion is FusionMode.ADD


class TestErrors:
    def test_unknown_key(self):
        with pytest.raises(ConfigurationError) as exc_info:
            RunConfig.load(overrides={"colour": "blue"})
        assert exc_info.value.error_code is ErrorCode.CONFIG_UNKNOWN_KEY
        assert exc_info.value.details["key"] == "colour"

    def test_unknown_key_in_file(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("epohcs=3\n", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="epohcs"):
            RunConfig.load(path)

    def test_invalid_value(self):
        with pytest.raises(ConfigurationError) as exc_info:
            RunConfig.load(overrides={"epochs": "many"})
        assert exc_info.value.error_code is ErrorCode.CONFIG_INVALID_VALUE

    def test_component_validation(self):
        with pytest.raises(ConfigurationError, match="cfhm_kernel"):
            RunConfig.load(overrides={"cfhm_kernel": 4})

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            read_config_file(tmp_path / "absent.cfg")

    def test_key_without_value(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("seed\n", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            read_config_file(path)

    @pytest.mark.parametrize("item", ["seed", "=3"])
    def test_malformed_override(self, item):
        with pytest.raises(ConfigurationError):
            parse_overrides([item])


class TestProjections:
    def test_components_share_values(self):
        cfg = RunConfig.load(overrides={"width": 48, "num_bins": 3, "seq_len": 8, "lambda_distill": 0.5})
        assert cfg.scene_config().width == 48
        assert cfg.net_config().num_bins == 3
        assert cfg.train_config().seq_len == 8
        assert cfg.loss_weights().lambda_distill == 0.5

    def test_eval_discard_seed_follows_master_seed(self):
        a, b = RunConfig.load(overrides={"seed": 1}), RunConfig.load(overrides={"seed": 2})
        assert a.eval_config().discard_seed == RunConfig.load(overrides={"seed": 1}).eval_config().discard_seed
        assert a.eval_config().discard_seed != b.eval_config().discard_seed

    def test_ablation_seeds(self):
        assert RunConfig.load(overrides={"seed": 10, "ablation_seeds": 3}).ablation_seed_list() == [10, 11, 12]


def test_resolved_file_round_trips(tmp_path):
    cfg = RunConfig.load(overrides={"seed": 4, "use_cfhm": False, "fusion": "xattn", "bottleneck_channels": 32})
    path = cfg.write_resolved(tmp_path, header=["train --out run"])
    text = path.read_text()
    assert text.startswith("# train --out run\n")
    assert "use_cfhm=false" in text
    assert RunConfig.load(path) == cfg
