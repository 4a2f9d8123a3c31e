"""End-to-end tests of the e2v commands on a tiny dataset."""

import logging
import sys
from pathlib import Path

import pytest
import typer
from typer.testing import CliRunner

from src.cli import app
from src.cli.common import command_errors
from src.cli.main import main
from src.core.synth.dataset import list_sequences, read_meta
from src.utils.exceptions import NumericalError

runner = CliRunner()

SMALL_RUN = """\
# tiny scenes and network
width=32
height=32
duration=0.3
sprite_min_size=8
sprite_max_size=14
epsilon_min=0.1
epsilon_max=0.3
base_channels=4
num_encoders=2
num_residual_blocks=1
num_bins=3
bottleneck_channels=8
attention_heads=2
teacher_masks=4
num_masks=4
seq_len=7
epochs=1
"""


@pytest.fixture(scope="module", autouse=True)
def _restore_root_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("cli")
    (root / "small.cfg").write_text(SMALL_RUN, encoding="utf-8")
    return root


@pytest.fixture(scope="module")
def pipeline(workspace) -> dict[str, Path]:
    """Run simulate, teacher and train once for the whole module."""
    paths = {
        "config": workspace / "small.cfg",
        "data": workspace / "data",
        "cache": workspace / "cache",
        "run": workspace / "run",
    }
    steps = [
        ["simulate", "--out", str(paths["data"]), "-n", "2", "--seed", "5", "-c", str(paths["config"])],
        ["teacher", "--dataset", str(paths["data"]), "--out", str(paths["cache"]), "-c", str(paths["config"])],
        [
            "train",
            "--dataset",
            str(paths["data"]),
            "--teacher-cache",
            str(paths["cache"]),
            "--out",
            str(paths["run"]),
            "-c",
            str(paths["config"]),
        ],
    ]
    for args in steps:
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
    return paths


class TestPipeline:
    def test_simulate_outputs(self, pipeline):
        names = [p.name for p in list_sequences(pipeline["data"])]
        assert names == ["seq_0000", "seq_0001"]
        resolved = (pipeline["data"] / "resolved.cfg").read_text()
        assert resolved.startswith("# simulate --out")
        assert "seed=5" in resolved
        assert "width=32" in resolved

    def test_resolved_config_reproduces_the_dataset(self, tmp_path, pipeline):
        again = tmp_path / "again"
        result = runner.invoke(app, ["simulate", "--out", str(again), "-c", str(pipeline["data"] / "resolved.cfg")])
        assert result.exit_code == 0, result.output
        for a, b in zip(list_sequences(pipeline["data"]), list_sequences(again), strict=True):
            assert (a / "events.evb1").read_bytes() == (b / "events.evb1").read_bytes()

    def test_flags_override_config_file(self, tmp_path, pipeline):
        out = tmp_path / "flags"
        result = runner.invoke(
            app,
            ["simulate", "--out", str(out), "-n", "1", "--resolution", "24", "-c", str(pipeline["config"]), "--set", "width=40"],
        )
        assert result.exit_code == 0, result.output
        assert read_meta(out / "seq_0000" / "meta.cfg").resolution == (24, 24)

    def test_teacher_cache_is_complete(self, pipeline):
        assert (pipeline["cache"] / "seq_0000" / ".complete").is_file()
        assert (pipeline["cache"] / "seq_0001" / "000014.tch1").is_file()

    def test_train_outputs(self, pipeline):
        run = pipeline["run"]
        assert (run / "final.ckpt").is_file()
        assert (run / "losses.csv").is_file()
        assert "epochs=1" in (run / "resolved.cfg").read_text()
        assert "e2v_train_steps_total" in (run / "metrics.prom").read_text()

    def test_evaluate(self, tmp_path, pipeline):
        out = tmp_path / "eval"
        result = runner.invoke(
            app,
            ["evaluate", "--checkpoint", str(pipeline["run"] / "final.ckpt"), "--dataset", str(pipeline["data"]), "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert (out / "report.csv").is_file()
        assert (out / "aggregate.csv").is_file()
        assert (out / "resolved.cfg").is_file()

    def test_robustness(self, tmp_path, pipeline):
        out = tmp_path / "rate"
        args = [
            "robustness",
            "--checkpoint",
            str(pipeline["run"] / "final.ckpt"),
            "--dataset",
            str(pipeline["data"]),
            "--out",
            str(out),
            "--axis",
            "rate",
            "--settings",
            "0.02,0.04",
        ]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        assert (out / "curves_rate.csv").is_file()
        assert (out / "curves_rate.png").is_file()

    def test_reconstruct_between_frames(self, tmp_path, pipeline):
        seq = pipeline["data"] / "seq_0000"
        out = tmp_path / "frames"
        args = [
            "reconstruct",
            "--checkpoint",
            str(pipeline["run"] / "final.ckpt"),
            "--events",
            str(seq / "events.evb1"),
            "--out",
            str(out),
            "--grouping",
            "frames",
            "--timestamps",
            str(seq / "timestamps.txt"),
        ]
        result = runner.invoke(app, args)
        assert result.exit_code == 0, result.output
        assert len(list(out.glob("*.pgm"))) == 14
        assert len((out / "timestamps.txt").read_text().split()) == 14


class TestExitCodes:
    def test_unknown_config_key_is_a_usage_error(self, tmp_path):
        result = runner.invoke(app, ["simulate", "--out", str(tmp_path), "--set", "colour=blue"])
        assert result.exit_code == 1
        assert not (tmp_path / "resolved.cfg").exists()

    def test_missing_config_file(self, tmp_path):
        result = runner.invoke(app, ["simulate", "--out", str(tmp_path), "-c", str(tmp_path / "absent.cfg")])
        assert result.exit_code == 1

    def test_bad_axis(self, tmp_path, pipeline):
        args = [
            "robustness",
            "--checkpoint",
            str(pipeline["run"] / "final.ckpt"),
            "--dataset",
            str(pipeline["data"]),
            "--out",
            str(tmp_path),
            "--axis",
            "colour",
        ]
        assert runner.invoke(app, args).exit_code == 1

    def test_missing_dataset_is_a_data_error(self, tmp_path):
        args = ["teacher", "--dataset", str(tmp_path / "absent"), "--out", str(tmp_path / "cache")]
        assert runner.invoke(app, args).exit_code == 2

    def test_missing_teacher_cache_is_a_data_error(self, tmp_path, pipeline):
        args = [
            "train",
            "--dataset",
            str(pipeline["data"]),
            "--teacher-cache",
            str(tmp_path / "empty"),
            "--out",
            str(tmp_path / "run"),
            "-c",
            str(pipeline["config"]),
        ]
        assert runner.invoke(app, args).exit_code == 2

    def test_bad_checkpoint_is_a_data_error(self, tmp_path, pipeline):
        bogus = tmp_path / "bogus.ckpt"
        bogus.write_bytes(b"nope")
        args = ["evaluate", "--checkpoint", str(bogus), "--dataset", str(pipeline["data"]), "--out", str(tmp_path)]
        assert runner.invoke(app, args).exit_code == 2

    def test_numeric_failures_exit_with_three(self):
        with pytest.raises(typer.Exit) as exc_info:
            with command_errors("train"):
                raise NumericalError("loss is nan", step=4)
        assert exc_info.value.exit_code == 3

    def test_parser_errors_exit_with_one(self, monkeypatch):
        monkeypatch.setattr(sys, "argv", ["e2v", "simulate", "--no-such-flag"])
        with pytest.raises(SystemExit) as exc_info:
            main()
        assert exc_info.value.code == 1

    def test_main_success_exits_zero(self, monkeypatch, tmp_path, pipeline):
        monkeypatch.setattr(
            sys, "argv", ["e2v", "simulate", "--out", str(tmp_path), "-n", "1", "-c", str(pipeline["config"])]
        )
        with pytest.raises(SystemExit) as exc_info:
            main()
        assert exc_info.value.code == 0
