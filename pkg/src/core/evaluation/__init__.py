"""Reference metrics, recurrent inference and robustness sweeps."""

from .config import EvalConfig, SweepAxis
from .harness import (
    EvalReport,
    aggregate_scores,
    evaluate_checkpoint,
    evaluate_model,
    read_curve,
    robustness_sweep,
    write_report,
)
from .matching import match_nearest_frame
from .metrics import PROXY_LPIPS, mse, perceptual_distance, ssim
from .reconstructor import Reconstruction, Reconstructor

__all__ = [
    "PROXY_LPIPS",
    "EvalConfig",
    "EvalReport",
    "Reconstruction",
    "Reconstructor",
    "SweepAxis",
    "aggregate_scores",
    "evaluate_checkpoint",
    "evaluate_model",
    "match_nearest_frame",
    "mse",
    "perceptual_distance",
    "read_curve",
    "robustness_sweep",
    "ssim",
    "write_report",
]
