"""Training loop, ablation switches and the ablation suite."""

from .ablation import AblationGrid, AblationReport, parse_grid, run_ablation_suite, split_heldout
from .config import Ablation, SeedPlan, TrainConfig, apply_ablation, split_seeds
from .trainer import TrainResult, Trainer, train

__all__ = [
    "Ablation",
    "AblationGrid",
    "AblationReport",
    "SeedPlan",
    "TrainConfig",
    "TrainResult",
    "Trainer",
    "apply_ablation",
    "parse_grid",
    "run_ablation_suite",
    "split_heldout",
    "split_seeds",
    "train",
]
