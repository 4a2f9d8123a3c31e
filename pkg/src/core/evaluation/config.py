"""Evaluation settings and robustness grids."""

from __future__ import annotations

from enum import Enum

import numpy as np
from pydantic import BaseModel, Field

from src.utils.exceptions import InvalidArgumentError

# Grids of the original protocol; sparsity counts are rescaled by ``sparsity_scale``.
SPARSITY_COUNTS = tuple(range(5000, 45001, 5000))
RATE_DTS = tuple(round(0.01 * i, 2) for i in range(1, 11))
IRREGULARITY_RATIOS = tuple(round(0.1 * i, 1) for i in range(10))


class SweepAxis(str, Enum):
    SPARSITY = "sparsity"
    RATE = "rate"
    IRREGULARITY = "irregularity"

    @classmethod
    def parse(cls, value: SweepAxis | str) -> SweepAxis:
        try:
            return cls(value)
        except ValueError as e:
            choices = ", ".join(a.value for a in cls)
            raise InvalidArgumentError(f"Unknown sweep axis {value!r} (choose from {choices})", argument="axis") from e


class EvalConfig(BaseModel):
    """Scoring and sweep parameters.

    Attributes:
        tolerance: Max distance in seconds between a reconstruction and its matched frame.
        sparsity_scale: Factor applied to the event counts of the sparsity grid.
        discard_seed: Seed of frame discarding in the irregularity sweep.
        perceptual_seed: Seed of the frozen extractor behind ``proxy_lpips``.
    """

    tolerance: float = Field(default=1e-3, ge=0.0)
    sparsity_scale: float = Field(default=0.1, gt=0.0)
    discard_seed: int = 0
    perceptual_seed: int = 0

    def sparsity_counts(self) -> list[int]:
        return [max(1, int(round(n * self.sparsity_scale))) for n in SPARSITY_COUNTS]

    def default_settings(self, axis: SweepAxis | str) -> list[float]:
        axis = SweepAxis.parse(axis)
        if axis is SweepAxis.SPARSITY:
            return [float(n) for n in self.sparsity_counts()]
        if axis is SweepAxis.RATE:
            return list(RATE_DTS)
        return list(IRREGULARITY_RATIOS)

    def sequence_discard_seed(self, name: str) -> int:
        """Discard seed of one sequence; depends on its name only, not on evaluation order."""
        entropy = [self.discard_seed, *name.encode()]
        return int(np.random.SeedSequence(entropy).generate_state(1)[0])
