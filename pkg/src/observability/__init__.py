"""Metrics collection for training runs."""

from .metrics import HAS_PROMETHEUS, InMemoryMetrics, TrainingMetrics

__all__ = ["HAS_PROMETHEUS", "InMemoryMetrics", "TrainingMetrics"]
