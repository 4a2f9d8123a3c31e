"""Training and evaluation metrics.

Prometheus instruments live on a private ``CollectorRegistry`` so several
trainers in one process (ablation suites, tests) never collide. Every value is
mirrored into an in-memory store, which is also the only store when
``prometheus_client`` is not installed.
"""

import logging
import threading
import time
from collections import defaultdict, deque
from contextlib import contextmanager
from typing import Any

try:
    from prometheus_client import CollectorRegistry, Counter, Gauge, Histogram, generate_latest

    HAS_PROMETHEUS = True
except ImportError:
    HAS_PROMETHEUS = False

logger = logging.getLogger(__name__)

LOSS_TERMS = ("semantic", "temporal", "distill", "total")


class InMemoryMetrics:
    """Thread-safe counters, gauges and bounded histograms."""

    def __init__(self, histogram_size: int = 1000):
        self.counters: dict[str, float] = defaultdict(float)
        self.gauges: dict[str, float] = {}
        self.histograms: dict[str, deque] = defaultdict(lambda: deque(maxlen=histogram_size))
        self._lock = threading.Lock()

    def increment_counter(self, name: str, amount: float = 1.0) -> None:
        with self._lock:
            self.counters[name] += amount

    def set_gauge(self, name: str, value: float) -> None:
        with self._lock:
            self.gauges[name] = value

    def observe_histogram(self, name: str, value: float) -> None:
        with self._lock:
            self.histograms[name].append(value)

    def get_metrics_summary(self) -> dict[str, Any]:
        with self._lock:
            return {
                "counters": dict(self.counters),
                "gauges": dict(self.gauges),
                "histograms": {
                    name: {
                        "count": len(values),
                        "sum": sum(values),
                        "avg": sum(values) / len(values) if values else 0.0,
                        "max": max(values) if values else 0.0,
                    }
                    for name, values in self.histograms.items()
                },
            }


class TrainingMetrics:
    """Step counters, last loss per term and step durations of one training run."""

    def __init__(self, enable_prometheus: bool = True, run: str = "train"):
        self.enable_prometheus = enable_prometheus and HAS_PROMETHEUS
        self.run = run
        self.fallback_metrics = InMemoryMetrics()
        self.registry = None
        if self.enable_prometheus:
            self._setup_prometheus_metrics()
        logger.debug(f"Training metrics initialized (Prometheus: {self.enable_prometheus})")

    def _setup_prometheus_metrics(self) -> None:
        self.registry = CollectorRegistry()
        self.steps = Counter("e2v_train_steps_total", "Optimizer steps", ["run"], registry=self.registry)
        self.skipped = Counter(
            "e2v_skipped_sequences_total", "Sequences skipped for missing data", ["run"], registry=self.registry
        )
        self.loss = Gauge("e2v_loss", "Last loss value per term", ["run", "term"], registry=self.registry)
        self.step_duration = Histogram(
            "e2v_step_duration_seconds",
            "Wall time of one optimizer step",
            ["run"],
            buckets=(0.01, 0.05, 0.1, 0.25, 0.5, 1.0, 2.5, 5.0, 10.0),
            registry=self.registry,
        )

    def record_step(self, losses: dict[str, float], duration: float) -> None:
        self.fallback_metrics.increment_counter("steps")
        self.fallback_metrics.observe_histogram("step_duration", duration)
        for term in LOSS_TERMS:
            if term in losses:
                self.fallback_metrics.set_gauge(f"loss_{term}", losses[term])
        if self.enable_prometheus:
            self.steps.labels(run=self.run).inc()
            self.step_duration.labels(run=self.run).observe(duration)
            for term in LOSS_TERMS:
                if term in losses:
                    self.loss.labels(run=self.run, term=term).set(losses[term])

    def record_skipped_sequence(self) -> None:
        self.fallback_metrics.increment_counter("skipped_sequences")
        if self.enable_prometheus:
            self.skipped.labels(run=self.run).inc()

    @contextmanager
    def time_step(self):
        """Yield a dict; fill it with loss floats and they are recorded with the step time."""
        losses: dict[str, float] = {}
        start = time.perf_counter()
        yield losses
        self.record_step(losses, time.perf_counter() - start)

    def summary(self) -> dict[str, Any]:
        return self.fallback_metrics.get_metrics_summary()

    def export(self) -> str:
        """Prometheus text exposition, or an empty string without Prometheus."""
        if not self.enable_prometheus:
            return ""
        return generate_latest(self.registry).decode("utf-8")
