"""
Counters and timers for long-running computations.
"""
import logging
import time
from contextlib import contextmanager
from typing import Dict, Iterator, List, Optional

logger = logging.getLogger(__name__)


class MetricsService:
    """Tracks how often and how long sweeps, pivot searches and training runs take."""

    def __init__(self, window: int = 100):
        self.window = window
        self.counters: Dict[str, int] = {}
        self.timers: Dict[str, List[float]] = {}

    def increment(self, metric_name: str, value: int = 1, tags: Optional[Dict[str, str]] = None):
        key = self._make_key(metric_name, tags)
        self.counters[key] = self.counters.get(key, 0) + value

    def timer(self, metric_name: str, duration_ms: float, tags: Optional[Dict[str, str]] = None):
        """Record a duration, keeping the most recent `window` samples."""
        key = self._make_key(metric_name, tags)
        samples = self.timers.setdefault(key, [])
        samples.append(duration_ms)
        if len(samples) > self.window:
            del samples[: len(samples) - self.window]

    def get_stats(self, metric_name: str, tags: Optional[Dict[str, str]] = None) -> Dict[str, float]:
        """Count, extremes, mean and percentiles of a timer."""
        key = self._make_key(metric_name, tags)
        values = sorted(self.timers.get(key, []))
        if not values:
            return {}
        return {
            "count": len(values),
            "min": values[0],
            "max": values[-1],
            "avg": sum(values) / len(values),
            "p50": values[len(values) // 2],
            "p95": values[int(len(values) * 0.95)],
            "p99": values[int(len(values) * 0.99)],
        }

    def summary(self) -> Dict[str, Dict[str, float]]:
        return {key: self.get_stats(key) for key in sorted(self.timers)}

    def log_summary(self):
        for key, stats in self.summary().items():
            logger.info(f"TIMER: {key} count={stats['count']} avg={stats['avg']:.1f}ms max={stats['max']:.1f}ms")
        for key, count in sorted(self.counters.items()):
            logger.info(f"COUNTER: {key}={count}")

    def reset(self):
        self.counters.clear()
        self.timers.clear()

    def _make_key(self, metric_name: str, tags: Optional[Dict[str, str]] = None) -> str:
        if not tags:
            return metric_name
        tag_str = ",".join(f"{k}={v}" for k, v in sorted(tags.items()))
        return f"{metric_name}[{tag_str}]"


# Global metrics instance
_metrics_service = None


def get_metrics_service() -> MetricsService:
    """Get the global metrics service instance."""
    global _metrics_service
    if _metrics_service is None:
        _metrics_service = MetricsService()
    return _metrics_service


def increment_metric(name: str, value: int = 1, tags: Optional[Dict[str, str]] = None):
    get_metrics_service().increment(name, value, tags)


@contextmanager
def timed(name: str, tags: Optional[Dict[str, str]] = None) -> Iterator[None]:
    """Record the wall time of the enclosed block under `name`."""
    start = time.perf_counter()
    try:
        yield
    finally:
        get_metrics_service().timer(name, (time.perf_counter() - start) * 1000.0, tags)
