"""
Observability helpers.
"""
from .metrics import MetricsService, get_metrics_service, increment_metric, timed

__all__ = ["MetricsService", "get_metrics_service", "increment_metric", "timed"]
