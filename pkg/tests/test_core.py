"""
Tests for settings, the exception hierarchy and the metrics service.
"""
import pytest

from src.core.config import Settings
from src.core.exceptions import (
    LlvkitError,
    NoFeasiblePivotError,
    PivotError,
    SchemaMismatchError,
    TrainingDivergenceError,
)
from src.observability.metrics import MetricsService, get_metrics_service, increment_metric, timed


class TestSettings:
    def test_defaults(self, monkeypatch):
        monkeypatch.delenv("DEFAULT_LAMBDA", raising=False)
        settings = Settings(_env_file=None)
        assert settings.default_lambda == 1e-5
        assert settings.condition_cap == 1e12
        assert settings.n_input_sets == 200
        assert settings.profile == "ci"

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("DEFAULT_LAMBDA", "0.5")
        monkeypatch.setenv("NUM_THREADS", "4")
        settings = Settings(_env_file=None)
        assert settings.default_lambda == 0.5
        assert settings.num_threads == 4


class TestExceptions:
    def test_hierarchy(self):
        assert issubclass(NoFeasiblePivotError, PivotError)
        assert issubclass(PivotError, LlvkitError)
        assert issubclass(SchemaMismatchError, ValueError)

    def test_divergence_message(self):
        error = TrainingDivergenceError("loss became nan", seed=4, step=17)
        assert str(error) == "loss became nan (seed=4, step=17)"
        assert (error.seed, error.step) == (4, 17)


class TestMetrics:
    def test_timer_statistics(self):
        service = MetricsService(window=3)
        for value in [1.0, 2.0, 3.0, 4.0]:
            service.timer("pivots", value)
        stats = service.get_stats("pivots")
        assert stats["count"] == 3
        assert stats["min"] == 2.0
        assert stats["avg"] == 3.0

    def test_tags_separate_keys(self):
        service = MetricsService()
        service.increment("trained", tags={"width": "16"})
        service.increment("trained", tags={"width": "16"})
        service.increment("trained", tags={"width": "32"})
        assert service.counters == {"trained[width=16]": 2, "trained[width=32]": 1}

    def test_timed_block(self):
        service = get_metrics_service()
        service.reset()
        with timed("block", {"kind": "test"}):
            pass
        increment_metric("runs")
        assert service.summary()["block[kind=test]"]["count"] == 1
        assert service.counters["runs"] == 1

    def test_timed_records_on_error(self):
        service = get_metrics_service()
        service.reset()
        with pytest.raises(RuntimeError):
            with timed("failing"):
                raise RuntimeError("boom")
        assert service.get_stats("failing")["count"] == 1
