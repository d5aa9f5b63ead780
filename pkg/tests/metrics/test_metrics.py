import pytest
from prometheus_client import CollectorRegistry, Counter

from inpaint360.errors import NumericalFailure
from inpaint360.instrumentation.guards import NumericalGuard
from inpaint360.metrics import NUMERICAL_FAILURES_TOTAL, write_metrics, metrics_text
from inpaint360.metrics.custom import LOSS


def test_guard_counts_failures():
    before = NUMERICAL_FAILURES_TOTAL.labels(stage="unit-guard")._value.get()
    guard = NumericalGuard("unit-guard")
    guard.check(1.5, 3)
    with pytest.raises(NumericalFailure) as info:
        guard.check(float("inf"), 7, what="gradient")
    after = NUMERICAL_FAILURES_TOTAL.labels(stage="unit-guard")._value.get()
    assert after == before + 1
    assert info.value.iteration == 7
    assert info.value.exit_code == 4
    assert "gradient" in str(info.value)


def test_loss_gauge_in_exposition():
    LOSS.labels(stage="unit-loss", component="pixel").set(0.125)
    text = metrics_text()
    assert 'inpaint360_loss{stage="unit-loss",component="pixel"} 0.125' in text


def test_write_metrics_to_file(tmp_path):
    registry = CollectorRegistry()
    counter = Counter("unit_counter", "A counter for the exporter test.", registry=registry)
    counter.inc(2)
    path = write_metrics(tmp_path / "run" / "metrics.prom", registry)
    assert "unit_counter_total 2.0" in path.read_text()
