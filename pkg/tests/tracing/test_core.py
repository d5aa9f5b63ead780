import pytest
from opentelemetry.sdk.trace import TracerProvider, sampling
from opentelemetry.sdk.trace.export import BatchSpanProcessor, SimpleSpanProcessor

from inpaint360.settings import Inpaint360Settings
from inpaint360.tracing import get_tracer, setup_tracer, setup_tracer_from_settings, shutdown_tracing
from inpaint360.tracing.core import _compose_grpc_endpoint, _compose_http_endpoint, _get_sampler


def test_setup_tracer_without_exporter():
    provider = setup_tracer(service_name="unittest-inpaint360", exporter="none")
    assert isinstance(provider, TracerProvider)
    assert provider.resource.attributes["service.namespace"] == "inpaint360"
    assert provider.resource.attributes["deployment.environment"] == "dev"


def test_console_exporter_attaches_a_processor():
    provider = setup_tracer(service_name="svc", exporter="console")
    processors = provider._active_span_processor._span_processors
    assert any(isinstance(p, SimpleSpanProcessor) for p in processors)


def test_unknown_exporter_rejected():
    with pytest.raises(ValueError):
        setup_tracer(service_name="svc", exporter="zipkin")


def test_from_settings_uses_composed_name():
    provider = setup_tracer_from_settings(Inpaint360Settings(environment="unittest", trace_exporter="none"))
    assert provider.resource.attributes["service.name"] == "unittest-inpaint360"


def test_samplers():
    assert _get_sampler("always_off", 1.0) is sampling.ALWAYS_OFF
    assert _get_sampler("unknown", 1.0) is sampling.ALWAYS_ON
    assert isinstance(_get_sampler("traceidratio", 2.0), sampling.ParentBased)


def test_endpoints():
    assert _compose_grpc_endpoint("collector", 4317) == "collector:4317"
    assert _compose_http_endpoint("collector", 4318, encrypted=True) == "https://collector:4318/v1/traces"
    with pytest.raises(ValueError):
        _compose_grpc_endpoint(None, 4317)


def test_tracer_and_shutdown_do_not_raise():
    with get_tracer("unit").start_as_current_span("unit.span"):
        pass
    shutdown_tracing()


def test_otlp_exporter_uses_a_batch_processor():
    provider = setup_tracer(
        service_name="svc", exporter="otlp", otlp_exporter_protocol="http", otlp_exporter_host="collector", otlp_exporter_port=4318
    )
    try:
        processors = provider._active_span_processor._span_processors
        assert any(isinstance(p, BatchSpanProcessor) for p in processors)
    finally:
        provider.shutdown()


def test_unknown_otlp_protocol_rejected():
    with pytest.raises(ValueError):
        setup_tracer(service_name="svc", exporter="otlp", otlp_exporter_protocol="thrift")
