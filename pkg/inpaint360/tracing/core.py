import logging
from typing import Callable, Dict, Optional

from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter as OTLPSpanGrpcExporter
from opentelemetry.exporter.otlp.proto.http.trace_exporter import OTLPSpanExporter as OTLPSpanHttpExporter
from opentelemetry.sdk.resources import SERVICE_NAME, SERVICE_VERSION, Resource
from opentelemetry.sdk.trace import SpanProcessor, TracerProvider, sampling
from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter, SimpleSpanProcessor, SpanExporter
from opentelemetry.semconv.resource import ResourceAttributes
from opentelemetry.trace import set_tracer_provider

from inpaint360.settings import TRACE_EXPORTERS, Inpaint360Settings

logger = logging.getLogger("inpaint360.tracing.core")

_TRACES_PATH = "/v1/traces"

_SAMPLER_ALIASES: Dict[str, str] = {
    "always_on": "on",
    "alwayson": "on",
    "always_off": "off",
    "alwaysoff": "off",
    "traceidratio": "ratio",
    "ratio": "ratio",
    "parentbased_traceidratio": "ratio",
}


def setup_tracer(
    service_name: str,
    service_version: str = "0.1.0",
    deployment_name: Optional[str] = None,
    exporter: str = "none",
    otlp_exporter_protocol: str = "grpc",
    otlp_exporter_host: str = "localhost",
    otlp_exporter_port: int = 4317,
    otlp_exporter_http_encrypted: bool = False,
    sampler: Optional[str] = None,
    sampler_ratio: Optional[float] = None,
) -> TracerProvider:
    """
    Install an OpenTelemetry TracerProvider for a pipeline run.

    ``exporter`` picks where spans go: ``none`` keeps them in-process (spans
    still give log records their trace ids), ``console`` prints them, ``otlp``
    ships them to a collector.
    """
    name = (exporter or "none").strip().lower()
    if name not in TRACE_EXPORTERS:
        raise ValueError(f"unknown trace exporter '{exporter}': use {', '.join(TRACE_EXPORTERS)}")

    provider = TracerProvider(
        sampler=_get_sampler(sampler, 1.0 if sampler_ratio is None else sampler_ratio),
        resource=_get_resource(service_name, service_version, deployment_name),
    )
    processors: Dict[str, Callable[[], Optional[SpanProcessor]]] = {
        "none": lambda: None,
        # synchronous: no flush thread left writing to a closed stdout at exit
        "console": lambda: SimpleSpanProcessor(ConsoleSpanExporter()),
        "otlp": lambda: BatchSpanProcessor(
            _get_otlp_span_exporter(
                otlp_exporter_protocol, otlp_exporter_host, otlp_exporter_port, otlp_exporter_http_encrypted
            )
        ),
    }
    processor = processors[name]()
    if processor is not None:
        provider.add_span_processor(processor)
    set_tracer_provider(provider)
    logger.info("tracing %s v%s with exporter %s", service_name, service_version, name)
    return provider


def setup_tracer_from_settings(settings: Optional[Inpaint360Settings] = None) -> TracerProvider:
    settings = settings or Inpaint360Settings()
    return setup_tracer(
        service_name=settings.service_name_composed,
        service_version=settings.version,
        deployment_name=settings.environment_effective,
        exporter=settings.trace_exporter,
        otlp_exporter_protocol=settings.otlp_exporter_protocol,
        otlp_exporter_host=settings.otlp_exporter_host,
        otlp_exporter_port=settings.otlp_exporter_port,
        otlp_exporter_http_encrypted=settings.otlp_exporter_http_encrypted,
        sampler=settings.trace_sampler,
        sampler_ratio=settings.trace_sampling_ratio,
    )


def _get_resource(service_name: str, service_version: str, deployment_name: Optional[str]) -> Resource:
    return Resource.create(
        {
            SERVICE_NAME: service_name,
            SERVICE_VERSION: service_version,
            ResourceAttributes.SERVICE_NAMESPACE: "inpaint360",
            ResourceAttributes.DEPLOYMENT_ENVIRONMENT: deployment_name or "dev",
        }
    )


def _get_sampler(sampler: Optional[str], ratio: float) -> sampling.Sampler:
    """Unknown sampler names fall back to always-on; ratios are clipped to [0, 1]."""
    kind = _SAMPLER_ALIASES.get((sampler or "always_on").lower(), "on")
    if kind == "off":
        return sampling.ALWAYS_OFF
    if kind == "ratio":
        return sampling.ParentBased(sampling.TraceIdRatioBased(min(1.0, max(0.0, ratio))))
    return sampling.ALWAYS_ON


def _get_otlp_span_exporter(protocol: str, host: Optional[str], port: Optional[int], encrypted: bool) -> SpanExporter:
    protocol = protocol.lower()
    if protocol == "grpc":
        return OTLPSpanGrpcExporter(endpoint=_compose_grpc_endpoint(host, port), insecure=not encrypted)
    if protocol == "http":
        return OTLPSpanHttpExporter(endpoint=_compose_http_endpoint(host, port, encrypted))
    raise ValueError(f"invalid OTLP protocol '{protocol}': use grpc or http")


def _require_address(host: Optional[str], port: Optional[int]) -> str:
    if not host or not port:
        raise ValueError("the OTLP exporter needs both a host and a port")
    return f"{host}:{port}"


def _compose_grpc_endpoint(host: Optional[str], port: Optional[int]) -> str:
    return _require_address(host, port)


def _compose_http_endpoint(host: Optional[str], port: Optional[int], encrypted: bool = False) -> str:
    return f"{'https' if encrypted else 'http'}://{_require_address(host, port)}{_TRACES_PATH}"
