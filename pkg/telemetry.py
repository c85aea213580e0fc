import os
import sys

from opentelemetry import trace
from opentelemetry.sdk.resources import Resource
from opentelemetry.sdk.trace import TracerProvider
from opentelemetry.sdk.trace.export import BatchSpanProcessor, ConsoleSpanExporter

OTLP_ENDPOINT_ENV = "LIMCOLIM_OTLP_ENDPOINT"

_configured = False


# --- Telemetry Setup ---
def setup_telemetry(service_name: str, endpoint: str | None = None, console: bool = False) -> bool:
    """Configures OpenTelemetry tracing for the CLI or benchmark process.

    Spans go to an OTLP collector when an endpoint is given (argument or
    LIMCOLIM_OTLP_ENDPOINT) and to stderr when `console` is set. With neither,
    nothing is installed and the library keeps using the no-op tracer.
    Returns True when a provider was installed.
    """
    global _configured
    if _configured:
        return True

    endpoint = endpoint or os.environ.get(OTLP_ENDPOINT_ENV)
    if not endpoint and not console:
        return False

    resource = Resource(attributes={"service.name": service_name})
    provider = TracerProvider(resource=resource)
    if endpoint:
        # Imported lazily: the exporter pulls in grpc.
        from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter
        provider.add_span_processor(BatchSpanProcessor(OTLPSpanExporter(endpoint=endpoint, insecure=True)))
    if console:
        provider.add_span_processor(BatchSpanProcessor(ConsoleSpanExporter(out=sys.stderr)))
    trace.set_tracer_provider(provider)
    _configured = True
    return True


def shutdown_telemetry():
    """Flushes pending spans before the process exits."""
    provider = trace.get_tracer_provider()
    shutdown = getattr(provider, "shutdown", None)
    if shutdown is not None:
        shutdown()
