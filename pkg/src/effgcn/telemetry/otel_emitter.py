"""OpenTelemetry spans for CLI verbs, training epochs and server tools.

Falls back to a no-op that still hands out trace/span ids when the
``telemetry`` extra is not installed.
"""

import uuid
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Generator, Optional

try:
    from opentelemetry import trace
    from opentelemetry.sdk.resources import Resource
    from opentelemetry.sdk.trace import TracerProvider
    from opentelemetry.sdk.trace.export import ConsoleSpanExporter, SimpleSpanProcessor
    from opentelemetry.trace import Status, StatusCode
    OTEL_AVAILABLE = True
except ImportError:
    OTEL_AVAILABLE = False


SERVICE_NAME = "effgcn"


@dataclass
class TraceContext:
    """Ids and the live span (None without OpenTelemetry) of a traced operation."""

    trace_id: str
    span_id: str
    operation: str
    started_at: datetime = field(default_factory=lambda: datetime.now(timezone.utc))
    span: Optional[Any] = None

    def to_dict(self) -> dict:
        return {
            "trace_id": self.trace_id,
            "span_id": self.span_id,
            "operation": self.operation,
            "started_at": self.started_at.isoformat(),
        }


def create_tracer(service_name: str = SERVICE_NAME, enable_console: bool = False) -> Optional[Any]:
    """Tracer on a fresh provider, or None when OpenTelemetry is missing."""
    if not OTEL_AVAILABLE:
        return None
    from effgcn import __version__
    provider = TracerProvider(resource=Resource.create({
        "service.name": service_name,
        "service.version": __version__,
    }))
    if enable_console:
        provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter()))
    trace.set_tracer_provider(provider)
    return trace.get_tracer(service_name)


class OTelEmitter:
    """Wraps operations in spans named ``effgcn.<operation>``."""

    ATTR_OPERATION = "effgcn.operation"
    ATTR_EPOCH = "effgcn.train.epoch"
    ATTR_LR = "effgcn.train.lr"
    ATTR_LOSS = "effgcn.train.loss"
    ATTR_ACCURACY = "effgcn.train.accuracy"

    def __init__(self, service_name: str = SERVICE_NAME, enable_console: bool = False):
        self.service_name = service_name
        self.tracer = create_tracer(service_name, enable_console)
        self._enabled = OTEL_AVAILABLE and self.tracer is not None

    @property
    def enabled(self) -> bool:
        return self._enabled

    @contextmanager
    def trace_operation(self, operation: str, **attributes) -> Generator[TraceContext, None, None]:
        """Span around one operation; exceptions mark the span as failed and propagate."""
        context = TraceContext(
            trace_id=uuid.uuid4().hex,
            span_id=uuid.uuid4().hex[:16],
            operation=operation,
        )
        if not self._enabled:
            yield context
            return

        with self.tracer.start_as_current_span(f"{self.service_name}.{operation}") as span:
            context.span = span
            span.set_attribute(self.ATTR_OPERATION, operation)
            for key, value in attributes.items():
                if isinstance(value, (str, bool, int, float)):
                    span.set_attribute(f"{self.service_name}.{key}", value)
            try:
                yield context
                span.set_status(Status(StatusCode.OK))
            except Exception as e:
                span.set_status(Status(StatusCode.ERROR, str(e)))
                span.record_exception(e)
                raise

    def record_epoch(self, context: TraceContext, epoch: int, lr: float, loss: float, accuracy: float):
        if not self._enabled or context.span is None:
            return
        context.span.set_attribute(self.ATTR_EPOCH, epoch)
        context.span.set_attribute(self.ATTR_LR, float(lr))
        context.span.set_attribute(self.ATTR_LOSS, float(loss))
        context.span.set_attribute(self.ATTR_ACCURACY, float(accuracy))


_global_emitter: Optional[OTelEmitter] = None


def get_emitter() -> OTelEmitter:
    global _global_emitter
    if _global_emitter is None:
        _global_emitter = OTelEmitter()
    return _global_emitter


def configure_emitter(service_name: str = SERVICE_NAME, enable_console: bool = False) -> OTelEmitter:
    global _global_emitter
    _global_emitter = OTelEmitter(service_name=service_name, enable_console=enable_console)
    return _global_emitter
