"""Audit trail and tracing."""

from .audit_logger import (
    AUDIT_LOG_ENV,
    AuditEntry,
    AuditLogger,
    configure_audit_logger,
    default_log_path,
    get_audit_logger,
    reset_audit_logger,
)
from .otel_emitter import OTEL_AVAILABLE, OTelEmitter, TraceContext, configure_emitter, get_emitter

__all__ = [
    "AUDIT_LOG_ENV",
    "AuditEntry",
    "AuditLogger",
    "OTEL_AVAILABLE",
    "OTelEmitter",
    "TraceContext",
    "configure_audit_logger",
    "configure_emitter",
    "default_log_path",
    "get_audit_logger",
    "get_emitter",
    "reset_audit_logger",
]
