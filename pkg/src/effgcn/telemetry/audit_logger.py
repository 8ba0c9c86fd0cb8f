"""Append-only JSON Lines audit trail for CLI verbs, training epochs and tool calls."""

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Optional


AUDIT_LOG_ENV = "EFFGCN_AUDIT_LOG"


@dataclass
class AuditEntry:
    """A single audit log line."""

    timestamp: datetime
    trace_id: str
    action: str
    status: str = "ok"
    run_id: Optional[str] = None
    duration_ms: Optional[int] = None
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        result = {
            "timestamp": self.timestamp.isoformat(),
            "trace_id": self.trace_id,
            "action": self.action,
            "status": self.status,
            "metadata": self.metadata,
        }
        if self.run_id:
            result["run_id"] = self.run_id
        if self.duration_ms is not None:
            result["duration_ms"] = self.duration_ms
        return result

    def to_log_line(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), default=_json_default)

    @classmethod
    def from_dict(cls, data: dict) -> "AuditEntry":
        return cls(
            timestamp=datetime.fromisoformat(data["timestamp"]),
            trace_id=data["trace_id"],
            action=data["action"],
            status=data.get("status", "ok"),
            run_id=data.get("run_id"),
            duration_ms=data.get("duration_ms"),
            metadata=data.get("metadata", {}),
        )


def _json_default(value: Any) -> Any:
    # numpy scalars and paths show up in metadata
    if hasattr(value, "item"):
        return value.item()
    return str(value)


def default_log_path() -> Path:
    """``$EFFGCN_AUDIT_LOG`` when set, else ``~/.effgcn/audit.log``."""
    override = os.environ.get(AUDIT_LOG_ENV)
    if override:
        return Path(override).expanduser()
    return Path.home() / ".effgcn" / "audit.log"


class AuditLogger:
    """Thread-safe append-only logger with size-based rotation.

    Rotated files are named ``audit.log.1`` .. ``audit.log.N`` with 1 the
    oldest; at most ``MAX_ROTATIONS`` are kept.
    """

    MAX_LOG_SIZE_BYTES = 10 * 1024 * 1024
    MAX_ROTATIONS = 10

    def __init__(self, log_path: Optional[Path | str] = None, max_log_size: int = MAX_LOG_SIZE_BYTES):
        self.log_path = Path(log_path) if log_path else default_log_path()
        self.max_log_size = max_log_size
        self._lock = threading.Lock()
        self.log_path.parent.mkdir(parents=True, exist_ok=True)
        self.log_path.touch(exist_ok=True)

    def _rotated(self, n: int) -> Path:
        return self.log_path.with_name(f"{self.log_path.name}.{n}")

    def _rotate_if_needed(self):
        try:
            if self.log_path.stat().st_size <= self.max_log_size:
                return
            existing = [n for n in range(1, self.MAX_ROTATIONS + 1) if self._rotated(n).exists()]
            if len(existing) >= self.MAX_ROTATIONS:
                self._rotated(1).unlink()
                for n in range(2, self.MAX_ROTATIONS + 1):
                    if self._rotated(n).exists():
                        self._rotated(n).rename(self._rotated(n - 1))
                target = self._rotated(self.MAX_ROTATIONS)
            else:
                target = self._rotated(len(existing) + 1)
            self.log_path.rename(target)
            self.log_path.touch()
        except OSError:
            pass  # never fail a run over log housekeeping

    def log(
        self,
        action: str,
        trace_id: Optional[str] = None,
        status: str = "ok",
        run_id: Optional[str] = None,
        duration_ms: Optional[int] = None,
        **metadata,
    ) -> AuditEntry:
        """Append one entry.

        Args:
            action: What happened, e.g. ``cli:profile`` or ``train:epoch``.
            trace_id: Correlation id; generated when omitted.
            status: ``ok`` or ``error``.
            run_id: Groups the epochs of one training run.
            duration_ms: Wall time of the action.
            **metadata: JSON-serializable details.
        """
        entry = AuditEntry(
            timestamp=datetime.now(timezone.utc),
            trace_id=trace_id or uuid.uuid4().hex,
            action=action,
            status=status,
            run_id=run_id,
            duration_ms=duration_ms,
            metadata=metadata,
        )
        with self._lock:
            self._rotate_if_needed()
            with open(self.log_path, "a") as f:
                f.write(entry.to_log_line() + "\n")
        return entry

    def log_cli_call(self, verb: str, exit_code: int, duration_ms: int, **arguments) -> AuditEntry:
        return self.log(
            action=f"cli:{verb}",
            status="ok" if exit_code == 0 else "error",
            duration_ms=duration_ms,
            exit_code=exit_code,
            **arguments,
        )

    def log_epoch(
        self,
        run_id: str,
        epoch: int,
        lr: float,
        loss: float,
        accuracy: float,
        **extra,
    ) -> AuditEntry:
        return self.log(
            action="train:epoch",
            run_id=run_id,
            epoch=epoch,
            lr=lr,
            loss=loss,
            accuracy=accuracy,
            **extra,
        )

    def log_tool_call(self, tool_name: str, result: dict, duration_ms: Optional[int] = None) -> AuditEntry:
        return self.log(
            action=f"tool:{tool_name}",
            status="error" if "error" in result else "ok",
            duration_ms=duration_ms,
            error=result.get("error"),
        )

    def _read_entries(self) -> list[AuditEntry]:
        if not self.log_path.exists():
            return []
        entries = []
        with open(self.log_path) as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                try:
                    entries.append(AuditEntry.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError):
                    continue
        return entries

    def get_recent_entries(self, limit: int = 100) -> list[AuditEntry]:
        """Last ``limit`` entries of the current file, oldest first."""
        return self._read_entries()[-limit:]

    def get_entries_for_run(self, run_id: str) -> list[AuditEntry]:
        return [e for e in self._read_entries() if e.run_id == run_id]

    def get_failures(self, limit: int = 50) -> list[AuditEntry]:
        return [e for e in self._read_entries() if e.status != "ok"][:limit]


_global_logger: Optional[AuditLogger] = None


def get_audit_logger() -> AuditLogger:
    """Process-wide logger, created on first use."""
    global _global_logger
    if _global_logger is None:
        _global_logger = AuditLogger()
    return _global_logger


def configure_audit_logger(log_path: Optional[Path | str] = None) -> AuditLogger:
    global _global_logger
    _global_logger = AuditLogger(log_path=log_path)
    return _global_logger


def reset_audit_logger() -> None:
    """Drop the global logger so the next use re-reads the environment."""
    global _global_logger
    _global_logger = None
