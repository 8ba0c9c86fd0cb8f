"""Shared fixtures: keep every test away from the real home directory."""

import pytest

from effgcn.telemetry.audit_logger import reset_audit_logger


@pytest.fixture(autouse=True)
def isolated_environment(tmp_path, monkeypatch):
    """Point the audit log and user config into a per-test directory."""
    home = tmp_path / "home"
    home.mkdir()
    monkeypatch.setenv("EFFGCN_AUDIT_LOG", str(home / "audit.log"))
    monkeypatch.setenv("EFFGCN_CONFIG", str(home / "config.json"))
    monkeypatch.chdir(tmp_path)
    reset_audit_logger()
    yield home
    reset_audit_logger()
