"""Configuration management."""

from .loader import (
    get_default_config,
    load_config,
    load_config_with_warnings,
    save_config,
    update_config,
    user_config_path,
)

__all__ = [
    "get_default_config",
    "load_config",
    "load_config_with_warnings",
    "save_config",
    "update_config",
    "user_config_path",
]
