"""Layered configuration: defaults, user file, project file."""

import json
import os
from pathlib import Path
from typing import Any, Optional


DEFAULT_CONFIG_DIR = Path.home() / ".effgcn"
DEFAULT_CONFIG_PATH = DEFAULT_CONFIG_DIR / "config.json"
PROJECT_CONFIG_NAME = ".effgcn.json"
CONFIG_PATH_ENV = "EFFGCN_CONFIG"

# Key -> accepted types. None is allowed for keys defaulting to None.
_SCHEMA: dict[str, tuple[type, ...]] = {
    "alpha": (int, float),
    "beta": (int, float),
    "layer": (str,),
    "ratio": (int, float, type(None)),
    "max_distance": (int,),
    "kernel": (int,),
    "attention": (str,),
    "epochs": (int,),
    "base_lr": (int, float),
    "warmup_epochs": (int,),
    "momentum": (int, float),
    "weight_decay": (int, float),
    "dropout": (int, float),
    "batch_size": (int,),
    "seed": (int,),
    "bodies": (int,),
    "audit_log_path": (str, type(None)),
}


def get_default_config() -> dict[str, Any]:
    """Built-in defaults for every configuration key."""
    return {
        "alpha": 1.2,
        "beta": 1.35,
        "layer": "sg",
        "ratio": None,
        "max_distance": 2,
        "kernel": 5,
        "attention": "st_joint",
        "epochs": 70,
        "base_lr": 0.1,
        "warmup_epochs": 10,
        "momentum": 0.9,
        "weight_decay": 1e-4,
        "dropout": 0.25,
        "batch_size": 16,
        "seed": 0,
        "bodies": 2,
        "audit_log_path": None,
    }


def user_config_path() -> Path:
    override = os.environ.get(CONFIG_PATH_ENV)
    return Path(override).expanduser() if override else DEFAULT_CONFIG_PATH


def _merge_file(config: dict[str, Any], path: Path, label: str, warnings: list[str]) -> None:
    try:
        with open(path) as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        warnings.append(f"{label} config malformed ({path}): {e}")
        return
    except OSError as e:
        warnings.append(f"{label} config unreadable ({path}): {e}")
        return
    if not isinstance(data, dict):
        warnings.append(f"{label} config ({path}) must hold a JSON object")
        return
    for key, value in data.items():
        if key not in _SCHEMA:
            warnings.append(f"{label} config ({path}): unknown key '{key}' ignored")
        elif isinstance(value, bool) or not isinstance(value, _SCHEMA[key]):
            warnings.append(
                f"{label} config ({path}): '{key}' has invalid value {value!r}, keeping "
                f"{config[key]!r}")
        else:
            config[key] = value


def load_config_with_warnings(
    config_path: Path | str | None = None,
    project_dir: Path | str | None = None,
) -> tuple[dict[str, Any], list[str]]:
    """Merge defaults, the user file and the project's ``.effgcn.json``.

    Malformed files and invalid values are skipped with a warning.

    Args:
        config_path: User config file; ``$EFFGCN_CONFIG`` or
            ``~/.effgcn/config.json`` when omitted.
        project_dir: Directory holding ``.effgcn.json``; the working
            directory when omitted.

    Returns:
        Tuple of (config, warnings).
    """
    path = Path(config_path) if config_path else user_config_path()
    warnings: list[str] = []
    config = get_default_config()

    if path.exists():
        _merge_file(config, path, "User", warnings)

    project_path = Path(project_dir or Path.cwd()) / PROJECT_CONFIG_NAME
    if project_path.exists() and project_path.resolve() != path.resolve():
        _merge_file(config, project_path, "Project", warnings)

    return config, warnings


def load_config(
    config_path: Path | str | None = None,
    project_dir: Path | str | None = None,
) -> dict[str, Any]:
    config, _ = load_config_with_warnings(config_path, project_dir)
    return config


def save_config(config: dict[str, Any], config_path: Path | str | None = None) -> Path:
    path = Path(config_path) if config_path else user_config_path()
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(config, f, indent=2)
    return path


def update_config(
    updates: dict[str, Any],
    config_path: Optional[Path | str] = None,
) -> dict[str, Any]:
    """Validate ``updates`` and persist them into the user config file.

    Raises:
        KeyError: On an unknown key.
        TypeError: On a value of the wrong type.
    """
    for key, value in updates.items():
        if key not in _SCHEMA:
            raise KeyError(f"Unknown config key: {key}")
        if isinstance(value, bool) or not isinstance(value, _SCHEMA[key]):
            raise TypeError(f"Invalid value for {key}: {value!r}")
    path = Path(config_path) if config_path else user_config_path()
    stored: dict[str, Any] = {}
    if path.exists():
        try:
            stored = json.loads(path.read_text())
        except json.JSONDecodeError:
            stored = {}
    stored.update(updates)
    save_config(stored, path)
    merged = get_default_config()
    merged.update({k: v for k, v in stored.items() if k in _SCHEMA})
    return merged
