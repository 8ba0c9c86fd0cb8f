"""Tests for layered configuration loading."""

import json

import pytest

from effgcn.config import (
    get_default_config,
    load_config,
    load_config_with_warnings,
    save_config,
    update_config,
    user_config_path,
)


class TestDefaults:
    def test_model_defaults(self):
        config = get_default_config()
        assert config["alpha"] == 1.2
        assert config["beta"] == 1.35
        assert config["layer"] == "sg"
        assert config["max_distance"] == 2
        assert config["kernel"] == 5

    def test_training_defaults(self):
        config = get_default_config()
        assert config["epochs"] == 70
        assert config["warmup_epochs"] == 10
        assert config["base_lr"] == 0.1
        assert config["momentum"] == 0.9
        assert config["weight_decay"] == 1e-4
        assert config["batch_size"] == 16

    def test_missing_file_gives_defaults(self, tmp_path):
        config, warnings = load_config_with_warnings(tmp_path / "absent.json")
        assert config == get_default_config()
        assert warnings == []

    def test_loading_does_not_create_file(self, isolated_environment):
        load_config()
        assert not (isolated_environment / "config.json").exists()


class TestLayering:
    """Defaults, then the user file, then the project file."""

    def test_user_file(self, isolated_environment):
        (isolated_environment / "config.json").write_text(json.dumps({"epochs": 30}))
        assert load_config()["epochs"] == 30

    def test_project_file_wins(self, isolated_environment, tmp_path):
        (isolated_environment / "config.json").write_text(json.dumps({"kernel": 7, "seed": 3}))
        (tmp_path / ".effgcn.json").write_text(json.dumps({"kernel": 9}))
        config = load_config()
        assert config["kernel"] == 9
        assert config["seed"] == 3

    def test_explicit_project_dir(self, tmp_path):
        project = tmp_path / "proj"
        project.mkdir()
        (project / ".effgcn.json").write_text(json.dumps({"layer": "epsep"}))
        assert load_config(project_dir=project)["layer"] == "epsep"

    def test_env_path(self, isolated_environment):
        assert user_config_path() == isolated_environment / "config.json"


class TestWarnings:
    def test_malformed_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{oops")
        config, warnings = load_config_with_warnings(path)
        assert config == get_default_config()
        assert len(warnings) == 1
        assert "malformed" in warnings[0]

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"width": 2, "kernel": 3}))
        config, warnings = load_config_with_warnings(path)
        assert config["kernel"] == 3
        assert "unknown key 'width'" in warnings[0]

    @pytest.mark.parametrize("key,value", [
        ("kernel", "5"),
        ("epochs", 2.5),
        ("seed", True),
        ("layer", 3),
    ])
    def test_invalid_value_keeps_default(self, tmp_path, key, value):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({key: value}))
        config, warnings = load_config_with_warnings(path)
        assert config[key] == get_default_config()[key]
        assert "invalid value" in warnings[0]

    def test_non_object(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("3")
        _, warnings = load_config_with_warnings(path)
        assert "JSON object" in warnings[0]


class TestUpdate:
    def test_update_persists(self, isolated_environment):
        merged = update_config({"layer": "bottle", "ratio": 4})
        assert merged["layer"] == "bottle"
        assert merged["kernel"] == 5
        stored = json.loads((isolated_environment / "config.json").read_text())
        assert stored == {"layer": "bottle", "ratio": 4}
        merged = update_config({"kernel": 9})
        assert merged["layer"] == "bottle"
        assert merged["kernel"] == 9

    def test_update_rejects_unknown_key(self):
        with pytest.raises(KeyError):
            update_config({"width": 2})

    def test_update_rejects_bad_type(self):
        with pytest.raises(TypeError):
            update_config({"kernel": "7"})
        with pytest.raises(TypeError):
            update_config({"seed": False})

    def test_update_recovers_from_corrupt_file(self, isolated_environment):
        (isolated_environment / "config.json").write_text("{bad")
        assert update_config({"seed": 4})["seed"] == 4

    def test_save_creates_directories(self, tmp_path):
        path = save_config({"seed": 1}, tmp_path / "a" / "b" / "config.json")
        assert json.loads(path.read_text()) == {"seed": 1}
