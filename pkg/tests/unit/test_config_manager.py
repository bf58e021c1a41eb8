import json

import pytest
import yaml

from hyperwitness.config.config_manager import DEFAULT_TABLE_DIR, ConfigManager
from hyperwitness.utils.error_handling import ConfigurationError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    monkeypatch.delenv("HYPERWITNESS_TABLE_DIR", raising=False)
    monkeypatch.delenv("HYPERWITNESS_LOG_LEVEL", raising=False)


def test_defaults():
    config = ConfigManager()
    assert config.get_value("noise", "threshold_tolerance") == 1e-6
    assert config.get_value("fringe", "wavelength_um") == 0.728
    assert config.table_directory() == DEFAULT_TABLE_DIR
    assert config.default_table_path().name == "vallone2009_table1.json"
    assert config.default_table_path().exists()


def test_defaults_validate():
    result = ConfigManager().validate_config()
    assert result["valid"], result["issues"]
    assert result["sections_count"] == 5


def test_yaml_file_is_merged(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({"noise": {"sweep_workers": 2}}))
    config = ConfigManager(str(path))
    assert config.get_value("noise", "sweep_workers") == 2
    assert config.get_value("noise", "threshold_tolerance") == 1e-6


def test_json_file_is_merged(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"fringe": {"baseline": 250.0}}))
    assert ConfigManager(str(path)).get_value("fringe", "baseline") == 250.0


def test_broken_file_falls_back_to_defaults(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text("- just\n- a list\n")
    config = ConfigManager(str(path))
    assert config.get_all_config() == config.default_configs


def test_missing_file_uses_defaults(tmp_path):
    config = ConfigManager(str(tmp_path / "absent.yaml"))
    assert config.get_value("numerics", "jacobi_max_sweeps") == 100


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("HYPERWITNESS_TABLE_DIR", str(tmp_path))
    monkeypatch.setenv("HYPERWITNESS_LOG_LEVEL", "DEBUG")
    config = ConfigManager()
    assert config.table_directory() == tmp_path
    assert config.get_value("logging", "level") == "DEBUG"


def test_strict_mode_rejects_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        ConfigManager(str(tmp_path / "absent.yaml"), strict=True)


@pytest.mark.parametrize(
    "name, text",
    [("config.yaml", "- just\n- a list\n"), ("config.yaml", "noise: [unclosed\n"), ("config.toml", "a = 1\n")],
)
def test_strict_mode_rejects_unreadable_file(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    with pytest.raises(ConfigurationError) as info:
        ConfigManager(str(path), strict=True)
    assert info.value.component == "config_file"


def test_strict_mode_accepts_valid_file(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump({"noise": {"sweep_workers": 3}}))
    assert ConfigManager(str(path), strict=True).get_value("noise", "sweep_workers") == 3


def test_validation_reports_bad_values(tmp_path):
    path = tmp_path / "config.yaml"
    path.write_text(
        yaml.safe_dump(
            {
                "noise": {"threshold_tolerance": 0.0, "sweep_workers": 0},
                "tables": {"directory": str(tmp_path / "nowhere")},
            }
        )
    )
    result = ConfigManager(str(path)).validate_config()
    assert not result["valid"]
    assert "noise.threshold_tolerance must lie in (0, 1)" in result["issues"]
    assert "noise.sweep_workers must be a positive integer" in result["issues"]
    assert any("Table directory" in issue for issue in result["issues"])


def test_save_and_reload(tmp_path):
    source = tmp_path / "config.yaml"
    source.write_text(yaml.safe_dump({"noise": {"threshold_tolerance": 1e-8}}))
    config = ConfigManager(str(source))
    path = tmp_path / "saved.yaml"
    assert config.save_config(str(path))
    assert ConfigManager(str(path)).get_value("noise", "threshold_tolerance") == 1e-8
    assert ConfigManager(str(path)).get_all_config() == config.get_all_config()
    assert not config.save_config(str(tmp_path / "saved.txt"))
