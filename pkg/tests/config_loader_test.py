import json

import pytest

from src.config_loader import ConfigLoader, get_config, reset_config


def test_defaults_come_from_the_repository_config():
    config = get_config()
    assert config.get("graph.max_n") == 24
    assert config.get("verify.hypercube.k") == 8
    assert config.get("missing.key", "fallback") == "fallback"


def test_environment_overrides(monkeypatch):
    monkeypatch.setenv("SPEXLAB_MAX_N", "12")
    monkeypatch.setenv("SPEXLAB_OUTPUT_FORMAT", "csv")
    config = reset_config()
    assert config.get("graph.max_n") == 12
    assert config.get("output.format") == "csv"


def test_personal_config_is_merged(tmp_path):
    (tmp_path / "default_config.yaml").write_text("graph:\n  max_n: 24\n  dense_max_n: 4096\n")
    (tmp_path / "config.yaml").write_text("graph:\n  max_n: 10\n")
    config = ConfigLoader(str(tmp_path))
    assert config.get("graph.max_n") == 10
    assert config.get("graph.dense_max_n") == 4096


def test_broken_yaml_falls_back_to_empty(tmp_path):
    (tmp_path / "default_config.yaml").write_text("graph: [unclosed\n")
    assert ConfigLoader(str(tmp_path)).get("graph.max_n", 24) == 24


def test_all_battery_combines_presets(tmp_path):
    batteries = tmp_path / "batteries"
    batteries.mkdir()
    (batteries / "a.json").write_text(json.dumps({
        "small": {"graphs": [{"family": "cycle", "n": 4}, {"family": "complete", "n": 4}]},
    }))
    (batteries / "b.json").write_text(json.dumps({
        "more": {"graphs": [{"n": 4, "family": "cycle"}, {"family": "path", "n": 5}]},
        "bare": [{"family": "complete", "n": 2}],
    }))
    config = ConfigLoader(str(tmp_path))
    assert config.get_all_batteries() == ["small", "more", "bare", "all"]
    assert config.get_battery("all") == [
        {"family": "cycle", "n": 4},
        {"family": "complete", "n": 4},
        {"family": "path", "n": 5},
    ]
    assert config.get_battery("bare") == [{"family": "complete", "n": 2}]
    assert config.get_battery("absent") is None


def test_set_overrides_nested_keys():
    config = get_config()
    config.set("graph.max_n", 30)
    config.set("new.section.value", True)
    assert config.get("graph.max_n") == 30
    assert config.get("new.section.value") is True


@pytest.mark.parametrize("raw, value", [("12", 12), ("0.5", 0.5), ("true", True), ("json", "json")])
def test_environment_values_are_coerced(raw, value):
    assert ConfigLoader._coerce(raw) == value
