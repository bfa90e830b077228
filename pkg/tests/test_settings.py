from __future__ import annotations

import json
from pathlib import Path

import pytest

from loopwitness.settings import SETTINGS_ENV, SettingsStore, ToolSettings, default_settings_path


def test_missing_file_gives_defaults(tmp_path: Path) -> None:
    store = SettingsStore(tmp_path / "settings.json")
    assert not store.exists()
    assert store.load() == ToolSettings()


def test_save_then_load(tmp_path: Path) -> None:
    store = SettingsStore(tmp_path / "nested" / "settings.json")
    store.save(ToolSettings(oracle_bound=6, default_delta=-1, json_output=True, certificate_suffix=".proof.json"))
    assert json.loads(store.path.read_text(encoding="utf-8"))["oracle_bound"] == 6
    assert store.load() == ToolSettings(6, -1, True, ".proof.json")


def test_invalid_values_fall_back_per_field(tmp_path: Path) -> None:
    path = tmp_path / "settings.json"
    path.write_text(
        json.dumps({"oracle_bound": -3, "default_delta": 2, "json_output": True, "certificate_suffix": " "}),
        encoding="utf-8",
    )
    assert SettingsStore(path).load() == ToolSettings(json_output=True)


def test_unreadable_file_is_ignored(tmp_path: Path, caplog: pytest.LogCaptureFixture) -> None:
    path = tmp_path / "settings.json"
    path.write_text("{broken", encoding="utf-8")
    assert SettingsStore(path).load() == ToolSettings()
    assert "Ignoring unreadable settings file" in caplog.text


def test_environment_overrides_location(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    target = tmp_path / "elsewhere.json"
    monkeypatch.setenv(SETTINGS_ENV, str(target))
    assert default_settings_path() == target
    assert SettingsStore().path == target
    monkeypatch.delenv(SETTINGS_ENV)
    assert default_settings_path().name == "settings.json"
