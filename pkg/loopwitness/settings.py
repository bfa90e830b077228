"""User-tunable defaults persisted locally."""
from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from loopwitness.constants import DECISION_LIMITS

logger = logging.getLogger(__name__)

SETTINGS_DIRNAME = ".loopwitness"
SETTINGS_FILENAME = "settings.json"
SETTINGS_ENV = "LOOPWITNESS_SETTINGS"


def default_settings_path() -> Path:
    override = os.environ.get(SETTINGS_ENV, "").strip()
    if override:
        return Path(override)
    return Path.home() / SETTINGS_DIRNAME / SETTINGS_FILENAME


@dataclass
class ToolSettings:
    oracle_bound: int = DECISION_LIMITS.oracle_bound
    default_delta: int = 1
    json_output: bool = False
    certificate_suffix: str = ".cert.json"

    def to_dict(self) -> dict[str, Any]:
        return {
            "oracle_bound": self.oracle_bound,
            "default_delta": self.default_delta,
            "json_output": self.json_output,
            "certificate_suffix": self.certificate_suffix,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ToolSettings":
        defaults = cls()

        def _int(key: str, fallback: int) -> int:
            value = data.get(key, fallback)
            return value if isinstance(value, int) and not isinstance(value, bool) and value > 0 else fallback

        delta = data.get("default_delta", defaults.default_delta)
        suffix = data.get("certificate_suffix", defaults.certificate_suffix)
        return cls(
            oracle_bound=_int("oracle_bound", defaults.oracle_bound),
            default_delta=delta if delta in (1, -1) and not isinstance(delta, bool) else defaults.default_delta,
            json_output=bool(data.get("json_output", defaults.json_output)),
            certificate_suffix=suffix if isinstance(suffix, str) and suffix.strip() else defaults.certificate_suffix,
        )


class SettingsStore:
    def __init__(self, path: Path | None = None) -> None:
        self._path = path or default_settings_path()

    @property
    def path(self) -> Path:
        return self._path

    def exists(self) -> bool:
        return self._path.exists()

    def load(self) -> ToolSettings:
        if not self._path.exists():
            return ToolSettings()
        try:
            data = json.loads(self._path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as exc:
            logger.warning("Ignoring unreadable settings file %s: %s", self._path, exc)
            return ToolSettings()
        if not isinstance(data, dict):
            return ToolSettings()
        return ToolSettings.from_dict(data)

    def save(self, settings: ToolSettings) -> None:
        self._path.parent.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(settings.to_dict(), indent=2, sort_keys=True)
        self._path.write_text(payload, encoding="utf-8")
