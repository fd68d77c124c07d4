"""Load and validate the configuration presets and golden values."""

import json
from pathlib import Path

from pydantic import ValidationError

from .exceptions import PresetError
from .models import ConfigurationPreset, PresetsConfig


class PresetReader:
    """Loads presets from JSON files."""

    @staticmethod
    def read(presets_path: str | Path) -> PresetsConfig:
        path = Path(presets_path)

        if not path.exists():
            raise PresetError(f"Presets file not found: {path}")

        try:
            with open(path, 'r', encoding='utf-8') as f:
                raw_data = json.load(f)

            return PresetsConfig(**raw_data)

        except json.JSONDecodeError as e:
            raise PresetError(f"Invalid JSON in presets file: {e}")

        except ValidationError as e:
            raise PresetError(f"Presets validation failed: {e}")

    @staticmethod
    def configuration(presets: PresetsConfig, name: str) -> ConfigurationPreset:
        if name not in presets.configurations:
            known = ", ".join(sorted(presets.configurations))
            raise PresetError(f"Unknown configuration '{name}' (known: {known})")
        return presets.configurations[name]


def resolve_path(relative: str, presets_path: str | Path) -> Path:
    """Data paths in presets are relative to the project root."""
    path = Path(relative)
    if path.is_absolute():
        return path
    return Path(presets_path).resolve().parent.parent / path
