#!/usr/bin/env python3
"""
Configuration for spexlab

Values are layered, later layers winning:
1. config/default_config.yaml
2. config/config.yaml (personal, gitignored)
3. SPEXLAB_* environment variables, after reading .env through python-dotenv
4. Command line flags, pushed in by the CLI with set()

Graph battery presets are JSON files under config/batteries/.
"""

import json
import logging
import os
from functools import reduce
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import yaml
from dotenv import load_dotenv

logger = logging.getLogger(__name__)

DEFAULT_CONFIG_DIR = Path(__file__).resolve().parent.parent / "config"

# Files merged in order before the environment is applied
CONFIG_LAYERS = ("default_config.yaml", "config.yaml")

ENV_MAPPINGS = {
    'SPEXLAB_MAX_N': 'graph.max_n',
    'SPEXLAB_DENSE_MAX_N': 'graph.dense_max_n',
    'SPEXLAB_LOG_LEVEL': 'logging.level',
    'SPEXLAB_OUTPUT_FORMAT': 'output.format',
    'SPEXLAB_VERIFY_WORKERS': 'verify.workers',
    'SPEXLAB_BATTERY': 'verify.battery',
}

BatterySpec = Dict[str, Any]


def _load_file(path: Path, parse: Callable[[str], Any]) -> Any:
    """Parse a config file, logging and returning {} when it is unreadable."""
    try:
        return parse(path.read_text()) or {}
    except (OSError, ValueError, yaml.YAMLError) as e:
        logger.warning("Ignoring %s: %s", path, e)
        return {}


def merge_layers(lower: Dict, upper: Dict) -> Dict:
    """Recursively overlay upper on lower; nested sections merge, scalars replace."""
    merged = dict(lower)
    for key, value in upper.items():
        below = merged.get(key)
        merged[key] = merge_layers(below, value) if isinstance(below, dict) and isinstance(value, dict) else value
    return merged


class ConfigLoader:
    """Layered settings plus the battery preset table."""

    def __init__(self, config_dir: Optional[str] = None):
        self.config_dir = Path(config_dir) if config_dir else DEFAULT_CONFIG_DIR
        self.config: Dict[str, Any] = {}
        for name in CONFIG_LAYERS:
            path = self.config_dir / name
            if path.exists():
                self.config = merge_layers(self.config, _load_file(path, yaml.safe_load))
        load_dotenv()
        for env_var, key_path in ENV_MAPPINGS.items():
            raw = os.environ.get(env_var)
            if raw is not None:
                logger.debug("%s overrides %s", env_var, key_path)
                self.set(key_path, self._coerce(raw))
        self.batteries = self._collect_batteries()

    def _collect_batteries(self) -> Dict[str, Any]:
        presets: Dict[str, Any] = {}
        directory = self.config_dir / "batteries"
        for path in sorted(directory.glob("*.json")) if directory.is_dir() else ():
            presets.update(_load_file(path, json.loads))

        # 'all' takes each graph once, keyed on its canonical JSON; bare-list presets stay out
        combined: Dict[str, BatterySpec] = {}
        for preset in presets.values():
            if isinstance(preset, dict):
                for graph in preset.get('graphs', []):
                    combined.setdefault(json.dumps(graph, sort_keys=True), graph)
        if combined:
            presets['all'] = {'description': 'Every configured battery graph', 'graphs': list(combined.values())}
        return presets

    def get_battery(self, preset_name: str) -> Optional[List[BatterySpec]]:
        """Graph specs of a preset, or None when the name is unknown."""
        preset = self.batteries.get(preset_name)
        if isinstance(preset, list):
            return preset
        if isinstance(preset, dict):
            return preset.get('graphs')
        return None

    def get_all_batteries(self) -> List[str]:
        return list(self.batteries)

    def get(self, key_path: str, default: Any = None) -> Any:
        """
        Look up a dotted key such as 'graph.max_n'.

        Missing sections and non-dict intermediates give the default.
        """
        missing = object()
        value = reduce(lambda node, key: node.get(key, missing) if isinstance(node, dict) else missing,
                       key_path.split('.'), self.config)
        return default if value is missing else value

    def set(self, key_path: str, value: Any) -> None:
        *parents, leaf = key_path.split('.')
        node = self.config
        for key in parents:
            if not isinstance(node.get(key), dict):
                node[key] = {}
            node = node[key]
        node[leaf] = value

    @staticmethod
    def _coerce(value: str) -> Any:
        """Environment strings become bool, int or float when they parse as one."""
        lowered = value.strip().lower()
        if lowered in ('true', 'false'):
            return lowered == 'true'
        for cast in (int, float):
            try:
                return cast(value)
            except ValueError:
                pass
        return value


_config_instance: Optional[ConfigLoader] = None


def get_config() -> ConfigLoader:
    """Process-wide configuration, loaded on first use."""
    global _config_instance
    if _config_instance is None:
        _config_instance = ConfigLoader()
    return _config_instance


def reset_config(config_dir: Optional[str] = None) -> ConfigLoader:
    """Reload the process-wide configuration, optionally from another directory."""
    global _config_instance
    _config_instance = ConfigLoader(config_dir)
    return _config_instance
