"""
Graph battery for the verification suite.

Presets come from config/batteries/*.json through the config loader, the same way
named presets are resolved everywhere else in the project.
"""

import logging
from typing import Dict, List, NamedTuple, Optional

from src.config_loader import ConfigLoader, get_config
from src.errors import UsageError
from src.graph.core import WeightedGraph
from src.graph.generators import generate_from_spec

logger = logging.getLogger(__name__)


class BatteryGraph(NamedTuple):
    name: str
    graph: WeightedGraph
    spec: Dict


def spec_label(spec: Dict) -> str:
    params = ",".join(f"{k}={v}" for k, v in sorted(spec.items()) if k != "family")
    return f"{spec.get('family', '?')}({params})"


def load_battery(preset: Optional[str] = None, config: Optional[ConfigLoader] = None) -> List[BatteryGraph]:
    config = config or get_config()
    preset = preset or config.get("verify.battery", "all")
    specs = config.get_battery(preset)
    if specs is None:
        available = ", ".join(config.get_all_batteries()) or "none"
        raise UsageError(f"unknown battery preset {preset!r} (available: {available})")
    battery = []
    for spec in specs:
        graph = generate_from_spec(spec)
        battery.append(BatteryGraph(spec_label(spec), graph, dict(spec)))
    logger.info("loaded battery %r with %d graphs", preset, len(battery))
    return battery


def regular(battery: List[BatteryGraph], max_n: int = 10) -> List[BatteryGraph]:
    return [entry for entry in battery if entry.graph.regular_unit and entry.graph.n <= max_n]


def lazy(battery: List[BatteryGraph], max_n: int = 10) -> List[BatteryGraph]:
    return [entry for entry in regular(battery, max_n) if entry.graph.lazy]
