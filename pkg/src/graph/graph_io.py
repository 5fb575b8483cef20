"""
Graph file reader and writer.

Format: '#' comment lines, a header `n <count>`, then one `u v w` line per undirected
edge (0-based, `u u w` for a self-loop). Duplicate edge lines are summed.
"""

import logging
import math
from pathlib import Path
from typing import Union

import numpy as np

from src.errors import GraphParseError
from src.graph.core import WeightedGraph

logger = logging.getLogger(__name__)


def parse_graph(text: str, name: str = "") -> WeightedGraph:
    weights = None
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if weights is None:
            if len(fields) != 2 or fields[0] != "n":
                raise GraphParseError(f"expected header 'n <count>', got {line!r}", line_no)
            try:
                count = int(fields[1])
            except ValueError:
                raise GraphParseError(f"vertex count {fields[1]!r} is not an integer", line_no)
            if count < 1:
                raise GraphParseError(f"vertex count must be positive, got {count}", line_no)
            weights = np.zeros((count, count))
            continue

        if len(fields) != 3:
            raise GraphParseError(f"expected 'u v w', got {line!r}", line_no)
        try:
            u, v = int(fields[0]), int(fields[1])
            w = float(fields[2])
        except ValueError:
            raise GraphParseError(f"cannot parse edge {line!r}", line_no)
        n = weights.shape[0]
        if not (0 <= u < n and 0 <= v < n):
            raise GraphParseError(f"vertex index out of range 0..{n - 1} in {line!r}", line_no)
        if not math.isfinite(w):
            raise GraphParseError(f"weight {fields[2]!r} is not finite", line_no)
        if w < 0:
            raise GraphParseError(f"negative weight {w:g}", line_no)
        weights[u, v] += w
        if u != v:
            weights[v, u] += w

    if weights is None:
        raise GraphParseError("missing header 'n <count>'")
    return WeightedGraph(weights, name=name)


def format_graph(graph: WeightedGraph) -> str:
    lines = []
    if graph.name:
        lines.append(f"# {graph.name}")
    lines.append(f"n {graph.n}")
    for u, v, w in graph.edges():
        lines.append(f"{u} {v} {w!r}")
    return "\n".join(lines) + "\n"


def read_graph_file(path: Union[str, Path]) -> WeightedGraph:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    graph = parse_graph(text, name=path.stem)
    logger.info("read %s: n=%d, %d edges", path, graph.n, len(graph.edges()))
    return graph


def write_graph_file(graph: WeightedGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_graph(graph), encoding="utf-8")
    logger.info("wrote %s", path)
    return path
