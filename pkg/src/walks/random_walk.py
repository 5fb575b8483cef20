"""
Random walk propagation, mixing time and level-set sweeps.

Pagerank and heat-kernel vectors are convex combinations of the walk vectors
A^t chi_v, so they reuse the same propagation and sweep.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
from scipy.stats import poisson

from src.config_loader import get_config
from src.errors import DomainError
from src.graph.core import HALF_TOL, VertexSet, WeightedGraph

logger = logging.getLogger(__name__)

MASS_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MassVector:
    """Nonnegative vertex-indexed vector (a distribution p or an incoming-weight profile)."""

    entries: np.ndarray

    def __post_init__(self):
        values = np.array(self.entries, dtype=float, copy=True).ravel()
        if np.any(values < 0):
            raise DomainError("mass vectors must be nonnegative")
        values.setflags(write=False)
        object.__setattr__(self, "entries", values)

    @classmethod
    def point(cls, n: int, vertex: int) -> "MassVector":
        if not 0 <= vertex < n:
            raise DomainError(f"vertex {vertex} is outside 0..{n - 1}")
        values = np.zeros(n)
        values[vertex] = 1.0
        return cls(values)

    @classmethod
    def uniform(cls, n: int) -> "MassVector":
        return cls(np.full(n, 1.0 / n))

    @property
    def total(self) -> float:
        return float(self.entries.sum())

    @property
    def probability(self) -> bool:
        return abs(self.total - 1.0) <= MASS_TOL

    def __len__(self) -> int:
        return self.entries.size


def as_entries(p, n: Optional[int] = None) -> np.ndarray:
    values = p.entries if isinstance(p, MassVector) else np.asarray(p, dtype=float).ravel()
    if n is not None and values.size != n:
        raise DomainError(f"mass vector has {values.size} entries, graph has {n} vertices")
    return values


def walk_step(graph: WeightedGraph, p) -> MassVector:
    """(A p)(i) = sum_j w(i, j) p(j)."""
    values = as_entries(p, graph.n)
    return MassVector(graph.weights @ values)


def walk_vectors(graph: WeightedGraph, p, steps: int) -> np.ndarray:
    """Rows t = 0..steps hold A^t p."""
    values = as_entries(p, graph.n)
    out = np.empty((steps + 1, graph.n))
    out[0] = values
    for t in range(1, steps + 1):
        out[t] = graph.weights @ out[t - 1]
    return out


def distance_to_uniform(graph: WeightedGraph, p) -> float:
    """L1 distance to the stationary law deg / vol(V) (uniform on unit-regular graphs)."""
    values = as_entries(p, graph.n)
    return float(np.abs(values - graph.deg / graph.total_volume).sum())


class MixingTime(NamedTuple):
    steps: Optional[int]
    cap: int

    @property
    def mixed(self) -> bool:
        return self.steps is not None

    def __str__(self) -> str:
        return str(self.steps) if self.mixed else f"unmixed({self.cap})"


def mixing_time(graph: WeightedGraph, cap: Optional[int] = None, threshold: float = 0.25) -> MixingTime:
    """Smallest t <= cap with max_v ||A^t chi_v - u||_1 <= threshold.

    Singleton starts suffice: the L1 criterion is convex in p_0.
    """
    graph.require_unit_regular("mixing_time")
    cap = int(cap if cap is not None else get_config().get("walks.mixing_cap", 10000))
    if cap < 1:
        raise DomainError(f"mixing cap must be >= 1, got {cap}")
    uniform = 1.0 / graph.n
    state = np.eye(graph.n)
    for t in range(cap + 1):
        worst = float(np.abs(state - uniform).sum(axis=0).max())
        if worst <= threshold:
            logger.debug("%s mixes at t=%d (distance %.3g)", graph.name, t, worst)
            return MixingTime(t, cap)
        state = graph.weights @ state
    logger.info("%s did not mix within %d steps", graph.name, cap)
    return MixingTime(None, cap)


def sweep_order(graph: WeightedGraph, p) -> np.ndarray:
    """Vertices by p(i)/deg(i) descending, ties by index."""
    values = as_entries(p, graph.n)
    density = np.divide(values, graph.deg, out=np.zeros_like(values), where=graph.deg > 0)
    return np.lexsort((np.arange(graph.n), -density))


def prefix_expansions(graph: WeightedGraph, order: np.ndarray) -> np.ndarray:
    """Expansion of every prefix of `order` (entry k is the prefix of size k + 1)."""
    permuted = graph.weights[np.ix_(order, order)]
    inside = np.cumsum(2.0 * np.tril(permuted, -1).sum(axis=1) + np.diag(permuted))
    volumes = np.cumsum(graph.deg[order])
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(volumes > 0, np.maximum(volumes - inside, 0.0) / volumes, np.inf)


def sweep_cut(graph: WeightedGraph, p, max_size: int):
    """Best level set of p among prefixes of size <= max_size and volume <= vol(V)/2."""
    if max_size < 1:
        raise DomainError("sweep_cut needs max_size >= 1")
    order = sweep_order(graph, p)
    values = prefix_expansions(graph, order)
    volumes = np.cumsum(graph.deg[order])
    allowed = (np.arange(1, graph.n + 1) <= max_size) & (volumes <= graph.total_volume / 2.0 + HALF_TOL)
    if not np.any(allowed):
        raise DomainError(f"no prefix of size <= {max_size} fits in half the volume")
    candidates = np.where(allowed, values, np.inf)
    best = int(np.argmin(candidates))
    return VertexSet.of(graph, order[: best + 1]), float(candidates[best])


class SweepResult(NamedTuple):
    vertex_set: VertexSet
    expansion: float
    step: int


def default_t_max(n: int) -> int:
    factor = get_config().get("walks.t_max_factor", 4)
    return int(factor * math.ceil(math.log2(max(n, 2))))


def rw_local_partition(graph: WeightedGraph, seed_vertex: int, t_max: Optional[int] = None,
                       max_size: Optional[int] = None) -> SweepResult:
    """Sweep A^t chi_v for t = 1..t_max and keep the best level set (earliest step on ties)."""
    t_max = t_max if t_max is not None else default_t_max(graph.n)
    max_size = max_size if max_size is not None else graph.n // 2
    vectors = walk_vectors(graph, MassVector.point(graph.n, seed_vertex), t_max)
    best = None
    for t in range(1, t_max + 1):
        found, value = sweep_cut(graph, vectors[t], max_size)
        if best is None or value < best.expansion:
            best = SweepResult(found, value, t)
    logger.info("rw_local_partition from %d: phi=%.4g at t=%d, |S|=%d",
                seed_vertex, best.expansion, best.step, best.vertex_set.size)
    return best


class WalkRecord(NamedTuple):
    step: int
    distance: float
    best_expansion: float
    best_size: int


def walk_profile(graph: WeightedGraph, seed_vertex: int, steps: int,
                 max_size: Optional[int] = None) -> List[WalkRecord]:
    """Per-step distance to stationarity and best sweep cut of A^t chi_v."""
    max_size = max_size if max_size is not None else graph.n // 2
    vectors = walk_vectors(graph, MassVector.point(graph.n, seed_vertex), steps)
    records = []
    for t in range(steps + 1):
        found, value = sweep_cut(graph, vectors[t], max_size)
        records.append(WalkRecord(t, distance_to_uniform(graph, vectors[t]), value, found.size))
    return records


def convex_walk_vector(graph: WeightedGraph, seed_vertex: int, coefficients: Sequence[float]) -> MassVector:
    """sum_t c_t A^t chi_v for nonnegative coefficients c_0.. summing to 1."""
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.ndim != 1 or coefficients.size == 0 or np.any(coefficients < 0):
        raise DomainError("coefficients must be a nonempty nonnegative sequence")
    if abs(coefficients.sum() - 1.0) > 1e-9:
        raise DomainError(f"coefficients must sum to 1, got {coefficients.sum():.6g}")
    vectors = walk_vectors(graph, MassVector.point(graph.n, seed_vertex), coefficients.size - 1)
    return MassVector(coefficients @ vectors)


def pagerank_coefficients(alpha: float, t_max: int) -> np.ndarray:
    """Truncated, renormalized alpha (1 - alpha)^t."""
    if not 0 < alpha <= 1:
        raise DomainError(f"teleport probability must lie in (0, 1], got {alpha}")
    weights = alpha * (1.0 - alpha) ** np.arange(t_max + 1)
    return weights / weights.sum()


def heat_kernel_coefficients(temperature: float, t_max: int) -> np.ndarray:
    """Truncated, renormalized Poisson(temperature) weights."""
    if temperature < 0:
        raise DomainError(f"temperature must be nonnegative, got {temperature}")
    weights = poisson.pmf(np.arange(t_max + 1), temperature)
    return weights / weights.sum()


def level_set_partition(graph: WeightedGraph, seed_vertex: int, coefficients: Sequence[float],
                        max_size: Optional[int] = None):
    max_size = max_size if max_size is not None else graph.n // 2
    return sweep_cut(graph, convex_walk_vector(graph, seed_vertex, coefficients), max_size)
