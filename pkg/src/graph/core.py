"""
Weighted undirected graphs and the cut/expansion primitives everything else builds on.

A graph is a dense symmetric weight matrix. A self-loop of weight w contributes w
(once) to the degree of its vertex, so the random walk matrix of a unit-regular
graph is the weight matrix itself.
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag
from scipy.sparse.csgraph import connected_components

from src.config_loader import get_config
from src.errors import CapacityError, DomainError

logger = logging.getLogger(__name__)

SYMMETRY_TOL = 1e-12
LAZY_TOL = 1e-12
HALF_TOL = 1e-9
TIE_TOL = 1e-12
CHUNK_ROWS = 65536


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Symmetric nonnegative weighted graph held as a read-only dense matrix."""

    weights: np.ndarray
    name: str = ""
    deg: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DomainError(f"weight matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise DomainError("weights must be finite")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        if not np.allclose(w, w.T, rtol=0.0, atol=SYMMETRY_TOL):
            raise DomainError("weight matrix is not symmetric")
        w = (w + w.T) / 2.0
        w.setflags(write=False)
        deg = w.sum(axis=1)
        deg.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "deg", deg)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def total_volume(self) -> float:
        return float(self.deg.sum())

    @property
    def regular_unit(self) -> bool:
        tol = get_config().get("graph.regular_tol", 1e-9)
        return self.n > 0 and bool(np.max(np.abs(self.deg - 1.0)) <= tol)

    @property
    def lazy(self) -> bool:
        return self.n > 0 and bool(np.all(np.diag(self.weights) >= 0.5 - LAZY_TOL))

    def edges(self) -> List[Tuple[int, int, float]]:
        """Edges (u, v, w) with u <= v and w > 0, sorted by (u, v)."""
        rows, cols = np.nonzero(np.triu(self.weights))
        return [(int(u), int(v), float(self.weights[u, v])) for u, v in zip(rows, cols)]

    def is_connected(self) -> bool:
        count, _ = connected_components(self.weights > 0, directed=False)
        return count == 1

    def is_bipartite(self) -> bool:
        """Two-colouring by breadth-first search; any self-loop makes the graph non-bipartite."""
        adjacency = self.weights > 0
        if np.any(np.diag(adjacency)):
            return False
        colour = np.full(self.n, -1, dtype=int)
        for root in range(self.n):
            if colour[root] >= 0:
                continue
            colour[root] = 0
            frontier = [root]
            while frontier:
                v = frontier.pop()
                for u in np.nonzero(adjacency[v])[0]:
                    if colour[u] < 0:
                        colour[u] = 1 - colour[v]
                        frontier.append(int(u))
                    elif colour[u] == colour[v]:
                        return False
        return True

    def require_unit_regular(self, operation: str) -> None:
        if not self.regular_unit:
            raise DomainError(f"{operation} requires a unit-regular graph ({self.name or 'unnamed'})")

    def __repr__(self) -> str:
        return f"WeightedGraph(name={self.name!r}, n={self.n})"


@dataclass(frozen=True)
class VertexSet:
    """A sorted set of vertex indices with its size and volume cached."""

    members: Tuple[int, ...]
    volume: float

    @classmethod
    def of(cls, graph: WeightedGraph, members: Iterable[int]) -> "VertexSet":
        items = tuple(sorted({int(v) for v in members}))
        if items and (items[0] < 0 or items[-1] >= graph.n):
            raise DomainError(f"vertex set {items} is outside 0..{graph.n - 1}")
        return cls(items, float(graph.deg[list(items)].sum()) if items else 0.0)

    @classmethod
    def from_mask(cls, graph: WeightedGraph, mask: np.ndarray) -> "VertexSet":
        return cls.of(graph, np.nonzero(np.asarray(mask))[0])

    @property
    def size(self) -> int:
        return len(self.members)

    def mask(self, n: int) -> np.ndarray:
        indicator = np.zeros(n, dtype=bool)
        indicator[list(self.members)] = True
        return indicator

    def __contains__(self, v) -> bool:
        return int(v) in self.members

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[int]:
        return iter(self.members)


def as_vertex_set(graph: WeightedGraph, s) -> VertexSet:
    return s if isinstance(s, VertexSet) else VertexSet.of(graph, s)


def cut_weight(graph: WeightedGraph, s, t) -> float:
    """Bilinear cut weight: the sum of w(i, j) over i in S and j in T.

    For S = T this is w(S, S); a self-loop inside S contributes its weight once.
    """
    s = as_vertex_set(graph, s)
    t = as_vertex_set(graph, t)
    if not s.members or not t.members:
        return 0.0
    return float(graph.weights[np.ix_(s.members, t.members)].sum())


def expansion(graph: WeightedGraph, s, enforce_half: bool = True, measure: str = "volume") -> float:
    """w(S, V - S) divided by vol(S) (or |S| with measure='size')."""
    s = as_vertex_set(graph, s)
    if not s.members:
        raise DomainError("expansion of the empty set is undefined")
    if enforce_half and s.volume > graph.total_volume / 2.0 + HALF_TOL:
        raise DomainError(f"vol(S)={s.volume:g} exceeds half the total volume {graph.total_volume:g}")
    if measure not in ("volume", "size"):
        raise DomainError(f"unknown expansion measure {measure!r}")
    inside = cut_weight(graph, s, s)
    cut = s.volume - inside
    denominator = s.volume if measure == "volume" else s.size
    return max(cut, 0.0) / denominator


def check_brute_force(graph: WeightedGraph, max_n: Optional[int], operation: str) -> None:
    limit = max_n if max_n is not None else get_config().get("graph.max_n", 24)
    if graph.n > limit:
        raise CapacityError(
            f"{operation} enumerates 2^n subsets and n={graph.n} exceeds max_n={limit}; "
            f"raise --max-n or use the sweep_cut heuristic"
        )


def subset_chunks(n: int, chunk_rows: int = CHUNK_ROWS) -> Iterator[Tuple[np.ndarray, np.ndarray]]:
    """Yield (codes, bits) blocks covering every nonempty subset of range(n).

    bits[r, i] is 1.0 when vertex i belongs to the subset encoded by codes[r].
    """
    shifts = np.arange(n, dtype=np.int64)
    total = 1 << n
    for start in range(1, total, chunk_rows):
        codes = np.arange(start, min(start + chunk_rows, total), dtype=np.int64)
        bits = ((codes[:, None] >> shifts) & 1).astype(float)
        yield codes, bits


def members_of_code(code: int, n: int) -> Tuple[int, ...]:
    return tuple(i for i in range(n) if (int(code) >> i) & 1)


class SubsetArgmin:
    """Running minimum over subset blocks with ties broken by size, then lexicographic membership."""

    def __init__(self, n: int, tol: float = TIE_TOL):
        self.n = n
        self.tol = tol
        self.value = np.inf
        self.size = None
        self.members = None
        self.row = None

    def offer(self, values: np.ndarray, sizes: np.ndarray, codes: np.ndarray, extra: Sequence = None) -> None:
        if values.size == 0:
            return
        low = float(values.min())
        if low > self.value + self.tol:
            return
        candidates = np.nonzero(values <= low + self.tol)[0]
        smallest = sizes[candidates].min()
        candidates = candidates[sizes[candidates] == smallest]
        best = min(candidates, key=lambda r: members_of_code(codes[r], self.n))
        key = (int(sizes[best]), members_of_code(codes[best], self.n))
        improves = self.members is None or low < self.value - self.tol
        if improves or key < (self.size, self.members):
            self.value = float(values[best])
            self.size, self.members = key
            self.row = None if extra is None else extra[best]


def small_set_expansion(graph: WeightedGraph, delta: float, max_n: Optional[int] = None) -> Tuple[float, VertexSet]:
    """Exhaustive min expansion over nonempty S with vol(S) <= delta * vol(V)."""
    if not 0 < delta <= 0.5:
        raise DomainError(f"delta must lie in (0, 1/2], got {delta}")
    check_brute_force(graph, max_n, "small_set_expansion")
    limit = delta * graph.total_volume + HALF_TOL
    tracker = SubsetArgmin(graph.n)
    for codes, bits in subset_chunks(graph.n):
        vol = bits @ graph.deg
        keep = (vol <= limit) & (vol > 0)
        if not np.any(keep):
            continue
        bits, codes, vol = bits[keep], codes[keep], vol[keep]
        inside = np.einsum("ri,ri->r", bits @ graph.weights, bits)
        values = np.maximum(vol - inside, 0.0) / vol
        tracker.offer(values, bits.sum(axis=1).astype(int), codes)
    if tracker.members is None:
        raise DomainError(f"no nonempty set has volume at most {delta} of the total")
    logger.debug("small_set_expansion(%s, %g) = %g at %s", graph.name, delta, tracker.value, tracker.members)
    return tracker.value, VertexSet.of(graph, tracker.members)


def graph_power(graph: WeightedGraph, t: int) -> WeightedGraph:
    """The graph whose weight matrix is A^t."""
    graph.require_unit_regular("graph_power")
    if int(t) != t or t < 1:
        raise DomainError(f"power must be a positive integer, got {t}")
    dense_max = get_config().get("graph.dense_max_n", 4096)
    if graph.n > dense_max:
        raise CapacityError(f"graph_power needs dense n x n arithmetic; n={graph.n} exceeds {dense_max}")
    powered = np.linalg.matrix_power(graph.weights, int(t))
    return WeightedGraph((powered + powered.T) / 2.0, name=f"{graph.name}^{int(t)}")


def lazify(graph: WeightedGraph, alpha: float) -> WeightedGraph:
    """Scale every edge by (1 - alpha) and add a self-loop of weight alpha."""
    if not 0 <= alpha < 1:
        raise DomainError(f"laziness must lie in [0, 1), got {alpha}")
    graph.require_unit_regular("lazify")
    if alpha == 0:
        return graph
    weights = (1.0 - alpha) * graph.weights + alpha * np.eye(graph.n)
    return WeightedGraph(weights, name=f"lazy({graph.name},{alpha:g})")


def disjoint_union(*graphs: WeightedGraph) -> WeightedGraph:
    if not graphs:
        raise DomainError("disjoint_union needs at least one graph")
    weights = block_diag(*[g.weights for g in graphs])
    return WeightedGraph(weights, name="+".join(g.name for g in graphs))
