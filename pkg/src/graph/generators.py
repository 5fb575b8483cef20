"""
Generators for the unit-regular graph families used by the experiments.

Every generator returns a graph with deg == 1 at every vertex.
"""

import logging
from functools import reduce
from typing import Any, Callable, Dict

import numpy as np

from src.config_loader import get_config
from src.errors import CapacityError, DomainError
from src.graph.core import WeightedGraph, lazify

logger = logging.getLogger(__name__)


def cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise DomainError(f"cycle needs n >= 3, got {n}")
    w = np.zeros((n, n))
    for i in range(n):
        w[i, (i + 1) % n] = w[(i + 1) % n, i] = 0.5
    return WeightedGraph(w, name=f"cycle({n})")


def complete(n: int) -> WeightedGraph:
    if n < 2:
        raise DomainError(f"complete graph needs n >= 2, got {n}")
    w = (np.ones((n, n)) - np.eye(n)) / (n - 1)
    return WeightedGraph(w, name=f"complete({n})")


def complete_bipartite(m: int) -> WeightedGraph:
    """K_{m,m} on 2m vertices; the sides are 0..m-1 and m..2m-1."""
    if m < 1:
        raise DomainError(f"complete_bipartite needs m >= 1, got {m}")
    block = np.ones((m, m)) / m
    zero = np.zeros((m, m))
    return WeightedGraph(np.block([[zero, block], [block, zero]]), name=f"complete_bipartite({m})")


def path(n: int) -> WeightedGraph:
    """Path with edges of weight 1/2; the two endpoints carry self-loops of weight 1/2."""
    if n < 2:
        raise DomainError(f"path needs n >= 2, got {n}")
    w = np.zeros((n, n))
    for i in range(n - 1):
        w[i, i + 1] = w[i + 1, i] = 0.5
    w[0, 0] += 0.5
    w[n - 1, n - 1] += 0.5
    return WeightedGraph(w, name=f"path({n})")


def dumbbell(m: int, bridge: float = 0.05) -> WeightedGraph:
    """Two m-cliques joined by one edge of weight `bridge` between vertices m-1 and m.

    Clique edges weigh (1 - bridge)/(m - 1); vertices off the bridge get a self-loop of
    weight `bridge` so that every degree is 1.
    """
    if m < 2:
        raise DomainError(f"dumbbell needs m >= 2, got {m}")
    if not 0 < bridge < 1:
        raise DomainError(f"bridge weight must lie in (0, 1), got {bridge}")
    n = 2 * m
    clique = (np.ones((m, m)) - np.eye(m)) * (1.0 - bridge) / (m - 1)
    w = np.zeros((n, n))
    w[:m, :m] = clique
    w[m:, m:] = clique
    w[m - 1, m] = w[m, m - 1] = bridge
    for v in range(n):
        if v not in (m - 1, m):
            w[v, v] = bridge
    return WeightedGraph(w, name=f"dumbbell({m},{bridge:g})")


def coordinate_kernel(k: int, eps: float) -> np.ndarray:
    """Per-coordinate noise kernel: keep the symbol w.p. 1 - eps, else resample uniformly."""
    return (1.0 - eps) * np.eye(k) + eps / k * np.ones((k, k))


def hypercube_explicit(k: int, d: int, eps: float) -> WeightedGraph:
    """Explicit k-ary eps-noisy hypercube; vertex index is the base-k string, first coordinate most significant."""
    if k < 2 or d < 1:
        raise DomainError(f"hypercube needs k >= 2 and d >= 1, got k={k}, d={d}")
    if not 0 <= eps <= 1:
        raise DomainError(f"noise eps must lie in [0, 1], got {eps}")
    config = get_config()
    n = k ** d
    limit = min(config.get("hypercube.explicit_max_vertices", 1 << 20), config.get("graph.dense_max_n", 4096))
    if n > limit:
        raise CapacityError(f"explicit hypercube has k^d={n} vertices, above the dense limit {limit}")
    kernel = coordinate_kernel(k, eps)
    w = reduce(np.kron, [kernel] * d)
    return WeightedGraph(w, name=f"hypercube({k},{d},{eps:g})")


def random_regular(n: int, mix: int = 3, seed: int = 0) -> WeightedGraph:
    """Random weighted unit-regular graph: a Dirichlet-weighted mix of symmetrized permutations."""
    if n < 2 or mix < 1:
        raise DomainError(f"random_regular needs n >= 2 and mix >= 1, got n={n}, mix={mix}")
    rng = np.random.default_rng(seed)
    coefficients = rng.dirichlet(np.ones(mix))
    w = np.zeros((n, n))
    for c in coefficients:
        perm = np.eye(n)[rng.permutation(n)]
        w += c * (perm + perm.T) / 2.0
    return WeightedGraph(w, name=f"random_regular({n},{mix},{seed})")


FAMILIES: Dict[str, Callable[..., WeightedGraph]] = {
    "cycle": cycle,
    "complete": complete,
    "complete_bipartite": complete_bipartite,
    "path": path,
    "dumbbell": dumbbell,
    "hypercube_explicit": hypercube_explicit,
    "random_regular": random_regular,
}


def generate(family: str, **params: Any) -> WeightedGraph:
    """Build a graph by family name; a `lazy` parameter lazifies the result."""
    if family not in FAMILIES:
        raise DomainError(f"unknown graph family {family!r}; choose from {', '.join(sorted(FAMILIES))}")
    alpha = params.pop("lazy", None)
    try:
        graph = FAMILIES[family](**params)
    except TypeError as e:
        raise DomainError(f"bad parameters for {family}: {e}") from e
    if alpha:
        graph = lazify(graph, float(alpha))
    logger.debug("generated %s (n=%d)", graph.name, graph.n)
    return graph


def generate_from_spec(spec: Dict[str, Any]) -> WeightedGraph:
    """Build a graph from a battery entry such as {"family": "cycle", "n": 4}."""
    params = dict(spec)
    family = params.pop("family", None)
    if family is None:
        raise DomainError(f"graph spec {spec} has no 'family'")
    return generate(family, **params)
