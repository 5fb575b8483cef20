"""
The evolving set process.

One step draws U uniformly from (0, 1] and keeps every vertex y whose incoming
density q(y) = w(y, S)/deg(y) is at least U. Because the successor only changes
when U crosses a distinct value of q, the one-step law is a finite list of nested
atoms and the gauge, the threshold identity and the volume-biased law all have
closed forms.
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from src.config_loader import get_config
from src.errors import DomainError
from src.graph.core import HALF_TOL, VertexSet, WeightedGraph, as_vertex_set, expansion

logger = logging.getLogger(__name__)

LEVEL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IncomingProfile:
    """d_S(i) = w(i, S) together with its density view q(i) = d_S(i)/deg(i)."""

    vertex_set: VertexSet
    d_s: np.ndarray
    deg: np.ndarray
    order: np.ndarray = field(repr=False)

    @property
    def density(self) -> np.ndarray:
        return np.divide(self.d_s, self.deg, out=np.zeros_like(self.d_s), where=self.deg > 0)

    def upper_area(self, threshold: float) -> float:
        """sum_i deg(i) max(q(i) - t, 0)."""
        return float((self.deg * np.maximum(self.density - threshold, 0.0)).sum())

    def lower_area(self, threshold: float) -> float:
        """sum_i deg(i) min(q(i), t)."""
        return float((self.deg * np.minimum(self.density, threshold)).sum())


def incoming_profile(graph: WeightedGraph, s) -> IncomingProfile:
    s = as_vertex_set(graph, s)
    d_s = graph.weights[:, list(s.members)].sum(axis=1) if s.members else np.zeros(graph.n)
    order = np.lexsort((np.arange(graph.n), -d_s))
    return IncomingProfile(s, d_s, graph.deg, order)


def snapped_levels(graph: WeightedGraph, s) -> np.ndarray:
    """Densities clipped to [0, 1] with values within LEVEL_TOL of each other merged to the group max."""
    q = np.clip(incoming_profile(graph, s).density, 0.0, 1.0)
    q[q >= 1.0 - LEVEL_TOL] = 1.0
    q[q <= LEVEL_TOL] = 0.0
    order = np.argsort(-q, kind="stable")
    snapped = q.copy()
    level = None
    for i in order:
        if level is None or level - q[i] > LEVEL_TOL:
            level = q[i]
        snapped[i] = level
    return snapped


class EspAtom(NamedTuple):
    lower: float
    upper: float
    successor: VertexSet

    @property
    def probability(self) -> float:
        return self.upper - self.lower


@dataclass(frozen=True)
class EspTransition:
    """Exact one-step law: atoms (lower, upper] -> successor, in decreasing threshold order."""

    source: VertexSet
    atoms: Tuple[EspAtom, ...]

    def successor_for(self, u: float) -> VertexSet:
        for atom in self.atoms:
            if atom.lower < u <= atom.upper:
                return atom.successor
        raise DomainError(f"threshold {u} is outside (0, 1]")

    def expected_volume(self) -> float:
        return float(sum(atom.probability * atom.successor.volume for atom in self.atoms))


def esp_transition_distribution(graph: WeightedGraph, s) -> EspTransition:
    s = as_vertex_set(graph, s)
    q = snapped_levels(graph, s)
    levels = np.unique(q[q > 0])[::-1]
    atoms = []
    upper = 1.0
    if levels.size == 0 or levels[0] < 1.0:
        top = levels[0] if levels.size else 0.0
        atoms.append(EspAtom(float(top), 1.0, VertexSet.of(graph, ())))
        upper = float(top)
    for j, level in enumerate(levels):
        lower = float(levels[j + 1]) if j + 1 < levels.size else 0.0
        successor = VertexSet.from_mask(graph, q >= level)
        atoms.append(EspAtom(lower, upper, successor))
        upper = lower
    return EspTransition(s, tuple(atoms))


def draw_threshold(rng: np.random.Generator, size=None):
    """Uniform draw on (0, 1]."""
    return 1.0 - rng.random(size)


def esp_sample_step(graph: WeightedGraph, s, rng: np.random.Generator,
                    u: Optional[float] = None) -> Tuple[VertexSet, float]:
    u = float(draw_threshold(rng)) if u is None else float(u)
    if not 0 < u <= 1:
        raise DomainError(f"threshold {u} is outside (0, 1]")
    q = snapped_levels(graph, s)
    return VertexSet.from_mask(graph, q >= u), u


def _check_gauge_domain(graph: WeightedGraph, s: VertexSet) -> None:
    if not s.members:
        raise DomainError("the gauge of the empty set is undefined")
    if s.volume > graph.total_volume / 2.0 + HALF_TOL:
        raise DomainError(f"vol(S)={s.volume:g} exceeds half the total volume")


def gauge_exact(graph: WeightedGraph, s) -> float:
    """psi(S) = 1 - E[sqrt(vol(S~)/vol(S))], integrated over the atoms."""
    s = as_vertex_set(graph, s)
    _check_gauge_domain(graph, s)
    transition = esp_transition_distribution(graph, s)
    expected_root = sum(atom.probability * np.sqrt(atom.successor.volume / s.volume)
                        for atom in transition.atoms)
    return float(1.0 - expected_root)


def _successor_volumes(graph: WeightedGraph, s, thresholds: np.ndarray) -> np.ndarray:
    """vol({q >= u}) for every u in thresholds."""
    q = snapped_levels(graph, s)
    order = np.argsort(q)
    ascending = q[order]
    suffix = np.concatenate((np.cumsum(graph.deg[order][::-1])[::-1], [0.0]))
    first = np.searchsorted(ascending, thresholds, side="left")
    return suffix[first]


class GaugeEstimate(NamedTuple):
    mean: float
    stderr: Optional[float]
    trials: int


def gauge_monte_carlo(graph: WeightedGraph, s, trials: int, seed) -> GaugeEstimate:
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    s = as_vertex_set(graph, s)
    _check_gauge_domain(graph, s)
    rng = np.random.default_rng(seed)
    volumes = _successor_volumes(graph, s, draw_threshold(rng, trials))
    samples = 1.0 - np.sqrt(volumes / s.volume)
    stderr = float(samples.std(ddof=1) / np.sqrt(trials)) if trials > 1 else None
    return GaugeEstimate(float(samples.mean()), stderr, trials)


def _atom_arrays(transition: EspTransition):
    lowers = np.array([atom.lower for atom in transition.atoms])
    uppers = np.array([atom.upper for atom in transition.atoms])
    volumes = np.array([atom.successor.volume for atom in transition.atoms])
    return lowers, uppers, volumes


def mp_identity_check(graph: WeightedGraph, s, t):
    """(t E[vol(S~) | U <= t], sum_i deg(i) min(t, q(i))); equal up to rounding.

    t may be a scalar or an array of thresholds.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts <= 0) or np.any(ts > 1):
        raise DomainError(f"t must lie in (0, 1], got {t}")
    lowers, uppers, volumes = _atom_arrays(esp_transition_distribution(graph, s))
    covered = np.clip(np.minimum(uppers[None, :], ts[:, None]) - lowers[None, :], 0.0, None)
    lhs = covered @ volumes
    q = snapped_levels(graph, s)
    rhs = np.minimum(q[None, :], ts[:, None]) @ graph.deg
    if np.ndim(t) == 0:
        return float(lhs[0]), float(rhs[0])
    return lhs, rhs


def threshold_conditionals(graph: WeightedGraph, s, t: float) -> Tuple[float, float]:
    """(t E[vol(S~) | U <= t], (1 - t) E[vol(S~) | U >= t]): the lower and upper areas at t."""
    lowers, uppers, volumes = _atom_arrays(esp_transition_distribution(graph, s))
    below = np.clip(np.minimum(uppers, t) - lowers, 0.0, None) @ volumes
    above = np.clip(uppers - np.maximum(lowers, t), 0.0, None) @ volumes
    return float(below), float(above)


def volume_biased_law(transition: EspTransition) -> List[Tuple[VertexSet, float]]:
    """K^(S, S') = vol(S')/vol(S) K(S, S'), atoms with zero mass dropped."""
    if transition.source.volume <= 0:
        raise DomainError("the volume-biased law needs a set of positive volume")
    law = []
    for atom in transition.atoms:
        mass = atom.successor.volume / transition.source.volume * atom.probability
        if mass > 0:
            law.append((atom.successor, mass))
    return law


def sample_volume_vertex(graph: WeightedGraph, s, rng: np.random.Generator) -> int:
    s = as_vertex_set(graph, s)
    if not s.members:
        raise DomainError("cannot sample from the empty set")
    weights = graph.deg[list(s.members)]
    return int(rng.choice(s.members, p=weights / weights.sum()))


def _check_proper(graph: WeightedGraph, s: VertexSet) -> None:
    if not s.members or s.size == graph.n:
        raise DomainError("the volume-biased step needs S different from the empty set and V")


def vb_esp_sample_step(graph: WeightedGraph, s, x_in_s: int,
                       rng: np.random.Generator) -> Tuple[VertexSet, int, float]:
    """Coupled volume-biased step: walk x -> x_next, then U uniform on (0, q(x_next)].

    Returns (successor, x_next, u); the successor always contains x_next.
    """
    s = as_vertex_set(graph, s)
    _check_proper(graph, s)
    if x_in_s not in s:
        raise DomainError(f"walker {x_in_s} is not in S")
    row = graph.weights[x_in_s] / graph.deg[x_in_s]
    x_next = int(rng.choice(graph.n, p=row))
    q = snapped_levels(graph, s)
    u = float(q[x_next] * draw_threshold(rng))
    return VertexSet.from_mask(graph, q >= u), x_next, u


def sample_transition_counts(graph: WeightedGraph, s, draws: int, rng: np.random.Generator,
                             volume_biased: bool = False) -> np.ndarray:
    """Counts of each exact atom (in esp_transition_distribution order) over `draws` samples."""
    s = as_vertex_set(graph, s)
    transition = esp_transition_distribution(graph, s)
    q = snapped_levels(graph, s)
    if volume_biased:
        _check_proper(graph, s)
        members = np.array(s.members)
        start = rng.choice(members, size=draws, p=graph.deg[members] / s.volume)
        rows = np.cumsum(graph.weights / graph.deg[:, None], axis=1)
        x_next = np.minimum((rows[start] < rng.random(draws)[:, None]).sum(axis=1), graph.n - 1)
        thresholds = q[x_next] * draw_threshold(rng, draws)
    else:
        thresholds = draw_threshold(rng, draws)
    # atom j covers (lower_j, upper_j] and the lowers decrease with j
    lowers = np.array([atom.lower for atom in transition.atoms])
    index = (lowers[None, :] >= thresholds[:, None]).sum(axis=1)
    return np.bincount(index, minlength=len(transition.atoms))


class Termination(Enum):
    EMPTY = "empty"
    FULL = "full"
    TARGET = "target"
    BUDGET = "budget"
    STEP_CAP = "step_cap"


class EspStep(NamedTuple):
    step: int
    vertex_set: VertexSet
    u: Optional[float]
    expansion: float
    gauge_term: Optional[float]


@dataclass
class EspTrajectory:
    seed: int
    volume_biased: bool
    steps: List[EspStep] = field(default_factory=list)
    termination: Optional[Termination] = None


class LocalPartition(NamedTuple):
    vertex_set: VertexSet
    expansion: float
    trajectory: EspTrajectory
    within_budget: bool


def _set_expansion(graph: WeightedGraph, s: VertexSet) -> float:
    if not s.members:
        return float("nan")
    return expansion(graph, s, enforce_half=False)


def esp_local_partition(graph: WeightedGraph, seed_vertex: int, step_cap: Optional[int] = None,
                        size_budget: Optional[float] = None, phi_target: float = 0.0,
                        seed: int = 0, volume_biased: bool = True) -> LocalPartition:
    """Run the (volume-biased) process from {seed_vertex} and keep the best set within budget."""
    step_cap = int(step_cap if step_cap is not None else get_config().get("esp.step_cap", 200))
    size_budget = size_budget if size_budget is not None else graph.total_volume / 2.0
    if step_cap < 1:
        raise DomainError(f"step cap must be >= 1, got {step_cap}")
    if not 0 <= seed_vertex < graph.n:
        raise DomainError(f"seed vertex {seed_vertex} is outside 0..{graph.n - 1}")
    if size_budget > graph.total_volume / 2.0 + HALF_TOL:
        raise DomainError(f"size budget {size_budget:g} exceeds half the total volume")

    rng = np.random.default_rng(np.random.SeedSequence(seed))
    trajectory = EspTrajectory(seed=seed, volume_biased=volume_biased)
    current = VertexSet.of(graph, [seed_vertex])
    walker = seed_vertex
    trajectory.steps.append(EspStep(0, current, None, _set_expansion(graph, current), None))
    best, best_value = current, trajectory.steps[0].expansion

    for t in range(1, step_cap + 1):
        if volume_biased:
            successor, walker, u = vb_esp_sample_step(graph, current, walker, rng)
        else:
            successor, u = esp_sample_step(graph, current, rng)
        term = 1.0 - float(np.sqrt(successor.volume / current.volume))
        value = _set_expansion(graph, successor)
        trajectory.steps.append(EspStep(t, successor, u, value, term))
        current = successor
        logger.debug("esp step %d: |S|=%d phi=%.4g u=%.4g", t, current.size, value, u)

        if not current.members:
            trajectory.termination = Termination.EMPTY
            break
        if current.size == graph.n:
            trajectory.termination = Termination.FULL
            break
        if current.volume > size_budget + HALF_TOL:
            trajectory.termination = Termination.BUDGET
            break
        if value < best_value:
            best, best_value = current, value
        if value <= phi_target:
            trajectory.termination = Termination.TARGET
            break
    else:
        trajectory.termination = Termination.STEP_CAP

    within = best.volume <= size_budget + HALF_TOL
    logger.info("esp_local_partition from %d: phi=%.4g |S|=%d (%s)",
                seed_vertex, best_value, best.size, trajectory.termination.value)
    return LocalPartition(best, best_value, trajectory, within)
