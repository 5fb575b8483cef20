"""
Lovasz-Simonovits curves and the curve-drop inequalities.

C(p, x) is the largest mass a fractional vertex selection of volume x can collect.
Breakpoints sit at cumulative degrees in p(i)/deg(i) order, so the same code path
serves regular and general graphs.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from src.errors import DomainError
from src.graph.core import WeightedGraph
from src.walks.random_walk import as_entries, walk_step

logger = logging.getLogger(__name__)

CONCAVITY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ConcaveCurve:
    """Piecewise-linear concave curve from (0, 0) to (vol(V), total mass)."""

    breakpoints: np.ndarray
    values: np.ndarray

    def __call__(self, x: Union[float, np.ndarray]):
        result = np.interp(x, self.breakpoints, self.values)
        return float(result) if np.ndim(result) == 0 else result

    @property
    def total(self) -> float:
        return float(self.values[-1])

    @property
    def domain(self) -> float:
        return float(self.breakpoints[-1])

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    def is_concave(self, tol: float = CONCAVITY_TOL) -> bool:
        return bool(np.all(np.diff(self.slopes) <= tol))

    def first_reach(self, level: float) -> float:
        """Smallest x with C(x) >= level (the domain end when the curve never gets there)."""
        if level <= 0:
            return 0.0
        j = int(np.searchsorted(self.values, level, side="left"))
        if j >= self.values.size:
            return self.domain
        x0, x1 = self.breakpoints[j - 1], self.breakpoints[j]
        y0, y1 = self.values[j - 1], self.values[j]
        return float(x0 + (level - y0) * (x1 - x0) / (y1 - y0))


def curve_of(graph: WeightedGraph, p, probability: bool = False) -> ConcaveCurve:
    """Greedy curve of p in p(i)/deg(i) order; vertices of equal density share one segment."""
    values = as_entries(p, graph.n)
    if np.any(values < 0):
        raise DomainError("curves are defined for nonnegative vectors")
    if probability and abs(values.sum() - 1.0) > 1e-12:
        raise DomainError(f"expected a probability vector, mass is {values.sum():.15g}")
    present = graph.deg > 0
    degrees = graph.deg[present]
    masses = values[present]
    density = masses / degrees
    order = np.lexsort((np.arange(density.size), -density))
    density, degrees, masses = density[order], degrees[order], masses[order]

    # keep the last index of each run of equal densities
    ends = np.append(np.nonzero(np.diff(density) != 0)[0], density.size - 1)
    xs = np.concatenate(([0.0], np.cumsum(degrees)[ends]))
    ys = np.concatenate(([0.0], np.cumsum(masses)[ends]))
    return ConcaveCurve(xs, ys)


def _check_integral_point(graph: WeightedGraph, x) -> None:
    if int(x) != x or not 1 <= x <= graph.n / 2:
        raise DomainError(f"x must be an integer in [1, n/2], got {x}")


def chord_slack(graph: WeightedGraph, p, x: int, phi_bar: Optional[float] = None) -> float:
    """1/2 (C(p, x(1 - phi)) + C(p, x(1 + phi))) - C(Ap, x); nonnegative on unit-regular graphs."""
    graph.require_unit_regular("chord_slack")
    _check_integral_point(graph, x)
    if phi_bar is None:
        from src.gaps.measures import comb_gap
        phi_bar = comb_gap(graph).value
    before = curve_of(graph, p)
    after = curve_of(graph, walk_step(graph, p))
    return 0.5 * (before(x * (1.0 - phi_bar)) + before(x * (1.0 + phi_bar))) - after(x)


def decay(a: float, b: float) -> float:
    """Per-step contraction (sqrt a - sqrt b)(1 - sqrt b)/(sqrt a + b); zero at b = 1."""
    return (math.sqrt(a) - math.sqrt(b)) * (1.0 - math.sqrt(b)) / (math.sqrt(a) + b)


@dataclass(frozen=True)
class CurveDominanceParams:
    """(a, b) with a > 1 > b > 0 such that C(d_S, a|S|) <= b|S| for every small S."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 1:
            raise DomainError(f"dominance parameter a must exceed 1, got {self.a}")
        if not 0 < self.b < 1:
            raise DomainError(f"dominance parameter b must lie in (0, 1), got {self.b}")

    @property
    def threshold(self) -> float:
        return (self.b - self.b ** 2) / (self.a - self.b ** 2)

    @property
    def coefficients(self):
        """Weights of C(p, b x) and C(p, a x / b) in the dominance bound."""
        denominator = self.a - self.b ** 2
        return (self.a - self.b) / denominator, (self.b - self.b ** 2) / denominator

    @property
    def decay(self) -> float:
        return decay(self.a, self.b)

    @property
    def upper_area_bound(self) -> float:
        """Per unit size, the bound b(a - b)/(a - b^2) on the upper area above the threshold."""
        return self.b * (self.a - self.b) / (self.a - self.b ** 2)


def dominance_slack(graph: WeightedGraph, p, s_size: float, params: CurveDominanceParams) -> float:
    """lo C(p, b x) + hi C(p, a x / b) - C(Ap, x) at x = s_size."""
    if not 0 < s_size <= graph.total_volume / 2.0 + 1e-9:
        raise DomainError(f"set size must lie in (0, vol(V)/2], got {s_size}")
    low, high = params.coefficients
    before = curve_of(graph, p)
    after = curve_of(graph, walk_step(graph, p))
    x = float(s_size)
    return low * before(params.b * x) + high * before(params.a * x / params.b) - after(x)


def convergence_envelope(params: CurveDominanceParams, c: float, t: int, x: float, n: int) -> float:
    """x/n + c sqrt(min(x, n - x)) (1 - decay(a, b))^t."""
    if c < 0:
        raise DomainError(f"envelope constant must be nonnegative, got {c}")
    if t < 0 or not 0 <= x <= n:
        raise DomainError(f"need t >= 0 and 0 <= x <= n, got t={t}, x={x}, n={n}")
    return x / n + c * math.sqrt(min(x, n - x)) * (1.0 - params.decay) ** t


def gap_envelope(phi_bar: float, t: int, x: float, n: int, c: float = 1.0) -> float:
    """x/n + c sqrt(x) (1 - phi_bar^2 / 8)^t, the mixing envelope driven by the combinatorial gap."""
    if t < 0 or not 0 <= x <= n:
        raise DomainError(f"need t >= 0 and 0 <= x <= n, got t={t}, x={x}, n={n}")
    return x / n + c * math.sqrt(x) * (1.0 - phi_bar ** 2 / 8.0) ** t

