"""
Why local partitioning misses the sparse cut of the noisy hypercube.

Started from a single string, the evolving set process (plain or volume-biased) and
the walk level sets only ever see Hamming balls, and every small ball expands by
nearly 1 - eps while a coordinate cut expands by at most eps.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional

import numpy as np

from src.errors import DomainError
from src.hypercube.model import HypercubeModel, ball_profiles, coordinate_cut_expansion

logger = logging.getLogger(__name__)

EMPTY_RADIUS = -1


def _next_radius(stay: np.ndarray, u: float) -> int:
    """max{s : w_s >= u}, or -1 for the empty set."""
    hits = np.nonzero(stay >= u)[0]
    return int(hits[-1]) if hits.size else EMPTY_RADIUS


def ball_transition_law(model: HypercubeModel, r: int, volume_biased: bool = False) -> Dict[int, float]:
    """Exact law of the next radius from B(r); radius -1 is the empty set."""
    if not 0 <= r <= model.d:
        raise DomainError(f"radius must lie in 0..{model.d}, got {r}")
    stay = np.clip(model.kernel.stay_matrix[:, r], 0.0, 1.0)
    # the successor is B(s) for U in (max_{s' > s} w_s', w_s]
    later_max = np.append(np.maximum.accumulate(stay[::-1])[::-1][1:], 0.0)
    law = {s: float(max(stay[s] - later_max[s], 0.0)) for s in range(model.d + 1)}
    law[EMPTY_RADIUS] = float(max(1.0 - stay.max(), 0.0))
    if volume_biased:
        log_sizes = model.kernel.log_ball_sizes
        law = {s: (float(np.exp(log_sizes[s] - log_sizes[r])) * p if s >= 0 else 0.0) for s, p in law.items()}
    return {s: p for s, p in law.items() if p > 0}


@dataclass
class BallTrajectory:
    radii: List[int] = field(default_factory=list)
    size_fractions: List[float] = field(default_factory=list)
    expansions: List[float] = field(default_factory=list)
    thresholds: List[Optional[float]] = field(default_factory=list)
    walker_weights: List[Optional[int]] = field(default_factory=list)

    def append(self, r: int, sizes: np.ndarray, expansions: np.ndarray, u: Optional[float],
               walker: Optional[int]) -> None:
        self.radii.append(r)
        self.size_fractions.append(0.0 if r < 0 else float(sizes[r]))
        self.expansions.append(float("nan") if r < 0 else float(expansions[r]))
        self.thresholds.append(u)
        self.walker_weights.append(walker)


def esp_on_balls(model: HypercubeModel, steps: int, rng: np.random.Generator,
                 volume_biased: bool = False, start_radius: int = 0) -> BallTrajectory:
    """Run the ball chain; -1 (empty) and d (everything) absorb.

    The volume-biased variant tracks the walker's Hamming weight a: it moves by one row
    of the weight chain and U is drawn on (0, w_a'].
    """
    kernel = model.kernel
    stay_matrix = np.clip(kernel.stay_matrix, 0.0, 1.0)
    sizes, expansions = ball_profiles(model)
    trajectory = BallTrajectory()
    r = start_radius
    walker = 0 if volume_biased else None
    trajectory.append(r, sizes, expansions, None, walker)
    for _ in range(steps):
        if r == EMPTY_RADIUS or r == model.d:
            break
        stay = stay_matrix[:, r]
        if volume_biased:
            walker = int(rng.choice(model.d + 1, p=kernel.P[walker] / kernel.P[walker].sum()))
            u = float(stay[walker] * (1.0 - rng.random()))
        else:
            u = float(1.0 - rng.random())
        r = _next_radius(stay, u)
        trajectory.append(r, sizes, expansions, u, walker)
    logger.debug("ball chain stopped at radius %d after %d steps", r, len(trajectory.radii) - 1)
    return trajectory


class CertifiedCap(NamedTuple):
    cap: float
    radius: int


def certified_ball_cap(model: HypercubeModel, threshold: float) -> CertifiedCap:
    """Largest ball size fraction such that every proper ball up to that size expands by >= threshold."""
    sizes, expansions = ball_profiles(model)
    cap, radius = 0.0, EMPTY_RADIUS
    for r in range(model.d):
        if expansions[r] < threshold:
            break
        cap, radius = float(sizes[r]), r
    return CertifiedCap(cap, radius)


@dataclass
class CounterexampleReport:
    k: int
    d: int
    eps: float
    coordinate_size_fraction: float
    coordinate_expansion: float
    size_cap: float
    threshold: float
    balls: List[Dict[str, float]]
    min_ball_expansion: Optional[float]
    passes: bool
    vacuous: bool
    degenerate: bool
    certified_cap: float
    reachability: str

    def as_dict(self) -> dict:
        return dict(self.__dict__)


REACHABILITY_NOTE = (
    "Started from a single string, the evolving set process keeps {y : w(y, S) >= U}; "
    "w(y, B(r)) is nonincreasing in |y|, so every visited set is a Hamming ball. The walk "
    "vectors A^t chi_0 are functions of |y| decreasing in |y|, so their level sets are balls too."
)


def counterexample_report(model: HypercubeModel, size_cap_fraction: float,
                          threshold: Optional[float] = None,
                          delta_target: Optional[float] = None) -> CounterexampleReport:
    """Coordinate cut against every proper Hamming ball of size fraction <= the cap."""
    if delta_target is not None and int(round(1.0 / delta_target)) != model.k:
        raise DomainError(f"delta_target={delta_target} implies k={round(1.0 / delta_target)}, model has k={model.k}")
    if size_cap_fraction <= 0:
        raise DomainError(f"size cap must be positive, got {size_cap_fraction}")
    threshold = 1.0 - model.eps if threshold is None else threshold
    cut = coordinate_cut_expansion(model)
    sizes, expansions = ball_profiles(model)
    balls = [{"r": r, "size_fraction": float(sizes[r]), "expansion": float(expansions[r])}
             for r in range(model.d) if sizes[r] <= size_cap_fraction]
    vacuous = not balls
    min_expansion = None if vacuous else min(b["expansion"] for b in balls)
    passes = (not vacuous) and min_expansion >= threshold - 1e-12
    degenerate = model.eps == 0
    if vacuous:
        logger.warning("no proper Hamming ball has size fraction <= %g; the report is vacuous", size_cap_fraction)
    return CounterexampleReport(
        k=model.k, d=model.d, eps=model.eps,
        coordinate_size_fraction=cut.size_fraction,
        coordinate_expansion=cut.expansion,
        size_cap=size_cap_fraction,
        threshold=threshold,
        balls=balls,
        min_ball_expansion=min_expansion,
        passes=passes,
        vacuous=vacuous,
        degenerate=degenerate,
        certified_cap=certified_ball_cap(model, threshold).cap,
        reachability=REACHABILITY_NOTE,
    )
