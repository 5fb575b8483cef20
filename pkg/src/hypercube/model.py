"""
The k-ary eps-noisy hypercube and its Hamming-weight projection.

Every coordinate is independently resampled with probability eps, so w(x, y) is a
product of per-coordinate kernels and w(x, B(r)) depends only on |x|. The projected
chain on weights 0..d has (d + 1)^2 entries and never touches the k^d vertices.
"""

import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.signal import fftconvolve
from scipy.stats import binom

from src.config_loader import get_config
from src.errors import CapacityError, DomainError
from src.graph.generators import coordinate_kernel

logger = logging.getLogger(__name__)

MAX_KERNEL_DIM = 10_000


@dataclass(frozen=True)
class HypercubeModel:
    """Implicit (k, d, eps) noisy hypercube.

    eps above 1/2 is outside the monotone regime and needs explore=True.
    """

    k: int
    d: int
    eps: float
    explore: bool = False

    def __post_init__(self):
        if self.k < 2 or self.d < 1:
            raise DomainError(f"need k >= 2 and d >= 1, got k={self.k}, d={self.d}")
        if not 0 <= self.eps <= 1:
            raise DomainError(f"noise eps must lie in [0, 1], got {self.eps}")
        if self.eps > 0.5 and not self.explore:
            raise DomainError(f"eps={self.eps} exceeds 1/2; pass explore=True to study that regime")

    @classmethod
    def for_delta(cls, delta: float, d: int, eps: float) -> "HypercubeModel":
        """Alphabet k = round(1/delta), so a coordinate cut has size fraction about delta."""
        k = int(round(1.0 / delta))
        if k < 2:
            raise DomainError(f"delta={delta} gives alphabet size {k} < 2")
        return cls(k, d, eps)

    @property
    def p_same(self) -> float:
        return 1.0 - self.eps + self.eps / self.k

    @property
    def p_diff(self) -> float:
        return self.eps / self.k

    @property
    def log_n(self) -> float:
        return self.d * math.log(self.k)

    @property
    def monotone_regime(self) -> bool:
        return self.eps <= 0.5

    @property
    def explicit_size(self) -> int:
        return self.k ** self.d

    def require_explicit(self, operation: str) -> None:
        limit = get_config().get("hypercube.explicit_max_vertices", 1 << 20)
        if self.d * math.log2(self.k) > math.log2(limit) + 1e-12:
            raise CapacityError(f"{operation} enumerates k^d strings; k={self.k}, d={self.d} exceeds {limit}")

    @cached_property
    def kernel(self) -> "WeightChainKernel":
        return weight_chain(self)


def _check_string(model: HypercubeModel, x: Sequence[int]) -> Tuple[int, ...]:
    x = tuple(int(c) for c in x)
    if len(x) != model.d or any(c < 0 or c >= model.k for c in x):
        raise DomainError(f"{x} is not a string in {{0..{model.k - 1}}}^{model.d}")
    return x


def pair_weight(model: HypercubeModel, x: Sequence[int], y: Sequence[int]) -> float:
    """p_same^(agreements) p_diff^(disagreements)."""
    model.require_explicit("pair_weight")
    x, y = _check_string(model, x), _check_string(model, y)
    disagreements = sum(a != b for a, b in zip(x, y))
    return model.p_same ** (model.d - disagreements) * model.p_diff ** disagreements


def string_to_index(model: HypercubeModel, x: Sequence[int]) -> int:
    """Base-k index with the first coordinate most significant (the generator's Kronecker order)."""
    index = 0
    for c in _check_string(model, x):
        index = index * model.k + c
    return index


def index_to_string(model: HypercubeModel, index: int) -> Tuple[int, ...]:
    digits = []
    for _ in range(model.d):
        index, c = divmod(index, model.k)
        digits.append(c)
    return tuple(reversed(digits))


def hamming_weights(model: HypercubeModel) -> np.ndarray:
    """|x| for every explicit index."""
    model.require_explicit("hamming_weights")
    digits = np.indices((model.k,) * model.d).reshape(model.d, -1)
    return (digits != 0).sum(axis=0)


class WeightChainKernel(NamedTuple):
    """P[a, b] = Pr(|y| = b given |x| = a) for one step, with stationary law pi = Bin(d, (k-1)/k).

    pi underflows at small weights once d is a few hundred; log_pi does not.
    """

    P: np.ndarray
    pi: np.ndarray
    log_pi: np.ndarray

    @property
    def stay_matrix(self) -> np.ndarray:
        """stay[s, r] = w(x, B(r)) for |x| = s."""
        return np.cumsum(self.P, axis=1)

    @property
    def log_ball_sizes(self) -> np.ndarray:
        """log |B(r)| / k^d for r = 0..d."""
        return np.logaddexp.accumulate(self.log_pi)


def _row_linear(a: int, d: int, leave: float, enter: float) -> np.ndarray:
    stay_nonzero = binom.pmf(np.arange(a + 1), a, leave)
    gain = binom.pmf(np.arange(d - a + 1), d - a, enter)
    return np.convolve(stay_nonzero[::-1], gain)


def _row_logspace(a: int, d: int, leave: float, enter: float) -> np.ndarray:
    log_stay = binom.logpmf(np.arange(a + 1), a, leave)[::-1]
    log_gain = binom.logpmf(np.arange(d - a + 1), d - a, enter)
    shift_stay, shift_gain = log_stay.max(), log_gain.max()
    row = fftconvolve(np.exp(log_stay - shift_stay), np.exp(log_gain - shift_gain))
    return np.maximum(row, 0.0) * math.exp(shift_stay + shift_gain)


def weight_chain(model: HypercubeModel, logspace_threshold: Optional[int] = None) -> WeightChainKernel:
    """Row a is the law of (a - Z) + W, Z ~ Bin(a, eps/k), W ~ Bin(d - a, eps (k-1)/k)."""
    if model.d > MAX_KERNEL_DIM:
        raise CapacityError(f"weight chain needs (d+1)^2 storage; d={model.d} exceeds {MAX_KERNEL_DIM}")
    if logspace_threshold is None:
        logspace_threshold = get_config().get("hypercube.logspace_threshold", 500)
    leave = model.eps / model.k
    enter = model.eps * (model.k - 1) / model.k
    row_fn = _row_logspace if model.d > logspace_threshold else _row_linear
    P = np.vstack([row_fn(a, model.d, leave, enter) for a in range(model.d + 1)])
    log_pi = binom.logpmf(np.arange(model.d + 1), model.d, (model.k - 1) / model.k)
    logger.debug("weight chain (k=%d, d=%d, eps=%g) built with %s rows",
                 model.k, model.d, model.eps, row_fn.__name__)
    return WeightChainKernel(P, np.exp(log_pi), log_pi)


class BallProfile(NamedTuple):
    r: int
    size_fraction: float
    stay_weight: np.ndarray
    expansion: float


def ball_profile(model: HypercubeModel, r: int) -> BallProfile:
    if not 0 <= r <= model.d:
        raise DomainError(f"radius must lie in 0..{model.d}, got {r}")
    kernel = model.kernel
    stay = kernel.stay_matrix[:, r]
    log_size = kernel.log_ball_sizes[r]
    inside = _inside_share(kernel.log_pi, log_size, stay, r)
    return BallProfile(r, float(np.exp(log_size)), stay, max(1.0 - inside, 0.0))


def _inside_share(log_pi: np.ndarray, log_size: float, stay_column: np.ndarray, r: int) -> float:
    """Average of w(x, B(r)) over x in B(r); the weights pi(s)/|B(r)| are formed in log space."""
    within = np.exp(log_pi[: r + 1] - log_size)
    return float(within @ stay_column[: r + 1])


def ball_profiles(model: HypercubeModel) -> Tuple[np.ndarray, np.ndarray]:
    """(size_fraction[r], expansion[r]) for every radius r = 0..d.

    Size fractions below the float range read as 0; expansions stay exact.
    """
    kernel = model.kernel
    stay = kernel.stay_matrix
    log_sizes = kernel.log_ball_sizes
    inside = np.array([_inside_share(kernel.log_pi, log_sizes[r], stay[:, r], r) for r in range(model.d + 1)])
    return np.exp(log_sizes), np.maximum(1.0 - inside, 0.0)


class CoordinateCut(NamedTuple):
    size_fraction: float
    expansion: float
    within_eps: bool


def coordinate_cut_expansion(model: HypercubeModel) -> CoordinateCut:
    """{x : x_1 = 0} leaves only when its first coordinate is resampled to another symbol."""
    value = model.eps * (model.k - 1) / model.k
    return CoordinateCut(1.0 / model.k, value, value <= model.eps + 1e-15)


def explicit_ball_weights(model: HypercubeModel, r: int) -> np.ndarray:
    """w(x, B(r)) for every explicit x, by applying the coordinate kernel along each tensor axis."""
    model.require_explicit("explicit_ball_weights")
    weights = hamming_weights(model)
    values = (weights <= r).astype(float).reshape((model.k,) * model.d)
    kernel = coordinate_kernel(model.k, model.eps)
    for axis in range(model.d):
        values = np.moveaxis(np.tensordot(kernel, values, axes=([1], [axis])), 0, axis)
    return values.reshape(-1)


class LevelCheck(NamedTuple):
    holds: bool
    asserted: bool
    max_kernel_error: float
    witness: Optional[Tuple[Tuple[int, ...], Tuple[int, ...], int]]


def level_monotonicity_check(model: HypercubeModel, r: Optional[int] = None) -> LevelCheck:
    """|x| <= |y| implies w(x, B(r)) >= w(y, B(r)) over all explicit pairs, for one or every r.

    Also compares every explicit w(x, B(r)) with the projected stay weight. Outside the
    monotone regime the outcome is recorded but not asserted.
    """
    model.require_explicit("level_monotonicity_check")
    weights = hamming_weights(model)
    stay = model.kernel.stay_matrix
    radii = range(model.d + 1) if r is None else [r]
    worst_error, witness = 0.0, None
    for radius in radii:
        values = explicit_ball_weights(model, radius)
        worst_error = max(worst_error, float(np.abs(values - stay[weights, radius]).max()))
        if witness is not None:
            continue
        low = np.array([values[weights == s].min() for s in range(model.d + 1)])
        high = np.array([values[weights == s].max() for s in range(model.d + 1)])
        for s in range(model.d + 1):
            later = high[s + 1:]
            if later.size and later.max() > low[s] + 1e-12:
                t = s + 1 + int(np.argmax(later))
                x = int(np.nonzero((weights == s) & (values == low[s]))[0][0])
                y = int(np.nonzero((weights == t) & (values == high[t]))[0][0])
                witness = (index_to_string(model, x), index_to_string(model, y), radius)
                break
    holds = witness is None
    if not holds:
        logger.info("level monotonicity fails for (k=%d, d=%d, eps=%g) at %s",
                    model.k, model.d, model.eps, witness)
    return LevelCheck(holds, model.monotone_regime, worst_error, witness)
