"""
Combinatorial gap, robust vertex expansion and the certificates built on them.

For fixed S the best T of volume x is the greedy prefix of d_S, so
max_T w(S, T) = C(d_S, x) and the gap needs only one pass over the subsets of V.
Subset passes are vectorized over blocks of bitmask rows.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Tuple

import numpy as np

from src.errors import CapacityError, DomainError
from src.graph.core import (HALF_TOL, SubsetArgmin, VertexSet, WeightedGraph, as_vertex_set,
                            check_brute_force, cut_weight, small_set_expansion, subset_chunks)
from src.walks.evolving_sets import incoming_profile
from src.walks.lscurve import CurveDominanceParams, curve_of

logger = logging.getLogger(__name__)

INEQUALITY_TOL = 1e-9
SELECTION_TOL = 1e-12


class Method(Enum):
    EXHAUSTIVE = "exhaustive"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class GapCertificate:
    """A value 1 - w(S, T)/vol(S) with the witnesses that achieve it.

    Heuristic certificates are upper bounds on the true gap; fractional witnesses keep
    their selection vectors and list their supports as the witness sets. A vacuous
    certificate has no feasible S (delta n < 1) and carries value 1 with empty witnesses.
    """

    value: float
    witness_s: VertexSet
    witness_t: VertexSet
    method: Method
    fraction_s: Optional[Tuple[float, ...]] = None
    fraction_t: Optional[Tuple[float, ...]] = None
    vacuous: bool = False

    def as_dict(self) -> dict:
        out = {
            "value": self.value,
            "witness_S": list(self.witness_s.members),
            "witness_T": list(self.witness_t.members),
            "method": self.method.value,
            "vacuous": self.vacuous,
        }
        if self.fraction_s is not None:
            out["fraction_S"] = list(self.fraction_s)
            out["fraction_T"] = list(self.fraction_t)
        return out


def batch_curve_values(rows: np.ndarray, deg: np.ndarray, x: np.ndarray) -> np.ndarray:
    """C(rows[r], x[r]) for every row, with breakpoints at cumulative degrees in density order."""
    rows = np.atleast_2d(rows)
    x = np.clip(np.broadcast_to(np.asarray(x, dtype=float), rows.shape[:1]), 0.0, deg.sum())
    density = rows / deg
    order = np.argsort(-density, axis=1, kind="stable")
    sorted_density = np.take_along_axis(density, order, axis=1)
    sorted_deg = deg[order]
    cum_deg = np.concatenate((np.zeros((rows.shape[0], 1)), np.cumsum(sorted_deg, axis=1)), axis=1)
    cum_mass = np.concatenate((np.zeros((rows.shape[0], 1)),
                               np.cumsum(sorted_density * sorted_deg, axis=1)), axis=1)
    n = rows.shape[1]
    segment = (cum_deg[:, 1:] < x[:, None]).sum(axis=1)
    r = np.arange(rows.shape[0])
    full = segment >= n
    segment = np.minimum(segment, n - 1)
    partial = cum_mass[r, segment] + (x - cum_deg[r, segment]) * sorted_density[r, segment]
    return np.where(full, cum_mass[:, n], partial)


def _gap_sweep(graph: WeightedGraph, size_limit: float, max_n: Optional[int]) -> GapCertificate:
    graph.require_unit_regular("comb_gap")
    check_brute_force(graph, max_n, "comb_gap")
    tracker = SubsetArgmin(graph.n)
    for codes, bits in subset_chunks(graph.n):
        sizes = bits.sum(axis=1)
        keep = sizes <= size_limit + HALF_TOL
        if not np.any(keep):
            continue
        bits, codes, sizes = bits[keep], codes[keep], sizes[keep].astype(int)
        d = bits @ graph.weights
        top = np.cumsum(-np.sort(-d, axis=1), axis=1)
        best_t = top[np.arange(d.shape[0]), sizes - 1]
        tracker.offer(1.0 - best_t / sizes, sizes, codes)
    if tracker.members is None:
        logger.info("no nonempty set of %s has size at most %g; the gap is vacuous", graph.name, size_limit)
        empty = VertexSet.of(graph, ())
        return GapCertificate(1.0, empty, empty, Method.EXHAUSTIVE, vacuous=True)
    s = VertexSet.of(graph, tracker.members)
    profile = incoming_profile(graph, s)
    t = VertexSet.of(graph, profile.order[: s.size])
    value = 1.0 - cut_weight(graph, s, t) / s.volume
    return GapCertificate(value, s, t, Method.EXHAUSTIVE)


def comb_gap(graph: WeightedGraph, max_n: Optional[int] = None) -> GapCertificate:
    """min over |S| = |T| <= n/2 of 1 - w(S, T)/|S|; the heuristic answers when n is too large."""
    try:
        certificate = _gap_sweep(graph, graph.n / 2.0, max_n)
    except CapacityError as e:
        logger.warning("%s; falling back to the fractional heuristic", e)
        return comb_gap_fractional(graph)
    logger.debug("comb_gap(%s) = %.6g", graph.name, certificate.value)
    return certificate


def comb_gap_delta(graph: WeightedGraph, delta: float, max_n: Optional[int] = None) -> GapCertificate:
    """Same minimum restricted to |S| <= delta n."""
    if not 0 < delta <= 0.5:
        raise DomainError(f"delta must lie in (0, 1/2], got {delta}")
    try:
        return _gap_sweep(graph, delta * graph.n, max_n)
    except CapacityError as e:
        logger.warning("%s; falling back to the fractional heuristic", e)
        return comb_gap_fractional(graph)


def _fractional_prefix(scores: np.ndarray, deg: np.ndarray, volume: float) -> np.ndarray:
    """Fractional selection of total degree `volume` taking vertices by score/deg, ties by index."""
    density = np.divide(scores, deg, out=np.zeros_like(scores), where=deg > 0)
    order = np.lexsort((np.arange(scores.size), -density))
    selection = np.zeros(scores.size)
    remaining = volume
    for v in order:
        if remaining <= SELECTION_TOL or deg[v] <= 0:
            continue
        take = min(1.0, remaining / deg[v])
        selection[v] = take
        remaining -= take * deg[v]
    return selection


def _volume_levels(graph: WeightedGraph) -> np.ndarray:
    """Prefix volumes of the degree-sorted vertices up to half the total volume."""
    prefix = np.cumsum(np.sort(graph.deg))
    levels = prefix[prefix <= graph.total_volume / 2.0 + HALF_TOL]
    return levels if levels.size else prefix[:1]


def comb_gap_fractional(graph: WeightedGraph, restarts: int = 20, iter_cap: int = 100,
                        seed: int = 0) -> GapCertificate:
    """Alternating maximization of <chi_S, W chi_T> at equal volumes; an upper bound on the gap."""
    if restarts < 1:
        raise DomainError(f"restarts must be >= 1, got {restarts}")
    rng = np.random.default_rng(seed)
    levels = _volume_levels(graph)
    best = None
    for r in range(restarts):
        volume = float(levels[r % levels.size])
        chi_s = _fractional_prefix(rng.random(graph.n) * graph.deg, graph.deg, volume)
        value = np.inf
        chi_t = chi_s
        for _ in range(iter_cap):
            chi_t = _fractional_prefix(graph.weights @ chi_s, graph.deg, volume)
            chi_s_next = _fractional_prefix(graph.weights @ chi_t, graph.deg, volume)
            next_value = 1.0 - float(chi_s_next @ graph.weights @ chi_t) / volume
            if next_value >= value - 1e-15:
                break
            chi_s, value = chi_s_next, next_value
        value = 1.0 - float(chi_s @ graph.weights @ chi_t) / volume
        if best is None or value < best[0] - 1e-15:
            best = (value, chi_s.copy(), chi_t.copy())
    value, chi_s, chi_t = best
    logger.debug("comb_gap_fractional(%s) = %.6g after %d restarts", graph.name, value, restarts)
    return GapCertificate(
        value=max(value, 0.0),
        witness_s=VertexSet.from_mask(graph, chi_s > SELECTION_TOL),
        witness_t=VertexSet.from_mask(graph, chi_t > SELECTION_TOL),
        method=Method.HEURISTIC,
        fraction_s=tuple(float(c) for c in chi_s),
        fraction_t=tuple(float(c) for c in chi_t),
    )


class VertexExpansionProfile(NamedTuple):
    n_half: float
    phi_v: float
    psi_product: float
    expansion: float


def _batch_half_cover(graph: WeightedGraph, bits: np.ndarray):
    """For each set row: (N_1/2, cut, vol) with N_1/2 the volume of outside vertices,
    taken by density q = d_S/deg and the last one fractionally, that covers half the cut."""
    d = bits @ graph.weights
    vol = bits @ graph.deg
    cut = np.maximum(vol - np.einsum("ri,ri->r", d, bits), 0.0)
    density = np.where(bits > 0, -np.inf, d / graph.deg)
    order = np.argsort(-density, axis=1, kind="stable")
    sorted_density = np.take_along_axis(density, order, axis=1)
    outside = np.isfinite(sorted_density)
    sorted_deg = np.where(outside, graph.deg[order], 0.0)
    sorted_mass = np.where(outside, sorted_density, 0.0) * sorted_deg
    cum_mass = np.cumsum(sorted_mass, axis=1)
    cum_deg = np.cumsum(sorted_deg, axis=1)
    half = cut / 2.0
    # first position whose cumulative mass reaches half the cut
    k = np.minimum((cum_mass < half[:, None] - 1e-15).sum(axis=1), graph.n - 1)
    r = np.arange(bits.shape[0])
    prev_mass = np.where(k > 0, cum_mass[r, k - 1], 0.0)
    prev_deg = np.where(k > 0, cum_deg[r, k - 1], 0.0)
    step_density = np.where(outside[r, k], sorted_density[r, k], 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        n_half = prev_deg + np.where(step_density > 0, (half - prev_mass) / step_density, 0.0)
    n_half = np.where(cut > 0, np.maximum(n_half, 0.0), 0.0)
    return n_half, cut, vol


def _profiles_from_cover(n_half, cut, vol):
    zero_cut = cut <= 0
    phi_v = np.where(zero_cut, 1.0, np.minimum(n_half / vol, 1.0))
    phi = cut / vol
    psi = np.where(zero_cut, 0.0, phi * phi_v)
    return phi_v, psi, phi


def vertex_profile(graph: WeightedGraph, s, form: str = "auto") -> VertexExpansionProfile:
    """N_1/2(S), phi^V(S) = min(N_1/2 / vol(S), 1) and Psi(S) = phi(S) phi^V(S).

    form='set' takes outside vertices greedily by density; form='curve' inverts
    C(d_S, vol(S) + x) - C(d_S, vol(S)), which agrees with the set form on lazy graphs.
    'auto' picks the curve form on lazy graphs.
    """
    s = as_vertex_set(graph, s)
    if not s.members:
        raise DomainError("vertex_profile needs a nonempty set")
    if s.volume > graph.total_volume / 2.0 + HALF_TOL:
        raise DomainError(f"vol(S)={s.volume:g} exceeds half the total volume")
    if form == "auto":
        form = "curve" if graph.lazy else "set"
    if form == "set":
        n_half, cut, vol = _batch_half_cover(graph, s.mask(graph.n)[None, :].astype(float))
        n_half, cut, vol = float(n_half[0]), float(cut[0]), float(vol[0])
    elif form == "curve":
        profile = incoming_profile(graph, s)
        curve = curve_of(graph, profile.d_s)
        vol = s.volume
        cut = max(vol - float(profile.d_s[list(s.members)].sum()), 0.0)
        n_half = curve.first_reach(curve(vol) + cut / 2.0) - vol if cut > 0 else 0.0
        n_half = max(n_half, 0.0)
    else:
        raise DomainError(f"unknown vertex profile form {form!r}")
    phi_v, psi, phi = _profiles_from_cover(np.array([n_half]), np.array([cut]), np.array([vol]))
    return VertexExpansionProfile(n_half, float(phi_v[0]), float(psi[0]), float(phi[0]))


def _profile_sweep(graph: WeightedGraph, max_n: Optional[int], operation: str):
    """Yield (codes, bits, sizes, phi_v, psi, phi, vol) over every set of at most half the volume."""
    check_brute_force(graph, max_n, operation)
    for codes, bits in subset_chunks(graph.n):
        vol = bits @ graph.deg
        keep = (vol > 0) & (vol <= graph.total_volume / 2.0 + HALF_TOL)
        if not np.any(keep):
            continue
        bits, codes = bits[keep], codes[keep]
        n_half, cut, vol = _batch_half_cover(graph, bits)
        phi_v, psi, phi = _profiles_from_cover(n_half, cut, vol)
        yield codes, bits, bits.sum(axis=1).astype(int), phi_v, psi, phi, vol


def psi_graph(graph: WeightedGraph, max_n: Optional[int] = None) -> Tuple[float, VertexSet]:
    """min over small S of phi(S) phi^V(S), with the argmin."""
    tracker = SubsetArgmin(graph.n)
    for codes, _, sizes, _, psi, _, _ in _profile_sweep(graph, max_n, "psi_graph"):
        tracker.offer(psi, sizes, codes)
    return tracker.value, VertexSet.of(graph, tracker.members)


def vertex_expansion_graph(graph: WeightedGraph, max_n: Optional[int] = None) -> Tuple[float, VertexSet]:
    """min over small S of phi^V(S), with the argmin."""
    tracker = SubsetArgmin(graph.n)
    for codes, _, sizes, phi_v, _, _, _ in _profile_sweep(graph, max_n, "vertex_expansion_graph"):
        tracker.offer(phi_v, sizes, codes)
    return tracker.value, VertexSet.of(graph, tracker.members)


def certified_graph_pair(graph: WeightedGraph, max_n: Optional[int] = None) -> CurveDominanceParams:
    """(1 + phi^V(G), 1 - phi(G)/2); on lazy graphs it satisfies the curve hypothesis for every small S."""
    phi_v, _ = vertex_expansion_graph(graph, max_n)
    phi, _ = small_set_expansion(graph, 0.5, max_n)
    if phi <= 0:
        raise DomainError(f"{graph.name} has a zero-expansion set; no certified pair exists")
    return CurveDominanceParams(1.0 + phi_v, 1.0 - phi / 2.0)


class HypothesisResult(NamedTuple):
    holds: bool
    max_violation: float
    witness: Optional[VertexSet]


def curve_hypothesis_check(graph: WeightedGraph, a: Optional[float] = None, b: Optional[float] = None,
                           max_n: Optional[int] = None, tol: float = INEQUALITY_TOL) -> HypothesisResult:
    """Check C(d_S, a vol(S)) <= b vol(S) over every S of at most half the volume.

    Without (a, b) each set is checked against its own pair (1 + phi^V(S), 1 - phi(S)/2).
    """
    per_set = a is None and b is None
    if not per_set and (a is None or b is None):
        raise DomainError("give both a and b, or neither for the per-set pair")
    worst, witness = -np.inf, None
    for codes, bits, _, phi_v, _, phi, vol in _profile_sweep(graph, max_n, "curve_hypothesis_check"):
        a_rows = 1.0 + phi_v if per_set else np.full(vol.shape, a)
        b_rows = 1.0 - phi / 2.0 if per_set else np.full(vol.shape, b)
        curve = batch_curve_values(bits @ graph.weights, graph.deg, a_rows * vol)
        excess = curve - b_rows * vol
        r = int(np.argmax(excess))
        if excess[r] > worst:
            worst = float(excess[r])
            witness = VertexSet.from_mask(graph, bits[r] > 0)
    holds = worst <= tol
    return HypothesisResult(holds, max(worst, 0.0), None if holds else witness)


def relation_check(graph: WeightedGraph, delta: float, max_n: Optional[int] = None) -> Tuple[float, float]:
    """(comb_gap_delta(G, delta/2), small_set_expansion(G, delta)/2); the first dominates.

    When delta n / 2 < 1 the left side is vacuous and reads 1.
    """
    lhs = comb_gap_delta(graph, delta / 2.0, max_n).value
    rhs = small_set_expansion(graph, delta, max_n)[0] / 2.0
    return lhs, rhs
