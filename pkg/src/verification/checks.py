"""
Named verification checks.

Every check is a function of a CheckContext (battery, seed, tolerances) that returns
a CheckResult with the worst violation it measured and a witness for it. Checks
marked asserted=False only report measurements. Each check draws from its own
seed stream, so results do not depend on which other checks run or in what order.
"""

import logging
import math
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Callable, Dict, Iterator, List, Optional

import numpy as np
from scipy.stats import chisquare

from src.config_loader import ConfigLoader, get_config
from src.errors import UsageError
from src.gaps.measures import (certified_graph_pair, comb_gap, comb_gap_fractional, curve_hypothesis_check,
                               relation_check, vertex_profile)
from src.graph.core import VertexSet, WeightedGraph, expansion, graph_power, small_set_expansion
from src.graph.generators import hypercube_explicit
from src.hypercube.counterexample import (EMPTY_RADIUS, CertifiedCap, ball_transition_law, certified_ball_cap,
                                          counterexample_report, esp_on_balls)
from src.hypercube.model import (HypercubeModel, ball_profile, ball_profiles, coordinate_cut_expansion,
                                 hamming_weights, level_monotonicity_check, weight_chain)
from src.verification.battery import BatteryGraph, lazy, regular
from src.walks.evolving_sets import (esp_local_partition, esp_transition_distribution, gauge_exact,
                                     gauge_monte_carlo, incoming_profile, mp_identity_check, sample_transition_counts,
                                     snapped_levels, threshold_conditionals, volume_biased_law)
from src.walks.lscurve import (CurveDominanceParams, chord_slack, convergence_envelope, curve_of,
                               dominance_slack, gap_envelope)
from src.walks.random_walk import mixing_time, walk_vectors

logger = logging.getLogger(__name__)

# p-value of a two-sided 4-sigma normal deviation
FIDELITY_PVALUE = 6.3e-5


@dataclass
class CheckResult:
    name: str
    passed: bool
    cases: int
    max_violation: float
    asserted: bool = True
    witness: Optional[str] = None
    details: Dict[str, Any] = field(default_factory=dict)
    label: Optional[str] = None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "label": self.label,
            "passed": self.passed,
            "asserted": self.asserted,
            "cases": self.cases,
            "max_violation": self.max_violation,
            "witness": self.witness,
            "details": self.details,
        }


@dataclass
class CheckContext:
    battery: List[BatteryGraph]
    seed: int
    config: ConfigLoader = field(default_factory=get_config)

    @property
    def tol(self) -> float:
        return self.config.get("tolerances.inequality", 1e-9)

    @property
    def identity_tol(self) -> float:
        return self.config.get("tolerances.identity", 1e-12)

    def setting(self, key: str, default):
        return self.config.get(f"verify.{key}", default)

    def rng(self, name: str) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence([self.seed, zlib.crc32(name.encode())]))

    def hypercube_model(self) -> HypercubeModel:
        spec = self.setting("hypercube", {}) or {}
        return HypercubeModel(int(spec.get("k", 8)), int(spec.get("dim", 128)), float(spec.get("eps", 0.1)))


class Tally:
    """Counts cases and keeps the most negative slack with its witness."""

    def __init__(self, name: str, tol: float):
        self.name = name
        self.tol = tol
        self.cases = 0
        self.worst = 0.0
        self.witness = None

    def slack(self, value: float, witness: str) -> None:
        self.cases += 1
        if -value > self.worst:
            self.worst = -float(value)
            self.witness = witness

    def result(self, details: Optional[dict] = None, asserted: bool = True) -> CheckResult:
        passed = self.worst <= self.tol
        return CheckResult(self.name, passed or not asserted, self.cases, self.worst, asserted,
                           None if passed else self.witness, details or {})


CHECKS: Dict[str, Callable[[CheckContext], CheckResult]] = {}


def register(name: str):
    def decorator(fn):
        CHECKS[name] = fn
        return fn
    return decorator


@lru_cache(maxsize=None)
def _gap(graph: WeightedGraph) -> float:
    return comb_gap(graph).value


@lru_cache(maxsize=None)
def _phi(graph: WeightedGraph) -> float:
    return small_set_expansion(graph, 0.5)[0]


@lru_cache(maxsize=None)
def _graph_pair(graph: WeightedGraph) -> Optional[CurveDominanceParams]:
    if not graph.is_connected():
        return None
    return certified_graph_pair(graph)


def _small_sets(graph: WeightedGraph) -> Iterator[VertexSet]:
    for code in range(1, 1 << graph.n):
        members = [i for i in range(graph.n) if (code >> i) & 1]
        s = VertexSet.of(graph, members)
        if s.volume <= graph.total_volume / 2.0 + 1e-9:
            yield s


def _random_vectors(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Normalized exponentials: strictly positive probability vectors."""
    draws = rng.exponential(size=(count, n))
    return draws / draws.sum(axis=1, keepdims=True)


def _label(entry: BatteryGraph, **extra) -> str:
    return entry.name + "".join(f" {k}={v}" for k, v in extra.items())


@register("chord-drop")
def check_chord_drop(ctx: CheckContext) -> CheckResult:
    """C(Ap, x) below the chord at x(1 -+ gap); the classical form with phi(G) on lazy graphs."""
    tally = Tally("chord-drop", ctx.tol)
    rng = ctx.rng("chord-drop")
    count = ctx.setting("random_vectors", 25)
    classical = 0
    for entry in regular(ctx.battery):
        g = entry.graph
        phi_bar = _gap(g)
        for j, p in enumerate(_random_vectors(rng, count, g.n)):
            for x in range(1, g.n // 2 + 1):
                tally.slack(chord_slack(g, p, x, phi_bar), _label(entry, p=j, x=x))
                if g.lazy:
                    tally.slack(chord_slack(g, p, x, _phi(g)), _label(entry, p=j, x=x, form="classical"))
                    classical += 1
    return tally.result({"classical_cases": classical})


@register("upper-area-drop")
def check_upper_area_drop(ctx: CheckContext) -> CheckResult:
    """(Ap)(S) <= 1/2 (C(p, 2x) + C(p, 2(|S| - x))) with x the upper area above 1/2."""
    tally = Tally("upper-area-drop", ctx.tol)
    rng = ctx.rng("upper-area-drop")
    for entry in regular(ctx.battery):
        g = entry.graph
        vectors = _random_vectors(rng, 3, g.n)
        curves = [curve_of(g, p) for p in vectors]
        stepped = vectors @ g.weights
        for s in _small_sets(g):
            x = incoming_profile(g, s).upper_area(0.5)
            for j, curve in enumerate(curves):
                lhs = stepped[j, list(s.members)].sum()
                rhs = 0.5 * (curve(2 * x) + curve(2 * (s.size - x)))
                tally.slack(rhs - lhs, _label(entry, S=s.members, p=j))
    return tally.result()


@register("upper-area-bound")
def check_upper_area_bound(ctx: CheckContext) -> CheckResult:
    """sum_i max(d_S(i) - 1/2, 0) <= (1 - gap) |S| / 2."""
    tally = Tally("upper-area-bound", ctx.tol)
    for entry in regular(ctx.battery):
        g = entry.graph
        phi_bar = _gap(g)
        for s in _small_sets(g):
            area = incoming_profile(g, s).upper_area(0.5)
            tally.slack((1.0 - phi_bar) * s.size / 2.0 - area, _label(entry, S=s.members))
    return tally.result()


@register("gauge-gap")
def check_gauge_gap(ctx: CheckContext) -> CheckResult:
    """psi(S) >= gap^2 / 8 for every small S."""
    tally = Tally("gauge-gap", ctx.tol)
    for entry in regular(ctx.battery):
        g = entry.graph
        bound = _gap(g) ** 2 / 8.0
        for s in _small_sets(g):
            tally.slack(gauge_exact(g, s) - bound, _label(entry, S=s.members))
    return tally.result()


@register("threshold-identity")
def check_threshold_identity(ctx: CheckContext) -> CheckResult:
    """t E[vol(S~) | U <= t] = sum deg min(t, q) on a 99-point grid, and the upper-area twin."""
    tally = Tally("threshold-identity", ctx.identity_tol)
    grid = np.arange(1, 100) / 100.0
    for entry in regular(ctx.battery):
        g = entry.graph
        for code in range(1, 1 << g.n):
            s = VertexSet.of(g, [i for i in range(g.n) if (code >> i) & 1])
            lhs, rhs = mp_identity_check(g, s, grid)
            r = int(np.argmax(np.abs(lhs - rhs)))
            tally.slack(-abs(lhs[r] - rhs[r]), _label(entry, S=s.members, t=grid[r]))
            q = snapped_levels(g, s)
            for t in (0.25, 0.5, 0.75):
                _, above = threshold_conditionals(g, s, t)
                upper = float((g.deg * np.maximum(q - t, 0.0)).sum())
                tally.slack(-abs(above - upper), _label(entry, S=s.members, t=t, side="upper"))
    return tally.result()


@register("gap-relation")
def check_gap_relation(ctx: CheckContext) -> CheckResult:
    """gap_{delta/2} >= phi_delta / 2; gap <= phi; bipartite graphs have zero gap."""
    tally = Tally("gap-relation", ctx.tol)
    vacuous = []
    for entry in regular(ctx.battery):
        g = entry.graph
        deltas = [0.5] + ([0.25] if g.n >= 8 else [])
        for delta in deltas:
            if not _relation_feasible(g, delta):
                vacuous.append(_label(entry, delta=delta))
                continue
            lhs, rhs = relation_check(g, delta)
            tally.slack(lhs - rhs, _label(entry, delta=delta))
        tally.slack(_phi(g) - _gap(g), _label(entry, relation="gap<=phi"))
        if g.is_bipartite():
            tally.slack(-abs(_gap(g)), _label(entry, relation="bipartite"))
    return tally.result({"vacuous": vacuous})


def _relation_feasible(graph: WeightedGraph, delta: float) -> bool:
    """Some nonempty S has |S| <= delta n / 2."""
    return delta * graph.n / 2.0 >= 1.0


@register("power-chain")
def check_power_chain(ctx: CheckContext) -> CheckResult:
    """On G^t for t in {1, 2, 4}: the gap relation, the chord drop and the gap envelope."""
    tally = Tally("power-chain", ctx.tol)
    rng = ctx.rng("power-chain")
    steps = ctx.setting("envelope_steps", 50)
    vacuous = []
    for entry in regular(ctx.battery):
        if not entry.graph.is_connected():
            continue
        for t in (1, 2, 4):
            gt = graph_power(entry.graph, t)
            phi_bar = _gap(gt)
            if _relation_feasible(gt, 0.5):
                lhs, rhs = relation_check(gt, 0.5)
                tally.slack(lhs - rhs, _label(entry, power=t, step="relation"))
            else:
                vacuous.append(_label(entry, power=t))
            for j, p in enumerate(_random_vectors(rng, 3, gt.n)):
                for x in range(1, gt.n // 2 + 1):
                    tally.slack(chord_slack(gt, p, x, phi_bar), _label(entry, power=t, p=j, x=x))
                vectors = walk_vectors(gt, p, steps)
                xs = np.arange(1, gt.n + 1)
                for s in range(steps + 1):
                    values = curve_of(gt, vectors[s])(xs)
                    bounds = np.array([gap_envelope(phi_bar, s, x, gt.n) for x in xs])
                    r = int(np.argmin(bounds - values))
                    tally.slack(bounds[r] - values[r], _label(entry, power=t, p=j, step=s, x=int(xs[r])))
    return tally.result({"vacuous": vacuous})


@register("vertex-profile")
def check_vertex_profile(ctx: CheckContext) -> CheckResult:
    """On lazy graphs every S satisfies C(d_S, (1 + phi^V(S))|S|) <= (1 - phi(S)/2)|S|,
    and the set and curve forms of N_1/2 agree."""
    tally = Tally("vertex-profile", ctx.tol)
    for entry in lazy(ctx.battery):
        g = entry.graph
        outcome = curve_hypothesis_check(g)
        tally.slack(-outcome.max_violation, _label(entry, witness=outcome.witness and outcome.witness.members))
        for s in _small_sets(g):
            by_set = vertex_profile(g, s, form="set").n_half
            by_curve = vertex_profile(g, s, form="curve").n_half
            tally.slack(-abs(by_set - by_curve), _label(entry, S=s.members, forms="set/curve"))
    return tally.result()


@register("dominance-drop")
def check_dominance_drop(ctx: CheckContext) -> CheckResult:
    """Dominance drop and upper-area bound with the certified pair; the gap pair is
    checked wherever its curve hypothesis holds."""
    tally = Tally("dominance-drop", ctx.tol)
    rng = ctx.rng("dominance-drop")
    count = ctx.setting("random_vectors", 25)
    for entry in lazy(ctx.battery):
        g = entry.graph
        params = _graph_pair(g)
        if params is None:
            continue
        hypothesis = curve_hypothesis_check(g, params.a, params.b)
        tally.slack(-hypothesis.max_violation, _label(entry, step="hypothesis"))
        for j, p in enumerate(_random_vectors(rng, count, g.n)):
            for x in range(1, g.n // 2 + 1):
                tally.slack(dominance_slack(g, p, x, params), _label(entry, p=j, x=x))
        for s in _small_sets(g):
            area = incoming_profile(g, s).upper_area(params.threshold)
            tally.slack(params.upper_area_bound * s.size - area, _label(entry, S=s.members, step="area"))

    gap_pairs = 0
    for entry in lazy(ctx.battery):
        g = entry.graph
        phi_bar = _gap(g)
        if not 0 < phi_bar < 1:
            continue
        params = CurveDominanceParams(1.0 + phi_bar, 1.0 - phi_bar)
        if not curve_hypothesis_check(g, params.a, params.b).holds:
            continue
        gap_pairs += 1
        for j, p in enumerate(_random_vectors(rng, 5, g.n)):
            for x in range(1, g.n // 2 + 1):
                tally.slack(dominance_slack(g, p, x, params), _label(entry, p=j, x=x, pair="gap"))
                tally.slack(chord_slack(g, p, x, phi_bar), _label(entry, p=j, x=x, pair="chord"))
    return tally.result({"graphs_with_gap_pair": gap_pairs})


@register("dominance-envelope")
def check_dominance_envelope(ctx: CheckContext) -> CheckResult:
    """C(A^t p, x) <= x/n + sqrt(min(x, n - x)) (1 - decay)^t with the certified pair."""
    tally = Tally("dominance-envelope", ctx.tol)
    rng = ctx.rng("dominance-envelope")
    steps = ctx.setting("envelope_steps", 50)
    for entry in lazy(ctx.battery):
        g = entry.graph
        params = _graph_pair(g)
        if params is None:
            continue
        xs = np.arange(1, g.n)
        for j, p in enumerate(_random_vectors(rng, 5, g.n)):
            vectors = walk_vectors(g, p, steps)
            for t in range(steps + 1):
                values = curve_of(g, vectors[t])(xs)
                bounds = np.array([convergence_envelope(params, 1.0, t, x, g.n) for x in xs])
                r = int(np.argmin(bounds - values))
                tally.slack(bounds[r] - values[r], _label(entry, p=j, t=t, x=int(xs[r])))
    return tally.result()


@register("gauge-vertex")
def check_gauge_vertex(ctx: CheckContext) -> CheckResult:
    """On lazy graphs psi(S) >= Psi(S)/18, and psi(S) >= decay(a, b) for the certified pair."""
    tally = Tally("gauge-vertex", ctx.tol)
    for entry in lazy(ctx.battery):
        g = entry.graph
        params = _graph_pair(g)
        for s in _small_sets(g):
            psi = gauge_exact(g, s)
            tally.slack(psi - vertex_profile(g, s).psi_product / 18.0, _label(entry, S=s.members))
            if params is not None:
                tally.slack(psi - params.decay, _label(entry, S=s.members, bound="decay"))
    return tally.result()


@register("coordinate-cut")
def check_coordinate_cut(ctx: CheckContext) -> CheckResult:
    """{x : x_1 = 0} has size fraction 1/k and expansion eps (k-1)/k <= eps."""
    tally = Tally("coordinate-cut", ctx.identity_tol)
    model = ctx.hypercube_model()
    cut = coordinate_cut_expansion(model)
    tally.slack(model.eps - cut.expansion, f"k={model.k} eps={model.eps}")
    for k, d, eps in ((2, 3, 0.2), (3, 2, 0.3), (2, 4, 0.5), (4, 2, 0.1)):
        small = HypercubeModel(k, d, eps)
        g = hypercube_explicit(k, d, eps)
        first = VertexSet.of(g, range(g.n // k))
        explicit = expansion(g, first)
        tally.slack(-abs(explicit - coordinate_cut_expansion(small).expansion), f"explicit k={k} d={d} eps={eps}")
    return tally.result({"size_fraction": cut.size_fraction, "expansion": cut.expansion})


def _explicit_instances():
    for d in range(1, 9):
        yield 2, d
    for d in range(1, 6):
        yield 3, d


@register("ball-monotonicity")
def check_ball_monotonicity(ctx: CheckContext) -> CheckResult:
    """w(x, B(r)) nonincreasing in |x|: exhaustive on explicit cubes, over all weights on the large model."""
    tally = Tally("ball-monotonicity", ctx.identity_tol)
    for k, d in _explicit_instances():
        for eps in (0.1, 0.3, 0.5):
            outcome = level_monotonicity_check(HypercubeModel(k, d, eps))
            tally.slack(0.0 if outcome.holds else -1.0, f"k={k} d={d} eps={eps} witness={outcome.witness}")
            tally.slack(-outcome.max_kernel_error, f"k={k} d={d} eps={eps} kernel")
    model = ctx.hypercube_model()
    stay = model.kernel.stay_matrix
    rise = np.diff(stay, axis=0)
    worst = np.unravel_index(int(np.argmax(rise)), rise.shape)
    tally.slack(-max(float(rise.max()), 0.0), f"k={model.k} d={model.d} s={worst[0]} r={worst[1]}")
    exploring = level_monotonicity_check(HypercubeModel(2, 4, 0.9, explore=True))
    return tally.result({"explore_eps_0.9_holds": exploring.holds})


def _ball_threshold(ctx: CheckContext, model: HypercubeModel) -> float:
    configured = (ctx.setting("hypercube", {}) or {}).get("ball_threshold")
    return 1.0 - model.eps if configured is None else float(configured)


def _ball_cap(ctx: CheckContext, model: HypercubeModel) -> CertifiedCap:
    return certified_ball_cap(model, _ball_threshold(ctx, model))


@register("ball-expansion")
def check_ball_expansion(ctx: CheckContext) -> CheckResult:
    """Every proper Hamming ball up to the certified size cap expands by at least the threshold.

    The single-radius profile must agree with the batched one on every ball, and the
    minimum expansion at the reference cap is reported.
    """
    tally = Tally("ball-expansion", ctx.tol)
    model = ctx.hypercube_model()
    sizes, expansions = ball_profiles(model)
    threshold = _ball_threshold(ctx, model)
    certified = _ball_cap(ctx, model)
    tally.slack(0.0 if certified.radius != EMPTY_RADIUS else -1.0, f"no ball expands by {threshold:g}")
    for r in range(certified.radius + 1):
        tally.slack(expansions[r] - threshold, f"r={r} size={sizes[r]:.3e}")
        tally.slack(-abs(ball_profile(model, r).expansion - expansions[r]), f"r={r} single-radius profile")

    reference = float((ctx.setting("hypercube", {}) or {}).get("reference_cap", 0.01))
    at_reference = [float(expansions[r]) for r in range(model.d) if sizes[r] <= reference]
    trend = {}
    for d in (32, 64, 128):
        s, e = ball_profiles(HypercubeModel(model.k, d, model.eps))
        inside = [float(e[r]) for r in range(d) if s[r] <= certified.cap]
        trend[str(d)] = min(inside) if inside else None
    return tally.result({
        "threshold": threshold,
        "size_cap": certified.cap,
        "cap_radius": certified.radius,
        "reference_cap": reference,
        "min_expansion_at_reference_cap": min(at_reference) if at_reference else None,
        "min_expansion_by_dim": trend,
    })


def _ball_radius_of(successor: VertexSet, weights: np.ndarray) -> Optional[int]:
    if not successor.members:
        return -1
    mask = successor.mask(weights.size)
    radius = int(weights[mask].max())
    return radius if np.array_equal(mask, weights <= radius) else None


@register("hypercube-counterexample")
def check_hypercube_counterexample(ctx: CheckContext) -> CheckResult:
    """Sparse coordinate cut, expanding small balls, and local processes that only see balls."""
    tally = Tally("hypercube-counterexample", ctx.tol)
    model = ctx.hypercube_model()
    threshold = _ball_threshold(ctx, model)
    certified = _ball_cap(ctx, model)
    report = None
    if certified.radius == EMPTY_RADIUS:
        tally.slack(-1.0, f"no ball expands by {threshold:g}")
    else:
        report = counterexample_report(model, certified.cap, threshold=threshold)
        tally.slack(0.0 if report.passes else -1.0, f"min ball expansion {report.min_ball_expansion}")
    tally.slack(model.eps - coordinate_cut_expansion(model).expansion, "coordinate cut")

    small = HypercubeModel(2, 3, 0.2)
    g = hypercube_explicit(small.k, small.d, small.eps)
    weights = hamming_weights(small)
    run = esp_local_partition(g, 0, step_cap=50, size_budget=g.n / 2, phi_target=-1.0, seed=ctx.seed)
    for step in run.trajectory.steps:
        ok = _ball_radius_of(step.vertex_set, weights) is not None
        tally.slack(0.0 if ok else -1.0, f"esp step {step.step} set {step.vertex_set.members}")
    for t, vector in enumerate(walk_vectors(g, np.eye(g.n)[0], 10)):
        by_weight = [vector[weights == s] for s in range(small.d + 1)]
        spread = max(float(v.max() - v.min()) for v in by_weight)
        tally.slack(-spread, f"walk step {t} not constant on weight classes")
        means = [float(v.mean()) for v in by_weight]
        tally.slack(-max(max(np.diff(means)), 0.0), f"walk step {t} increases with weight")
    for r in range(small.d + 1):
        ball = VertexSet.of(g, np.nonzero(weights <= r)[0])
        explicit: Dict[int, float] = {}
        for atom in esp_transition_distribution(g, ball).atoms:
            radius = _ball_radius_of(atom.successor, weights)
            if radius is None:
                tally.slack(-1.0, f"explicit successor of B({r}) is not a ball")
                continue
            explicit[radius] = explicit.get(radius, 0.0) + atom.probability
        law = ball_transition_law(small, r)
        for radius in set(law) | set(explicit):
            tally.slack(-abs(law.get(radius, 0.0) - explicit.get(radius, 0.0)), f"ball law r={r} -> {radius}")

    rng = ctx.rng("hypercube-counterexample")
    chain = HypercubeModel(8, 64, 0.1)
    law = ball_transition_law(chain, 0)
    draws = 1000
    counts: Dict[int, int] = {}
    for _ in range(draws):
        nxt = esp_on_balls(chain, 1, rng).radii[-1]
        counts[nxt] = counts.get(nxt, 0) + 1
    pvalue = _fidelity_pvalue(np.array([counts.get(s, 0) for s in law]), np.array(list(law.values())), draws)
    stray = sum(c for s, c in counts.items() if s not in law)
    tally.slack(0.0 if pvalue >= FIDELITY_PVALUE and stray == 0 else -1.0, f"ball chain p-value {pvalue:.3g}")
    return tally.result({"report": report.as_dict() if report else None, "ball_chain_pvalue": pvalue})


def _fidelity_pvalue(counts: np.ndarray, probabilities: np.ndarray, draws: int) -> float:
    """Chi-square goodness of fit, rare categories pooled until the pool is expected 5 times.

    A single remaining category passes when it took every draw.
    """
    expected = draws * probabilities / probabilities.sum()
    order = np.argsort(expected)
    cut = 0
    if expected.min() < 5.0:
        cut = min(int(np.searchsorted(np.cumsum(expected[order]), 5.0)) + 1, order.size)
    pool, rest = order[:cut], order[cut:]
    observed, wanted = counts[rest].astype(float), expected[rest]
    if pool.size:
        observed = np.append(observed, counts[pool].sum())
        wanted = np.append(wanted, expected[pool].sum())
    if observed.size <= 1:
        return 1.0 if counts.sum() == draws else 0.0
    return float(chisquare(observed, wanted).pvalue)


@register("mixing-bound")
def check_mixing_bound(ctx: CheckContext) -> CheckResult:
    """Connected non-bipartite graphs mix within ceil(8 ln(4n) / gap^2); bipartite ones never mix."""
    tally = Tally("mixing-bound", ctx.tol)
    times = {}
    for entry in regular(ctx.battery):
        g = entry.graph
        if not g.is_connected():
            continue
        if g.is_bipartite():
            result = mixing_time(g, cap=200)
            tally.slack(0.0 if not result.mixed else -1.0, _label(entry, expected="unmixed"))
            times[entry.name] = str(result)
            continue
        bound = math.ceil(8.0 * math.log(4 * g.n) / _gap(g) ** 2)
        result = mixing_time(g, cap=bound)
        tally.slack(0.0 if result.mixed else -1.0, _label(entry, bound=bound))
        times[entry.name] = str(result)
    return tally.result({"mixing_times": times})


@register("gap-envelope")
def check_gap_envelope(ctx: CheckContext) -> CheckResult:
    """C(A^t p, x) <= x/n + sqrt(x) (1 - gap^2/8)^t on non-bipartite graphs."""
    tally = Tally("gap-envelope", ctx.tol)
    rng = ctx.rng("gap-envelope")
    steps = ctx.setting("envelope_steps", 50)
    for entry in regular(ctx.battery):
        g = entry.graph
        if g.is_bipartite():
            continue
        phi_bar = _gap(g)
        xs = np.arange(1, g.n + 1)
        for j, p in enumerate(_random_vectors(rng, 5, g.n)):
            vectors = walk_vectors(g, p, steps)
            for t in range(steps + 1):
                values = curve_of(g, vectors[t])(xs)
                bounds = np.array([gap_envelope(phi_bar, t, x, g.n) for x in xs])
                r = int(np.argmin(bounds - values))
                tally.slack(bounds[r] - values[r], _label(entry, p=j, t=t, x=int(xs[r])))
    return tally.result()


def _sampler_pairs(ctx: CheckContext):
    max_n = int(ctx.setting("sampler_max_n", 8))
    for entry in regular(ctx.battery, max_n=max_n):
        for s in _small_sets(entry.graph):
            yield entry, s


@register("sampler-fidelity")
def check_sampler_fidelity(ctx: CheckContext) -> CheckResult:
    """Sampled atom frequencies of both samplers against their exact laws, on every small S.

    The 4-sigma level holds for the whole family of tests (Bonferroni), not for each one.
    """
    tally = Tally("sampler-fidelity", 0.0)
    rng = ctx.rng("sampler-fidelity")
    draws = ctx.setting("sampler_draws", 10000)
    pairs = list(_sampler_pairs(ctx))
    level = FIDELITY_PVALUE / max(2 * len(pairs), 1)
    lowest = 1.0
    for entry, s in pairs:
        g = entry.graph
        transition = esp_transition_distribution(g, s)
        plain = sample_transition_counts(g, s, draws, rng)
        probabilities = np.array([atom.probability for atom in transition.atoms])
        pvalue = _fidelity_pvalue(plain, probabilities, draws)
        lowest = min(lowest, pvalue)
        tally.slack(0.0 if pvalue >= level else -1.0, _label(entry, S=s.members, p=f"{pvalue:.3g}"))

        biased = sample_transition_counts(g, s, draws, rng, volume_biased=True)
        weights = np.array([atom.successor.volume / s.volume * atom.probability for atom in transition.atoms])
        support = weights > 0
        pvalue = _fidelity_pvalue(biased[support], weights[support], draws)
        lowest = min(lowest, pvalue)
        ok = pvalue >= level and biased[~support].sum() == 0
        tally.slack(0.0 if ok else -1.0, _label(entry, S=s.members, p=f"{pvalue:.3g}", sampler="volume-biased"))
        total = sum(mass for _, mass in volume_biased_law(transition))
        normalized = abs(total - 1.0) <= ctx.identity_tol
        tally.slack(0.0 if normalized else -1.0, _label(entry, S=s.members, law="normalization"))
    return tally.result({"pairs": len(pairs), "draws_per_pair": draws, "pvalue_level": level,
                         "min_pvalue": lowest})


@register("gauge-monte-carlo")
def check_gauge_monte_carlo(ctx: CheckContext) -> CheckResult:
    """Monte Carlo gauge within 4 stderr everywhere and within 3 stderr on at least 47 of 50 pairs."""
    rng = ctx.rng("gauge-monte-carlo")
    pairs = ctx.setting("gauge_pairs", 50)
    trials = ctx.setting("gauge_trials", 20000)
    candidates = [(entry, s) for entry in regular(ctx.battery) for s in _small_sets(entry.graph)]
    picks = rng.choice(len(candidates), size=min(pairs, len(candidates)), replace=False)
    scores, worst, witness = [], 0.0, None
    for i in sorted(picks):
        entry, s = candidates[i]
        exact = gauge_exact(entry.graph, s)
        estimate = gauge_monte_carlo(entry.graph, s, trials, seed=int(rng.integers(2 ** 32)))
        gap = abs(estimate.mean - exact)
        z = 0.0 if gap <= 1e-12 else (gap / estimate.stderr if estimate.stderr else math.inf)
        scores.append(z)
        if z > worst:
            worst, witness = z, _label(entry, S=s.members)
    within3 = sum(z <= 3.0 for z in scores)
    needed = math.ceil(0.94 * len(scores))
    passed = worst <= 4.0 and within3 >= needed
    return CheckResult("gauge-monte-carlo", passed, len(scores), max(worst - 4.0, 0.0), True,
                       None if passed else witness,
                       {"max_z": worst, "within_3_stderr": within3, "required": needed})


@register("hypercube-agreement")
def check_hypercube_agreement(ctx: CheckContext) -> CheckResult:
    """Explicit and projected hypercubes agree; the weight chain is stochastic, stationary and reversible."""
    tally = Tally("hypercube-agreement", ctx.identity_tol)
    expansion_tally = Tally("hypercube-agreement", ctx.tol)
    for k, d in [(2, d) for d in range(1, 10)] + [(3, d) for d in range(1, 7)]:
        model = HypercubeModel(k, d, 0.3)
        outcome = level_monotonicity_check(model)
        tally.slack(-outcome.max_kernel_error, f"k={k} d={d} ball weights")
        g = hypercube_explicit(k, d, 0.3)
        weights = hamming_weights(model)
        _, projected = ball_profiles(model)
        for r in range(d + 1):
            ball = VertexSet.of(g, np.nonzero(weights <= r)[0])
            explicit = expansion(g, ball, enforce_half=False)
            expansion_tally.slack(-abs(explicit - projected[r]), f"k={k} d={d} r={r} expansion")
    for model in (ctx.hypercube_model(), HypercubeModel(8, 200, 0.1), HypercubeModel(3, 40, 0.5)):
        kernel = model.kernel
        tally.slack(-float(np.abs(kernel.P.sum(axis=1) - 1.0).max()), f"{model} row sums")
        tally.slack(-float(np.abs(kernel.pi @ kernel.P - kernel.pi).max()), f"{model} stationarity")
        flow = kernel.pi[:, None] * kernel.P
        tally.slack(-float(np.abs(flow - flow.T).max()), f"{model} reversibility")
    pinned = HypercubeModel(8, 500, 0.1)
    linear = weight_chain(pinned, logspace_threshold=10 ** 6).P
    logspace = weight_chain(pinned, logspace_threshold=0).P
    tally.slack(-float(np.abs(linear - logspace).max()), "logspace switch at d=500")
    merged = tally.result()
    other = expansion_tally.result()
    merged.cases += other.cases
    merged.passed = merged.passed and other.passed
    merged.details["max_expansion_error"] = other.max_violation
    merged.witness = merged.witness or other.witness
    return merged


@register("power-report")
def check_power_report(ctx: CheckContext) -> CheckResult:
    """Empirical constants c with phi_{1/8}(G^t) >= min(sqrt(t) phi_{1/2}(G), 1) / c (reported only)."""
    constants = {}
    for entry in regular(ctx.battery):
        g = entry.graph
        if g.n < 8 or not g.is_connected():
            continue
        base = min(_phi(g), 1.0)
        for t in (1, 2, 4):
            small = small_set_expansion(graph_power(g, t), 0.125)[0]
            target = min(math.sqrt(t) * base, 1.0)
            constants[f"{entry.name} t={t}"] = target / small if small > 0 else None
    return CheckResult("power-report", True, len(constants), 0.0, False, None, {"constants": constants})


@register("fractional-gap")
def check_fractional_gap(ctx: CheckContext) -> CheckResult:
    """The fractional heuristic never undercuts the exhaustive gap; its agreement rate is reported."""
    tally = Tally("fractional-gap", ctx.tol)
    agree = 0
    for entry in regular(ctx.battery):
        g = entry.graph
        heuristic = comb_gap_fractional(g, restarts=20, seed=ctx.seed).value
        exact = _gap(g)
        tally.slack(heuristic - exact, entry.name)
        agree += abs(heuristic - exact) <= ctx.tol
    return tally.result({"agreement_rate": agree / max(tally.cases, 1)})


def check_labels(config: Optional[ConfigLoader] = None) -> Dict[str, str]:
    """Registry name -> published label, for the checks that carry one."""
    labels = (config or get_config()).get("verify.labels", {}) or {}
    return {name: str(labels[name]) for name in CHECKS if name in labels}


def resolve_checks(names: List[str], config: Optional[ConfigLoader] = None) -> List[str]:
    """Map each requested check, given by registry name or by label, to its registry name."""
    by_label = {label: name for name, label in check_labels(config).items()}
    resolved, unknown = [], []
    for name in names:
        if name in CHECKS:
            resolved.append(name)
        elif name in by_label:
            resolved.append(by_label[name])
        else:
            unknown.append(name)
    if unknown:
        raise UsageError(f"unknown checks: {', '.join(sorted(unknown))}")
    return resolved


def run_checks(ctx: CheckContext, names: Optional[List[str]] = None, workers: int = 1) -> List[CheckResult]:
    """Run the named checks (all by default) and return results in registry order.

    Names may be registry names or published labels.
    """
    wanted = set(CHECKS if names is None else resolve_checks(names, ctx.config))
    selected = [name for name in CHECKS if name in wanted]
    labels = check_labels(ctx.config)

    def run_one(name: str) -> CheckResult:
        logger.info("running check %s", name)
        result = CHECKS[name](ctx)
        result.label = labels.get(name)
        logger.info("check %s: %s (%d cases, max violation %.3g)",
                    name, "pass" if result.passed else "FAIL", result.cases, result.max_violation)
        return result

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_one, selected))
    return [run_one(name) for name in selected]
