import math

import numpy as np
import pytest

from src.errors import DomainError
from src.gaps.measures import certified_graph_pair, comb_gap
from src.graph.core import lazify
from src.graph.generators import complete, cycle, random_regular
from src.walks.lscurve import (CurveDominanceParams, chord_slack, convergence_envelope, curve_of, decay,
                               dominance_slack, gap_envelope)
from src.walks.random_walk import MassVector


def test_point_mass_curve(c4):
    curve = curve_of(c4, MassVector.point(4, 0))
    assert curve.breakpoints.tolist() == [0.0, 1.0, 4.0]
    assert curve(0.5) == pytest.approx(0.5)
    assert curve(2.0) == pytest.approx(1.0)
    assert curve.first_reach(0.5) == pytest.approx(0.5)
    assert curve.first_reach(2.0) == curve.domain


def test_uniform_curve_is_linear(k4):
    curve = curve_of(k4, np.full(4, 0.25), probability=True)
    assert curve(np.array([1.0, 2.0, 3.0])) == pytest.approx([0.25, 0.5, 0.75])
    assert curve.is_concave()


def test_curve_is_concave_for_random_vectors():
    g = random_regular(9, seed=3)
    rng = np.random.default_rng(0)
    for _ in range(20):
        curve = curve_of(g, rng.exponential(size=9))
        assert curve.is_concave()
        assert curve.total == pytest.approx(curve(curve.domain))


def test_curve_rejects_bad_vectors(k4):
    with pytest.raises(DomainError):
        curve_of(k4, [0.5, -0.1, 0.3, 0.3])
    with pytest.raises(DomainError):
        curve_of(k4, [0.5, 0.5, 0.5, 0.5], probability=True)
    with pytest.raises(DomainError):
        curve_of(k4, [1.0, 0.0])


def test_chord_slack_examples(c4, k4):
    assert chord_slack(c4, MassVector.point(4, 0), 1, 0.0) == pytest.approx(0.5)
    assert chord_slack(k4, MassVector.point(4, 0), 1, 2 / 3) == pytest.approx(1 / 3)
    assert chord_slack(k4, np.full(4, 0.25), 2) == pytest.approx(0.0, abs=1e-12)


def test_chord_slack_uses_the_gap_by_default(k4):
    p = MassVector.point(4, 0)
    assert chord_slack(k4, p, 1) == pytest.approx(chord_slack(k4, p, 1, 1 / 3))


def test_chord_slack_domain(k4):
    with pytest.raises(DomainError):
        chord_slack(k4, MassVector.point(4, 0), 3, 0.5)
    with pytest.raises(DomainError):
        chord_slack(k4, MassVector.point(4, 0), 1.5, 0.5)


def test_decay_limits():
    assert decay(2.0, 1.0) == 0.0
    assert decay(4.0, 0.25) == pytest.approx((2 - 0.5) * 0.5 / 2.25)


def test_dominance_params_validation():
    with pytest.raises(DomainError):
        CurveDominanceParams(1.0, 0.5)
    with pytest.raises(DomainError):
        CurveDominanceParams(1.5, 1.0)
    params = CurveDominanceParams(1.5, 0.5)
    low, high = params.coefficients
    assert low == pytest.approx(0.8)
    assert high == pytest.approx(0.2)
    assert params.threshold == pytest.approx(0.25 / 1.25)


def test_dominance_slack_uniform_is_zero(k4):
    assert dominance_slack(k4, np.full(4, 0.25), 1, CurveDominanceParams(1.5, 0.5)) == pytest.approx(0.0, abs=1e-12)


def test_dominance_slack_on_lazy_k4():
    g = lazify(complete(4), 0.5)
    params = certified_graph_pair(g)
    assert dominance_slack(g, MassVector.point(4, 0), 1, params) >= -1e-9


def test_envelopes():
    params = CurveDominanceParams(1.5, 0.5)
    assert convergence_envelope(params, 1.0, 0, 2, 4) == pytest.approx(0.5 + math.sqrt(2))
    assert convergence_envelope(CurveDominanceParams(1.5, 0.999999), 1.0, 10, 1, 4) == pytest.approx(
        convergence_envelope(CurveDominanceParams(1.5, 0.999999), 1.0, 0, 1, 4), rel=1e-4)
    assert gap_envelope(0.5, 2, 4, 8) == pytest.approx(0.5 + 2 * (1 - 0.25 / 8) ** 2)
    with pytest.raises(DomainError):
        convergence_envelope(params, -1.0, 0, 1, 4)


def test_gap_envelope_bounds_walk_curves():
    g = cycle(5)
    phi_bar = comb_gap(g).value
    p = MassVector.point(5, 2)
    for t in range(10):
        curve = curve_of(g, p)
        for x in range(1, 6):
            assert curve(x) <= gap_envelope(phi_bar, t, x, 5) + 1e-9
        p = MassVector(g.weights @ p.entries)
