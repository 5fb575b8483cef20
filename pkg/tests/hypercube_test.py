import numpy as np
import pytest

from src.errors import CapacityError, DomainError
from src.graph.generators import hypercube_explicit
from src.hypercube.counterexample import (EMPTY_RADIUS, ball_transition_law, certified_ball_cap,
                                          counterexample_report, esp_on_balls)
from src.hypercube.model import (HypercubeModel, ball_profile, ball_profiles, coordinate_cut_expansion,
                                 explicit_ball_weights, hamming_weights, index_to_string,
                                 level_monotonicity_check, pair_weight, string_to_index, weight_chain)


@pytest.fixture
def big():
    return HypercubeModel(8, 128, 0.1)


def test_model_validation():
    with pytest.raises(DomainError):
        HypercubeModel(1, 3, 0.1)
    with pytest.raises(DomainError):
        HypercubeModel(2, 3, 1.5)
    with pytest.raises(DomainError):
        HypercubeModel(2, 3, 0.7)
    model = HypercubeModel(2, 3, 0.7, explore=True)
    assert not model.monotone_regime
    assert HypercubeModel.for_delta(0.125, 16, 0.1).k == 8


def test_string_indexing():
    model = HypercubeModel(3, 4, 0.3)
    assert string_to_index(model, (1, 0, 2, 1)) == 34
    assert index_to_string(model, 34) == (1, 0, 2, 1)
    with pytest.raises(DomainError):
        string_to_index(model, (3, 0, 0, 0))
    with pytest.raises(DomainError):
        string_to_index(model, (0, 0))


def test_pair_weight_matches_explicit_graph():
    model = HypercubeModel(2, 2, 0.5)
    assert pair_weight(model, (0, 0), (1, 1)) == pytest.approx(0.0625)
    assert pair_weight(model, (0, 0), (0, 0)) == pytest.approx(0.5625)
    g = hypercube_explicit(3, 3, 0.2)
    model = HypercubeModel(3, 3, 0.2)
    x, y = (0, 2, 1), (1, 2, 0)
    assert g.weights[string_to_index(model, x), string_to_index(model, y)] == pytest.approx(pair_weight(model, x, y))


def test_explicit_guard(big):
    with pytest.raises(CapacityError):
        hamming_weights(big)
    with pytest.raises(CapacityError):
        HypercubeModel(2, 10_001, 0.1).kernel


@pytest.mark.parametrize("model", [HypercubeModel(2, 5, 0.3), HypercubeModel(8, 128, 0.1),
                                   HypercubeModel(4, 30, 0.5)])
def test_weight_chain_is_a_reversible_stochastic_kernel(model):
    P, pi = model.kernel
    assert P.shape == (model.d + 1, model.d + 1)
    assert P.sum(axis=1) == pytest.approx(np.ones(model.d + 1), abs=1e-12)
    assert pi @ P == pytest.approx(pi, abs=1e-12)
    flow = pi[:, None] * P
    assert np.abs(flow - flow.T).max() < 1e-12


def test_logspace_rows_match_linear_rows():
    model = HypercubeModel(8, 60, 0.1)
    linear = weight_chain(model, logspace_threshold=10_000).P
    logspace = weight_chain(model, logspace_threshold=0).P
    assert np.abs(linear - logspace).max() < 1e-12


def test_ball_profiles(big):
    sizes, expansions = ball_profiles(big)
    assert sizes[-1] == pytest.approx(1.0)
    assert expansions[-1] == pytest.approx(0.0, abs=1e-12)
    assert np.all(np.diff(sizes) > 0)
    single = ball_profile(big, 10)
    assert single.size_fraction == pytest.approx(sizes[10])
    assert single.expansion == pytest.approx(expansions[10])
    with pytest.raises(DomainError):
        ball_profile(big, 129)


@pytest.mark.parametrize("d", [512, 600])
def test_ball_profiles_survive_underflowing_sizes(d):
    model = HypercubeModel(8, d, 0.1)
    sizes, expansions = ball_profiles(model)
    assert sizes[0] == 0.0
    assert np.all(np.isfinite(expansions))
    assert expansions[0] == pytest.approx(1.0 - model.p_same ** d)
    assert ball_profile(model, 0).expansion == pytest.approx(expansions[0])
    assert ball_profile(model, 40).expansion == pytest.approx(expansions[40])
    assert sizes[-1] == pytest.approx(1.0)


def test_log_sizes_match_linear_sizes(big):
    kernel = big.kernel
    assert np.exp(kernel.log_ball_sizes) == pytest.approx(np.cumsum(kernel.pi), rel=1e-9)


def test_report_at_large_dimension():
    report = counterexample_report(HypercubeModel(8, 600, 0.1), 1e-30, threshold=0.8)
    assert not report.vacuous
    assert np.isfinite(report.min_ball_expansion)
    assert report.min_ball_expansion > 0.9
    assert report.passes


def test_coordinate_cut(big):
    cut = coordinate_cut_expansion(big)
    assert cut.size_fraction == pytest.approx(0.125)
    assert cut.expansion == pytest.approx(0.0875)
    assert cut.within_eps
    assert coordinate_cut_expansion(HypercubeModel(2, 4, 0.5)).expansion == pytest.approx(0.25)


def test_explicit_ball_weights_match_the_projection():
    model = HypercubeModel(3, 4, 0.3)
    weights = hamming_weights(model)
    stay = model.kernel.stay_matrix
    for r in range(model.d + 1):
        assert explicit_ball_weights(model, r) == pytest.approx(stay[weights, r], abs=1e-12)


@pytest.mark.parametrize("model", [HypercubeModel(3, 4, 0.3), HypercubeModel(2, 5, 0.5), HypercubeModel(4, 3, 0.1)])
def test_level_monotonicity_holds_in_the_monotone_regime(model):
    check = level_monotonicity_check(model)
    assert check.holds
    assert check.asserted
    assert check.witness is None
    assert check.max_kernel_error < 1e-12


def test_level_monotonicity_outside_the_regime_is_not_asserted():
    check = level_monotonicity_check(HypercubeModel(2, 3, 0.9, explore=True))
    assert not check.asserted


@pytest.mark.parametrize("volume_biased", [False, True])
def test_ball_transition_law_is_a_distribution(big, volume_biased):
    law = ball_transition_law(big, 3, volume_biased=volume_biased)
    assert sum(law.values()) == pytest.approx(1.0, abs=1e-9)
    if volume_biased:
        assert EMPTY_RADIUS not in law


def test_ball_transition_law_validation(big):
    with pytest.raises(DomainError):
        ball_transition_law(big, -1)


def test_esp_on_balls_without_noise_is_frozen():
    model = HypercubeModel(4, 10, 0.0)
    trajectory = esp_on_balls(model, 20, np.random.default_rng(0), start_radius=2)
    assert set(trajectory.radii) == {2}
    assert len(trajectory.radii) == 21


@pytest.mark.parametrize("volume_biased", [False, True])
def test_esp_on_balls_stops_at_absorbing_radii(big, volume_biased):
    trajectory = esp_on_balls(big, 400, np.random.default_rng(1), volume_biased=volume_biased)
    assert trajectory.radii[0] == 0
    assert all(r == EMPTY_RADIUS or 0 <= r <= big.d for r in trajectory.radii)
    assert all(r not in (EMPTY_RADIUS, big.d) for r in trajectory.radii[:-1])
    if volume_biased:
        assert EMPTY_RADIUS not in trajectory.radii
        assert all(w is not None for w in trajectory.walker_weights)


def test_report_passes_up_to_the_ball_cap(big):
    sizes, _ = ball_profiles(big)
    report = counterexample_report(big, float(sizes[40]))
    assert report.passes
    assert not report.vacuous
    assert report.min_ball_expansion >= 0.9 - 1e-12
    assert report.certified_cap >= sizes[40]
    assert report.coordinate_expansion == pytest.approx(0.0875)
    assert len(report.balls) == 41


def test_report_fails_at_a_one_percent_cap(big):
    report = counterexample_report(big, 0.01)
    assert not report.passes
    assert report.min_ball_expansion < 0.9
    assert report.certified_cap < 0.01
    assert certified_ball_cap(big, 0.9).cap == pytest.approx(report.certified_cap)


def test_report_edge_cases(big):
    degenerate = counterexample_report(HypercubeModel(2, 4, 0.0), 0.5)
    assert degenerate.degenerate
    assert not degenerate.passes
    vacuous = counterexample_report(big, 1e-200)
    assert vacuous.vacuous
    assert vacuous.min_ball_expansion is None
    assert not vacuous.passes
    with pytest.raises(DomainError):
        counterexample_report(big, 0.0)
    with pytest.raises(DomainError):
        counterexample_report(big, 0.1, delta_target=0.25)
    assert counterexample_report(big, 0.01, delta_target=0.125).k == 8
