import math

import numpy as np
import pytest

from src.errors import DomainError
from src.graph.core import VertexSet, disjoint_union
from src.graph.generators import complete, cycle, dumbbell, hypercube_explicit
from src.hypercube.model import HypercubeModel, hamming_weights
from src.walks.evolving_sets import (Termination, esp_local_partition, esp_sample_step,
                                     esp_transition_distribution, gauge_exact, gauge_monte_carlo,
                                     incoming_profile, mp_identity_check, sample_transition_counts,
                                     snapped_levels, threshold_conditionals, vb_esp_sample_step,
                                     volume_biased_law)

GAUGE_C4_SINGLETON = 1 - math.sqrt(2) / 2


def test_incoming_profile_areas(lazy_c4):
    profile = incoming_profile(lazy_c4, [0])
    assert profile.d_s.tolist() == pytest.approx([0.5, 0.25, 0.0, 0.25])
    assert profile.upper_area(0.25) == pytest.approx(0.25)
    assert profile.lower_area(0.25) == pytest.approx(0.75)


def test_transition_atoms_on_c4(c4):
    transition = esp_transition_distribution(c4, [0])
    assert [(a.lower, a.upper, a.successor.members) for a in transition.atoms] == [
        (0.5, 1.0, ()),
        (0.0, 0.5, (1, 3)),
    ]
    assert transition.expected_volume() == pytest.approx(1.0)
    assert transition.successor_for(0.7).members == ()


def test_whole_vertex_set_is_fixed(k4):
    transition = esp_transition_distribution(k4, range(4))
    assert len(transition.atoms) == 1
    assert transition.atoms[0].successor.members == (0, 1, 2, 3)
    assert transition.atoms[0].probability == pytest.approx(1.0)


def test_snapped_levels_merge_close_values(k4):
    q = snapped_levels(k4, [0, 1])
    assert len(set(q.tolist())) == 2


def test_forced_thresholds(c4, lazy_c4):
    rng = np.random.default_rng(0)
    assert esp_sample_step(c4, [0], rng, u=0.7)[0].members == ()
    assert esp_sample_step(c4, [0], rng, u=1e-9)[0].members == (1, 3)
    assert esp_sample_step(lazy_c4, [0], rng, u=0.3)[0].members == (0,)
    with pytest.raises(DomainError):
        esp_sample_step(c4, [0], rng, u=0.0)


def test_gauge_exact_on_c4_singleton(c4):
    assert gauge_exact(c4, [0]) == pytest.approx(GAUGE_C4_SINGLETON)
    with pytest.raises(DomainError):
        gauge_exact(c4, [])
    with pytest.raises(DomainError):
        gauge_exact(c4, [0, 1, 2])


def test_gauge_monte_carlo_matches_exact(c4):
    estimate = gauge_monte_carlo(c4, [0], 100_000, seed=1)
    assert abs(estimate.mean - GAUGE_C4_SINGLETON) <= 4 * estimate.stderr
    single = gauge_monte_carlo(c4, [0], 1, seed=1)
    assert single.stderr is None


def test_gauge_monte_carlo_deterministic_transition():
    # two disjoint edges: S = {0, 2} always moves to {1, 3}
    g = disjoint_union(complete(2), complete(2))
    estimate = gauge_monte_carlo(g, [0, 2], 50, seed=0)
    assert estimate.stderr == 0.0
    assert estimate.mean == pytest.approx(gauge_exact(g, [0, 2]))


@pytest.mark.parametrize("members", [[0], [0, 1], [0, 2], [1, 2, 3]])
def test_threshold_identity(lazy_c4, members):
    grid = np.arange(1, 100) / 100
    lhs, rhs = mp_identity_check(lazy_c4, members, grid)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12
    below, above = threshold_conditionals(lazy_c4, members, 0.5)
    assert below == pytest.approx(incoming_profile(lazy_c4, members).lower_area(0.5), abs=1e-12)
    assert above == pytest.approx(incoming_profile(lazy_c4, members).upper_area(0.5), abs=1e-12)


def test_threshold_identity_domain(c4):
    with pytest.raises(DomainError):
        mp_identity_check(c4, [0], 0.0)


def test_volume_biased_law_on_c4(c4):
    law = volume_biased_law(esp_transition_distribution(c4, [0]))
    assert [(s.members, mass) for s, mass in law] == [((1, 3), pytest.approx(1.0))]


def test_volume_biased_step_keeps_the_walker(c4):
    rng = np.random.default_rng(3)
    for _ in range(50):
        successor, walker, u = vb_esp_sample_step(c4, [0], 0, rng)
        assert walker in successor
        assert 0 < u <= 0.5
    with pytest.raises(DomainError):
        vb_esp_sample_step(c4, [0], 2, rng)
    with pytest.raises(DomainError):
        vb_esp_sample_step(c4, range(4), 0, rng)


def test_sample_transition_counts(c4):
    rng = np.random.default_rng(5)
    counts = sample_transition_counts(c4, [0], 10_000, rng)
    assert counts.sum() == 10_000
    assert abs(counts[0] - 5000) < 4 * 50
    biased = sample_transition_counts(c4, [0], 10_000, rng, volume_biased=True)
    assert biased.tolist() == [0, 10_000]


def test_local_partition_on_disconnected_graph():
    g = disjoint_union(complete(4), complete(4))
    run = esp_local_partition(g, 0, size_budget=4, seed=9)
    assert run.vertex_set.members == (0, 1, 2, 3)
    assert run.expansion == pytest.approx(0.0)
    assert run.trajectory.termination is Termination.TARGET
    assert run.within_budget


def test_local_partition_finds_a_dumbbell_clique():
    g = dumbbell(4, 0.05)
    found = sum(esp_local_partition(g, 0, seed=seed).vertex_set.members == (0, 1, 2, 3) for seed in range(60))
    assert found >= 48


def test_local_partition_is_reproducible():
    first = esp_local_partition(cycle(8), 0, step_cap=30, seed=4, volume_biased=False)
    second = esp_local_partition(cycle(8), 0, step_cap=30, seed=4, volume_biased=False)
    assert [s.vertex_set for s in first.trajectory.steps] == [s.vertex_set for s in second.trajectory.steps]
    assert first.trajectory.steps[0].vertex_set == VertexSet.of(cycle(8), [0])


def test_local_partition_validation(k4):
    with pytest.raises(DomainError):
        esp_local_partition(k4, 4)
    with pytest.raises(DomainError):
        esp_local_partition(k4, 0, size_budget=3)
    with pytest.raises(DomainError):
        esp_local_partition(k4, 0, step_cap=0)


def test_hypercube_process_only_visits_balls():
    model = HypercubeModel(2, 3, 0.2)
    g = hypercube_explicit(2, 3, 0.2)
    weights = hamming_weights(model)
    for seed in range(5):
        run = esp_local_partition(g, 0, step_cap=40, phi_target=-1.0, seed=seed)
        for step in run.trajectory.steps:
            members = set(step.vertex_set.members)
            if members:
                radius = weights[list(members)].max()
                assert members == set(np.nonzero(weights <= radius)[0])
