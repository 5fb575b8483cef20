import numpy as np
import pytest

from src.errors import DomainError
from src.gaps.measures import (Method, certified_graph_pair, comb_gap, comb_gap_delta, comb_gap_fractional,
                               curve_hypothesis_check, psi_graph, relation_check, vertex_expansion_graph,
                               vertex_profile)
from src.graph.core import WeightedGraph, disjoint_union, lazify, small_set_expansion
from src.graph.generators import complete, complete_bipartite, cycle, dumbbell, random_regular


def test_comb_gap_examples(c4, k4, lazy_c4):
    gap = comb_gap(k4)
    assert gap.value == pytest.approx(1 / 3)
    assert gap.witness_s.members == (0, 1)
    assert gap.witness_t.members == (2, 3)
    assert gap.method is Method.EXHAUSTIVE

    gap = comb_gap(c4)
    assert gap.value == pytest.approx(0.0)
    assert gap.witness_s.members == (0, 2)
    assert gap.witness_t.members == (1, 3)

    gap = comb_gap(lazy_c4)
    assert gap.value == pytest.approx(0.25)
    assert gap.witness_s.members == (0, 1)
    assert gap.witness_t.members == (0, 1)


def test_comb_gap_as_dict(k4):
    out = comb_gap(k4).as_dict()
    assert out["witness_S"] == [0, 1]
    assert out["method"] == "exhaustive"
    assert "fraction_S" not in out


def test_comb_gap_delta(c4, k4):
    assert comb_gap_delta(c4, 0.25).value == pytest.approx(0.5)
    assert comb_gap_delta(k4, 0.25).value == pytest.approx(2 / 3)
    assert comb_gap_delta(k4, 0.5).value == pytest.approx(comb_gap(k4).value)
    with pytest.raises(DomainError):
        comb_gap_delta(k4, 0.0)
    with pytest.raises(DomainError):
        comb_gap_delta(k4, 0.75)


@pytest.mark.parametrize("graph, expected", [
    (complete(4), (2 / 3, 1 / 3)),
    (cycle(4), (0.5, 0.25)),
    (disjoint_union(*[complete(2)] * 4), (0.0, 0.0)),
    (disjoint_union(complete(4), complete(4)), (1 / 3, 0.0)),
])
def test_relation_check_examples(graph, expected):
    assert relation_check(graph, 0.5) == pytest.approx(expected)


def test_gap_without_feasible_sets_is_vacuous():
    certificate = comb_gap_delta(cycle(3), 0.25)
    assert certificate.vacuous
    assert certificate.value == 1.0
    assert certificate.witness_s.members == ()
    assert certificate.as_dict()["vacuous"] is True
    assert not comb_gap(cycle(3)).vacuous


@pytest.mark.parametrize("graph, expected", [
    (complete(2), (1.0, 0.5)),
    (cycle(3), (1.0, 0.5)),
    (lazify(complete(2), 0.5), (1.0, 0.25)),
])
def test_relation_check_on_tiny_graphs(graph, expected):
    assert relation_check(graph, 0.5) == pytest.approx(expected)


@pytest.mark.parametrize("graph", [cycle(5), cycle(8), complete_bipartite(3), dumbbell(4, 0.1),
                                   random_regular(10, mix=3, seed=2), lazify(cycle(6), 0.5)])
def test_gap_dominates_half_expansion(graph):
    lhs, rhs = relation_check(graph, 0.5)
    assert lhs >= rhs - 1e-9


def test_gap_never_exceeds_expansion():
    for graph in (cycle(6), complete(5), dumbbell(3, 0.2)):
        assert comb_gap(graph).value <= small_set_expansion(graph, 0.5)[0] + 1e-9


def test_vertex_profile_on_k4(k4):
    profile = vertex_profile(k4, [0])
    assert profile.n_half == pytest.approx(1.5)
    assert profile.phi_v == pytest.approx(1.0)
    assert profile.psi_product == pytest.approx(1.0)
    assert profile.expansion == pytest.approx(1.0)


def test_vertex_profile_covers_half_the_cut_fractionally():
    w = np.array([[0.0, 0.8, 0.1, 0.1],
                  [0.8, 0.0, 0.1, 0.1],
                  [0.1, 0.1, 0.0, 0.8],
                  [0.1, 0.1, 0.8, 0.0]])
    g = WeightedGraph(w, name="weighted-star")
    profile = vertex_profile(g, [0])
    assert profile.n_half == pytest.approx(0.625)
    assert profile.phi_v == pytest.approx(0.625)
    assert profile.expansion == pytest.approx(1.0)
    assert profile.psi_product == pytest.approx(0.625)
    assert vertex_profile(g, [0], form="set") == profile


def test_vertex_profile_of_a_closed_set():
    g = disjoint_union(complete(4), complete(4))
    profile = vertex_profile(g, [0, 1, 2, 3])
    assert profile.phi_v == 1.0
    assert profile.psi_product == 0.0


@pytest.mark.parametrize("members", [[0], [0, 1], [0, 2]])
def test_vertex_profile_forms_agree_on_lazy_graphs(lazy_c4, members):
    by_set = vertex_profile(lazy_c4, members, form="set")
    by_curve = vertex_profile(lazy_c4, members, form="curve")
    assert by_set.n_half == pytest.approx(by_curve.n_half, abs=1e-9)
    assert by_set.psi_product == pytest.approx(by_curve.psi_product, abs=1e-9)


def test_vertex_profile_domain(k4):
    with pytest.raises(DomainError):
        vertex_profile(k4, [])
    with pytest.raises(DomainError):
        vertex_profile(k4, [0, 1, 2])
    with pytest.raises(DomainError):
        vertex_profile(k4, [0], form="matrix")


def test_graph_level_profiles(k4):
    phi_v, witness = vertex_expansion_graph(k4)
    assert phi_v == pytest.approx(0.5)
    assert witness.members == (0, 1)
    psi, witness = psi_graph(k4)
    assert psi == pytest.approx(1 / 3)
    assert witness.members == (0, 1)
    params = certified_graph_pair(k4)
    assert params.a == pytest.approx(1.5)
    assert params.b == pytest.approx(2 / 3)


def test_certified_pair_needs_positive_expansion():
    with pytest.raises(DomainError):
        certified_graph_pair(disjoint_union(complete(4), complete(4)))


def test_curve_hypothesis(k4, lazy_c4):
    result = curve_hypothesis_check(k4, 2.0, 0.01)
    assert not result.holds
    assert result.witness is not None
    assert result.max_violation > 0
    assert curve_hypothesis_check(lazy_c4).holds
    assert curve_hypothesis_check(lazify(complete(5), 0.5)).holds
    with pytest.raises(DomainError):
        curve_hypothesis_check(k4, a=2.0)


def test_fractional_heuristic_finds_bipartite_gap(c4):
    gap = comb_gap_fractional(c4, restarts=60)
    assert gap.value == pytest.approx(0.0, abs=1e-12)
    assert gap.method is Method.HEURISTIC
    assert sum(gap.fraction_s) == pytest.approx(gap.witness_s.volume)


@pytest.mark.parametrize("graph", [complete(4), cycle(7), lazify(cycle(6), 0.5), random_regular(10, mix=3, seed=1)])
def test_fractional_heuristic_is_an_upper_bound(graph):
    assert comb_gap_fractional(graph, seed=3).value >= comb_gap(graph).value - 1e-9


def test_fractional_heuristic_validation(k4):
    with pytest.raises(DomainError):
        comb_gap_fractional(k4, restarts=0)


def test_capacity_falls_back_to_heuristic():
    gap = comb_gap(complete(6), max_n=5)
    assert gap.method is Method.HEURISTIC
    assert gap.value >= comb_gap(complete(6)).value - 1e-9
    assert np.isfinite(gap.value)
