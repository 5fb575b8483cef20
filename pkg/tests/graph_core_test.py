import numpy as np
import pytest

from src.errors import CapacityError, DomainError
from src.graph.core import (VertexSet, WeightedGraph, cut_weight, disjoint_union, expansion, graph_power,
                            lazify, members_of_code, small_set_expansion, subset_chunks)
from src.graph.generators import (complete, complete_bipartite, cycle, dumbbell, generate, generate_from_spec,
                                  hypercube_explicit, path, random_regular)


def test_weighted_graph_rejects_bad_matrices():
    with pytest.raises(DomainError):
        WeightedGraph(np.array([[0.0, 1.0], [0.5, 0.0]]))
    with pytest.raises(DomainError):
        WeightedGraph(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(DomainError):
        WeightedGraph(np.ones((2, 3)))
    # DomainError doubles as ValueError for callers outside the package
    with pytest.raises(ValueError):
        WeightedGraph(np.array([[np.nan]]))


def test_weights_are_read_only(k4):
    with pytest.raises(ValueError):
        k4.weights[0, 1] = 5.0


def test_self_loop_counts_once_in_degree():
    g = WeightedGraph(np.array([[0.5, 0.5], [0.5, 0.5]]))
    assert g.deg == pytest.approx([1.0, 1.0])
    assert g.regular_unit and g.lazy


@pytest.mark.parametrize("graph", [cycle(4), cycle(7), complete(4), complete_bipartite(3), path(5),
                                   dumbbell(4, 0.05), random_regular(9, mix=3, seed=4),
                                   hypercube_explicit(3, 2, 0.3)])
def test_generators_are_unit_regular(graph):
    assert graph.regular_unit
    assert np.allclose(graph.weights, graph.weights.T)


def test_generator_weights(c4, k4):
    assert c4.weights[0, 1] == pytest.approx(0.5)
    assert c4.weights[0, 2] == 0.0
    assert k4.weights[0, 3] == pytest.approx(1 / 3)
    cube = hypercube_explicit(2, 2, 0.5)
    assert cube.n == 4
    assert cube.weights[0, 0] == pytest.approx(0.5625)
    assert cube.weights[0, 3] == pytest.approx(0.0625)


def test_bipartite_and_connectivity(c4):
    assert c4.is_bipartite()
    assert not cycle(5).is_bipartite()
    assert not lazify(c4, 0.5).is_bipartite()
    assert complete_bipartite(2).is_bipartite()
    assert c4.is_connected()
    assert not disjoint_union(complete(4), complete(4)).is_connected()


def test_vertex_set_normalizes_members(k4):
    s = VertexSet.of(k4, [3, 1, 1])
    assert s.members == (1, 3)
    assert s.volume == pytest.approx(2.0)
    assert 3 in s and 0 not in s
    assert list(s.mask(4)) == [False, True, False, True]
    with pytest.raises(DomainError):
        VertexSet.of(k4, [4])


def test_cut_weight_examples(c4, k4):
    assert cut_weight(c4, [0, 1], [2, 3]) == pytest.approx(1.0)
    assert cut_weight(k4, [0], [1, 2, 3]) == pytest.approx(1.0)
    assert cut_weight(k4, [], [1, 2]) == 0.0
    # bilinear: w(S, S) counts each inside edge from both ends
    assert cut_weight(k4, [0, 1], [0, 1]) == pytest.approx(2 / 3)


def test_expansion_examples(c4, k4):
    assert expansion(c4, [0]) == pytest.approx(1.0)
    assert expansion(c4, [0, 1]) == pytest.approx(0.5)
    assert expansion(k4, [0, 1]) == pytest.approx(2 / 3)
    assert expansion(k4, [0, 1, 2], enforce_half=False) == pytest.approx(1 / 3)
    assert expansion(k4, [0, 1], measure="size") == pytest.approx(2 / 3)
    with pytest.raises(DomainError):
        expansion(k4, [])
    with pytest.raises(DomainError):
        expansion(k4, [0, 1, 2])


def test_small_set_expansion_examples(c4, k4):
    value, witness = small_set_expansion(c4, 0.5)
    assert value == pytest.approx(0.5)
    assert witness.members == (0, 1)
    value, witness = small_set_expansion(c4, 0.25)
    assert value == pytest.approx(1.0)
    assert witness.members == (0,)
    value, witness = small_set_expansion(k4, 0.5)
    assert value == pytest.approx(2 / 3)
    assert witness.members == (0, 1)
    value, witness = small_set_expansion(cycle(6), 0.5)
    assert value == pytest.approx(1 / 3)
    assert witness.members == (0, 1, 2)


def test_small_set_expansion_of_disconnected_graph_is_zero():
    value, witness = small_set_expansion(disjoint_union(complete(4), complete(4)), 0.5)
    assert value == pytest.approx(0.0)
    assert witness.members == (0, 1, 2, 3)


def test_brute_force_guard():
    with pytest.raises(CapacityError):
        small_set_expansion(complete(6), 0.5, max_n=5)
    with pytest.raises(DomainError):
        small_set_expansion(complete(6), 0.75)


def test_subset_chunks_cover_every_subset():
    codes = np.concatenate([c for c, _ in subset_chunks(4, chunk_rows=5)])
    assert list(codes) == list(range(1, 16))
    _, bits = next(subset_chunks(3))
    assert bits[4].tolist() == [1.0, 0.0, 1.0]
    assert members_of_code(5, 3) == (0, 2)


def test_graph_power_examples(c4, k4):
    squared = graph_power(c4, 2)
    assert squared.weights[0, 0] == pytest.approx(0.5)
    assert squared.weights[0, 2] == pytest.approx(0.5)
    assert squared.weights[0, 1] == pytest.approx(0.0)
    assert np.allclose(graph_power(k4, 1).weights, k4.weights)
    k4_squared = graph_power(k4, 2)
    assert k4_squared.weights[1, 1] == pytest.approx(1 / 3)
    assert k4_squared.weights[1, 2] == pytest.approx(2 / 9)
    with pytest.raises(DomainError):
        graph_power(k4, 0)


def test_lazify_examples(c4):
    lazy = lazify(c4, 0.5)
    assert lazy.weights[0, 0] == pytest.approx(0.5)
    assert lazy.weights[0, 1] == pytest.approx(0.25)
    assert lazify(c4, 0.0) is c4
    with pytest.raises(DomainError):
        lazify(c4, 1.0)


def test_generate_from_spec_applies_laziness():
    g = generate_from_spec({"family": "cycle", "n": 5, "lazy": 0.5})
    assert g.lazy and g.n == 5
    with pytest.raises(DomainError):
        generate("moebius", n=4)
    with pytest.raises(DomainError):
        generate("cycle", size=4)


def test_random_regular_is_reproducible():
    a = random_regular(8, mix=3, seed=5)
    b = random_regular(8, mix=3, seed=5)
    assert np.array_equal(a.weights, b.weights)


def test_explicit_hypercube_guard():
    with pytest.raises(CapacityError):
        hypercube_explicit(8, 5, 0.1)
