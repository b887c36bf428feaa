"""
Oracle Tests
------------
Support enumeration, preimages, the exact process law and the naive urn.
"""

import math
from fractions import Fraction

import numpy as np
import pytest

from ghype.exceptions import InfeasibleModelError, InputError, SupportTooLargeError
from ghype.models.graph import (
    CombinatorialMatrix,
    DegreeSequence,
    MultiGraph,
    build_graph,
    combinatorial_matrix,
    combinatorial_matrix_from_graph,
    degree_sequences,
)
from ghype.models.oracle import (
    UrnSimulation,
    count_support,
    directed_preimages,
    enumerate_support,
    exact_soft_config_pmf,
    exact_support,
    simulate_urn,
    wallenius_process_pmf,
)
from ghype.models.soft_config import SoftConfigModel
from ghype.models.wallenius import PropensityMatrix

ONES = CombinatorialMatrix(xi=np.ones((2, 2), dtype=np.int64), directed=True)
TWO_DYADS = CombinatorialMatrix(xi=np.array([[1, 1], [0, 0]]), directed=True)
BIASED = PropensityMatrix(omega=np.array([[2.0, 1.0], [1.0, 1.0]]), directed=True)


def test_unit_urn_has_six_support_graphs():
    support = enumerate_support(ONES, 2)
    assert len(support) == 6
    assert len({tuple(g.adj.ravel().tolist()) for g in support}) == 6
    assert all(g.m == 2 and (g.adj <= 1).all() for g in support)


def test_support_is_lexicographic():
    keys = [tuple(g.draw_counts().tolist()) for g in enumerate_support(ONES, 2)]
    assert keys == sorted(keys)


def test_zero_draws_give_the_empty_graph():
    support = enumerate_support(ONES, 0)
    assert len(support) == 1
    assert support[0].adj.tolist() == [[0, 0], [0, 0]]


def test_single_positive_dyad():
    xi = CombinatorialMatrix(xi=np.array([[0, 3], [0, 0]]), directed=True)
    support = enumerate_support(xi, 1)
    assert [g.adj.tolist() for g in support] == [[[0, 1], [0, 0]]]


def test_undirected_support_counts_self_loops_in_loop_units():
    xi = combinatorial_matrix(DegreeSequence.undirected([1, 1]))
    support = enumerate_support(xi, 1)
    assert sorted(g.adj.tolist() for g in support) == sorted([
        [[2, 0], [0, 0]],
        [[0, 1], [1, 0]],
        [[0, 0], [0, 2]],
    ])


def test_count_support_matches_enumeration():
    xi = combinatorial_matrix(DegreeSequence.directed_pair([2, 1, 1], [1, 1, 2]))
    for m in range(0, 6):
        assert count_support(xi, m) == len(enumerate_support(xi, m))


def test_support_cap():
    with pytest.raises(SupportTooLargeError):
        enumerate_support(ONES, 2, max_support=5)


def test_exact_support_sums_to_one():
    g = build_graph([(0, 1, 2), (1, 1, 1), (2, 0, 1)], n=3, directed=False)
    model = SoftConfigModel.from_graph(g)
    enumeration = exact_support(model)
    assert enumeration.total == Fraction(1)
    assert enumeration.probability(g) == exact_soft_config_pmf(model.xi, model.m, g)
    assert len(enumeration) == count_support(model.xi, model.m)


def test_exact_pmf_values():
    assert exact_soft_config_pmf(ONES, 2, MultiGraph(adj=[[0, 1], [1, 0]], directed=True)) == Fraction(1, 6)
    xi = combinatorial_matrix(DegreeSequence.undirected([2, 2]))
    assert exact_soft_config_pmf(xi, 2, MultiGraph(adj=[[0, 2], [2, 0]], directed=False)) == Fraction(28, 120)


def test_preimages_of_a_double_edge():
    preimages = directed_preimages(MultiGraph(adj=[[0, 2], [2, 0]], directed=False))
    assert sorted(p.adj[0, 1] for p in preimages) == [0, 1, 2]
    assert all(p.adj[0, 1] + p.adj[1, 0] == 2 for p in preimages)


def test_self_loop_preimage_is_forced():
    preimages = directed_preimages(MultiGraph(adj=[[2, 0], [0, 0]], directed=False))
    assert [p.adj.tolist() for p in preimages] == [[[1, 0], [0, 0]]]


def test_preimage_count_identity():
    g = build_graph([(0, 1, 2), (1, 2, 3), (0, 2, 1), (2, 2, 1)], n=3, directed=False)
    preimages = directed_preimages(g)
    assert len(preimages) == 3 * 4 * 2
    assert len({tuple(p.adj.ravel().tolist()) for p in preimages}) == len(preimages)


def test_preimage_sum_equals_undirected_pmf():
    g = build_graph([(0, 1, 2), (1, 2, 1), (0, 0, 1)], n=3, directed=False)
    k = degree_sequences(g).k
    directed_xi = CombinatorialMatrix(xi=np.outer(k, k), directed=True)
    total = sum((exact_soft_config_pmf(directed_xi, g.m, h) for h in directed_preimages(g)), Fraction(0))
    assert total == exact_soft_config_pmf(combinatorial_matrix_from_graph(g), g.m, g)


def test_preimages_require_undirected_graph():
    with pytest.raises(InputError):
        directed_preimages(MultiGraph(adj=[[0, 1], [0, 0]], directed=True))


def test_process_law_two_dyads():
    law = wallenius_process_pmf(TWO_DYADS, BIASED, 1)
    probabilities = {tuple(g.draw_counts().tolist()): p for g, p in law.entries}
    assert probabilities == {(1, 0, 0, 0): Fraction(2, 3), (0, 1, 0, 0): Fraction(1, 3)}


def test_process_law_with_constant_propensity_is_hypergeometric():
    xi = combinatorial_matrix(DegreeSequence.undirected([2, 1, 1]))
    law = wallenius_process_pmf(xi, PropensityMatrix.uniform(3, directed=False), 3)
    for g, p in law.entries:
        assert p == exact_soft_config_pmf(xi, 3, g)
    assert law.total == 1


def test_process_law_rejects_infeasible_m():
    with pytest.raises(InfeasibleModelError):
        wallenius_process_pmf(TWO_DYADS, BIASED, 3)


def test_urn_frequencies_uniform():
    trials = 60000
    sim = simulate_urn(ONES, PropensityMatrix.uniform(2, directed=True), 2, trials, seed=17)
    sigma = math.sqrt(trials * (1 / 6) * (5 / 6))
    assert len(sim.counts) == 6
    for count in sim.counts.values():
        assert abs(count - trials / 6) <= 4 * sigma


def test_urn_frequency_biased():
    trials = 60000
    sim = simulate_urn(TWO_DYADS, BIASED, 1, trials, seed=5)
    first = MultiGraph(adj=[[1, 0], [0, 0]], directed=True)
    sigma = math.sqrt((2 / 3) * (1 / 3) / trials)
    assert abs(sim.frequency(first) - 2 / 3) <= 4 * sigma


def test_urn_full_draw_has_one_outcome():
    xi = combinatorial_matrix(DegreeSequence.undirected([1, 1]))
    sim = simulate_urn(xi, PropensityMatrix.uniform(2, directed=False), xi.M, 50, seed=1)
    assert list(sim.counts.values()) == [50]
    assert sim.mean_adjacency().tolist() == [[2.0, 2.0], [2.0, 2.0]]


def test_urn_is_deterministic_given_seed():
    a = simulate_urn(ONES, BIASED, 2, 500, seed=3)
    b = simulate_urn(ONES, BIASED, 2, 500, seed=3)
    assert a.counts == b.counts


def test_urn_merge_is_associative():
    runs = [simulate_urn(ONES, BIASED, 2, 200, seed=s) for s in (1, 2, 3)]
    left = runs[0].merge(runs[1]).merge(runs[2])
    right = runs[0].merge(runs[1].merge(runs[2]))
    assert left.counts == right.counts
    assert left.trials == 600


def test_urn_merge_rejects_other_ensembles():
    with pytest.raises(InputError):
        UrnSimulation(n=2, directed=True).merge(UrnSimulation(n=3, directed=True))


def test_urn_requires_trials():
    with pytest.raises(InputError):
        simulate_urn(ONES, BIASED, 2, 0, seed=1)
