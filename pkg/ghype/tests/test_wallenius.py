"""
Wallenius Ensemble Tests
------------------------
The biased urn against hand-computed probabilities, the exact process law,
the soft configuration reduction, the mean system and the fitted
propensities.
"""

import math
import time

import numpy as np
import pytest
from scipy.stats import chisquare, nchypergeom_wallenius

from ghype.exceptions import (
    InfeasibleModelError,
    InputError,
    SaturatedDyadError,
)
from ghype.models.graph import (
    CombinatorialMatrix,
    DegreeSequence,
    MultiGraph,
    build_graph,
    combinatorial_matrix,
    combinatorial_matrix_from_graph,
)
from ghype.models.oracle import enumerate_support, wallenius_process_pmf
from ghype.models.soft_config import SoftConfigModel, log_pmf, marginal_pmf
from ghype.models.wallenius import (
    GHypEModel,
    PropensityMatrix,
    fit_propensity,
    log_pmf_wallenius,
    marginal_pmf_wallenius,
    mean_wallenius,
    sample_ghype,
    sample_ghype_many,
)
from ghype.utils.numeric import QuadratureConfig


def two_dyad_model(m: int = 1, balls: int = 1) -> GHypEModel:
    """Directed 2x2 urn where only dyads (0,0) and (0,1) hold balls, Omega = (2, 1)."""
    xi = CombinatorialMatrix(xi=np.array([[balls, balls], [0, 0]]), directed=True)
    omega = PropensityMatrix(omega=np.array([[2.0, 1.0], [1.0, 1.0]]), directed=True)
    return GHypEModel(xi=xi, omega=omega, m=m)


@pytest.fixture
def biased_undirected():
    g = build_graph([(0, 1, 1), (1, 2, 1), (2, 2, 1), (0, 2, 1)], n=3, directed=False)
    omega = np.array([[1.0, 2.5, 0.5], [2.5, 3.0, 1.0], [0.5, 1.0, 0.2]])
    return GHypEModel(
        xi=combinatorial_matrix_from_graph(g),
        omega=PropensityMatrix(omega=omega, directed=False),
        m=3,
    )


def test_propensity_validation():
    with pytest.raises(InputError):
        PropensityMatrix(omega=np.array([[1.0, -1.0], [1.0, 1.0]]), directed=True)
    with pytest.raises(InputError):
        PropensityMatrix(omega=np.array([[1.0, 2.0], [1.0, 1.0]]), directed=False)
    with pytest.raises(InputError):
        PropensityMatrix(omega=np.array([[np.inf, 1.0], [1.0, 1.0]]), directed=True)
    with pytest.raises(InputError):
        PropensityMatrix.uniform(2, directed=True).scaled(0.0)


def test_model_rejects_undrawable_m():
    xi = CombinatorialMatrix(xi=np.array([[1, 1], [0, 0]]), directed=True)
    omega = PropensityMatrix(omega=np.array([[1.0, 0.0], [0.0, 0.0]]), directed=True)
    with pytest.raises(InfeasibleModelError):
        GHypEModel(xi=xi, omega=omega, m=2)


def test_model_rejects_mismatched_shapes():
    xi = CombinatorialMatrix(xi=np.ones((2, 2), dtype=np.int64), directed=True)
    with pytest.raises(InputError):
        GHypEModel(xi=xi, omega=PropensityMatrix.uniform(3, directed=True), m=1)
    with pytest.raises(InputError):
        GHypEModel(xi=xi, omega=PropensityMatrix.uniform(2, directed=False), m=1)


def test_two_dyad_probabilities():
    model = two_dyad_model()
    first = MultiGraph(adj=[[1, 0], [0, 0]], directed=True)
    second = MultiGraph(adj=[[0, 1], [0, 0]], directed=True)
    assert log_pmf_wallenius(model, first) == pytest.approx(math.log(2 / 3), abs=1e-10)
    assert log_pmf_wallenius(model, second) == pytest.approx(math.log(1 / 3), abs=1e-10)


def test_outside_support_is_minus_inf():
    model = two_dyad_model()
    assert log_pmf_wallenius(model, MultiGraph(adj=[[1, 1], [0, 0]], directed=True)) == -math.inf
    assert log_pmf_wallenius(model, MultiGraph(adj=[[0, 0], [1, 0]], directed=True)) == -math.inf


def test_zero_propensity_dyad_cannot_be_drawn():
    xi = CombinatorialMatrix(xi=np.array([[1, 1], [0, 0]]), directed=True)
    omega = PropensityMatrix(omega=np.array([[1.0, 0.0], [0.0, 0.0]]), directed=True)
    model = GHypEModel(xi=xi, omega=omega, m=1)
    assert log_pmf_wallenius(model, MultiGraph(adj=[[0, 1], [0, 0]], directed=True)) == -math.inf


def test_drawing_every_positive_propensity_ball_is_certain():
    # One ball with Omega = 0 stays in the urn
    xi = CombinatorialMatrix(xi=np.array([[1, 1], [0, 0]]), directed=True)
    omega = PropensityMatrix(omega=np.array([[1.0, 0.0], [0.0, 0.0]]), directed=True)
    model = GHypEModel(xi=xi, omega=omega, m=1)
    certain = MultiGraph(adj=[[1, 0], [0, 0]], directed=True)

    assert log_pmf_wallenius(model, certain) == 0.0
    assert marginal_pmf_wallenius(model, 0, 0, 1) == 1.0
    assert marginal_pmf_wallenius(model, 0, 1, 0) == 1.0
    assert marginal_pmf_wallenius(model, 0, 1, 1) == 0.0

    exact = wallenius_process_pmf(xi, omega, 1)
    assert [(g.adj.tolist(), p) for g, p in exact.entries] == [(certain.adj.tolist(), 1)]
    assert sample_ghype(model, seed=3).adj.tolist() == certain.adj.tolist()
    assert mean_wallenius(model).tolist() == [[1.0, 0.0], [0.0, 0.0]]


def test_undirected_saturation_of_positive_propensity_balls():
    xi = combinatorial_matrix(DegreeSequence.undirected([1, 1]))
    omega = PropensityMatrix(omega=np.array([[0.0, 2.0], [2.0, 0.0]]), directed=False)
    model = GHypEModel(xi=xi, omega=omega, m=2)
    g = MultiGraph(adj=[[0, 2], [2, 0]], directed=False)
    assert log_pmf_wallenius(model, g) == 0.0
    assert marginal_pmf_wallenius(model, 0, 1, 2) == 1.0


def test_full_draw_has_probability_one():
    xi = combinatorial_matrix(DegreeSequence.directed_pair([1, 1], [1, 1]))
    model = GHypEModel(xi=xi, omega=PropensityMatrix(omega=np.array([[1.0, 2.0], [3.0, 4.0]]), directed=True), m=4)
    g = MultiGraph(adj=[[1, 1], [1, 1]], directed=True)
    assert log_pmf_wallenius(model, g) == 0.0


@pytest.mark.parametrize("directed", [True, False])
def test_constant_propensity_reduces_to_soft_configuration(directed):
    g0 = build_graph([(0, 1, 2), (1, 2, 1), (2, 2, 1)], n=3, directed=directed)
    xi = combinatorial_matrix_from_graph(g0)
    central = SoftConfigModel(xi=xi, m=g0.m)
    biased = GHypEModel(xi=xi, omega=PropensityMatrix.uniform(3, directed).scaled(3.7), m=g0.m)
    for g in enumerate_support(xi, g0.m):
        assert log_pmf_wallenius(biased, g) == pytest.approx(log_pmf(central, g), abs=1e-9)


def test_constant_propensity_reduction_on_a_large_urn():
    rng = np.random.default_rng(8)
    g0 = build_graph(((int(s), int(t), 1) for s, t in rng.integers(0, 40, size=(1500, 2))), n=40, directed=True)
    xi = combinatorial_matrix_from_graph(g0)
    central = SoftConfigModel(xi=xi, m=g0.m)
    biased = GHypEModel.uniform(xi, g0.m)
    assert log_pmf_wallenius(biased, g0) == pytest.approx(log_pmf(central, g0), abs=1e-7)


def test_pmf_is_scale_invariant(biased_undirected):
    scaled = GHypEModel(xi=biased_undirected.xi, omega=biased_undirected.omega.scaled(17.0), m=biased_undirected.m)
    for g in enumerate_support(biased_undirected.xi, biased_undirected.m)[:20]:
        assert log_pmf_wallenius(scaled, g) == pytest.approx(log_pmf_wallenius(biased_undirected, g), abs=1e-9)


def test_pmf_matches_exact_process_law(biased_undirected):
    exact = wallenius_process_pmf(biased_undirected.xi, biased_undirected.omega, biased_undirected.m)
    assert exact.total == 1
    for g, p in exact.entries:
        assert math.exp(log_pmf_wallenius(biased_undirected, g)) == pytest.approx(float(p), rel=1e-8)


def test_pmf_normalizes_over_support(biased_undirected):
    support = enumerate_support(biased_undirected.xi, biased_undirected.m)
    total = math.fsum(math.exp(log_pmf_wallenius(biased_undirected, g)) for g in support)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_two_dyad_marginal_equals_joint():
    model = two_dyad_model()
    assert marginal_pmf_wallenius(model, 0, 0, 1) == pytest.approx(2 / 3, abs=1e-10)
    assert marginal_pmf_wallenius(model, 0, 1, 1) == pytest.approx(1 / 3, abs=1e-10)
    assert marginal_pmf_wallenius(model, 0, 0, 2) == 0.0


def test_constant_propensity_marginal_matches_hypergeometric():
    xi = combinatorial_matrix(DegreeSequence.undirected([2, 3, 1]))
    central = SoftConfigModel(xi=xi, m=3)
    biased = GHypEModel(xi=xi, omega=PropensityMatrix.uniform(3, directed=False).scaled(0.4), m=3)
    for i, j in [(0, 0), (0, 1), (1, 2), (2, 2)]:
        for a in range(0, 7):
            assert marginal_pmf_wallenius(biased, i, j, a) == pytest.approx(marginal_pmf(central, i, j, a), abs=1e-10)


def test_marginals_sum_to_one(biased_undirected):
    for i, j in [(0, 0), (0, 1), (1, 2), (2, 2)]:
        total = sum(marginal_pmf_wallenius(biased_undirected, i, j, a) for a in range(0, 7))
        assert total == pytest.approx(1.0, abs=1e-6)


def test_marginal_with_shared_complement_matches_process_law():
    g0 = build_graph([(0, 1, 2), (1, 0, 1), (1, 1, 1)], n=2, directed=True)
    xi = combinatorial_matrix_from_graph(g0)
    omega = PropensityMatrix(omega=np.array([[1.0, 3.0], [1.0, 1.0]]), directed=True)
    model = GHypEModel(xi=xi, omega=omega, m=3)
    exact = wallenius_process_pmf(xi, omega, 3)
    for a in range(0, 4):
        joint = sum(float(p) for g, p in exact.entries if g.adj[0, 1] == a)
        assert marginal_pmf_wallenius(model, 0, 1, a) == pytest.approx(joint, abs=1e-9)


@pytest.mark.parametrize("w", [2.5, 0.3])
def test_two_colour_marginal_matches_scipy_wallenius(w):
    # Two occupied dyads: the marginal is the univariate Wallenius law
    xi = CombinatorialMatrix(xi=np.array([[30, 50], [0, 0]]), directed=True)
    omega = PropensityMatrix(omega=np.array([[w, 1.0], [1.0, 1.0]]), directed=True)
    model = GHypEModel(xi=xi, omega=omega, m=40)
    reference = nchypergeom_wallenius(80, 30, 40, w)
    for a in range(0, 31):
        expected = reference.pmf(a)
        assert marginal_pmf_wallenius(model, 0, 0, a) == pytest.approx(expected, rel=1e-6, abs=1e-12)
        if expected > 1e-12:
            g = MultiGraph(adj=[[a, 40 - a], [0, 0]], directed=True)
            assert log_pmf_wallenius(model, g) == pytest.approx(math.log(expected), abs=1e-6)


def test_marginal_against_constant_background_matches_scipy_wallenius():
    xi = combinatorial_matrix(DegreeSequence.directed_pair([3, 2, 4], [4, 3, 2]))
    omega = np.ones((3, 3))
    omega[1, 2] = 3.0
    model = GHypEModel(xi=xi, omega=PropensityMatrix(omega=omega, directed=True), m=9)
    b = int(xi.xi[1, 2])
    reference = nchypergeom_wallenius(xi.M, b, 9, 3.0)
    for a in range(0, b + 1):
        assert marginal_pmf_wallenius(model, 1, 2, a) == pytest.approx(reference.pmf(a), rel=1e-6, abs=1e-12)


def test_mean_with_constant_propensity_is_proportional():
    xi = combinatorial_matrix(DegreeSequence.directed_pair([3, 1, 2], [2, 2, 2]))
    model = GHypEModel(xi=xi, omega=PropensityMatrix.uniform(3, True).scaled(2.0), m=4)
    expected = 4 * xi.xi / xi.M
    assert np.allclose(mean_wallenius(model), expected, rtol=1e-9, atol=1e-12)


def test_mean_undirected_uses_adjacency_convention():
    xi = combinatorial_matrix(DegreeSequence.undirected([2, 2]))
    model = GHypEModel.uniform(xi, 2)
    # 2 m Xi / M everywhere, diagonal included
    assert np.allclose(mean_wallenius(model), np.full((2, 2), 1.0), rtol=1e-9)


def test_mean_two_dyad_system_solution():
    mean = mean_wallenius(two_dyad_model())
    assert mean[0, 0] == pytest.approx((math.sqrt(5.0) - 1.0) / 2.0, rel=1e-9)
    assert mean[0, 0] + mean[0, 1] == pytest.approx(1.0, rel=1e-12)


def test_mean_approximates_process_mean_on_a_large_urn():
    model = two_dyad_model(m=10, balls=50)
    exact = wallenius_process_pmf(model.xi, model.omega, model.m)
    process_mean = sum(float(p) * g.adj[0, 0] for g, p in exact.entries)
    assert mean_wallenius(model)[0, 0] == pytest.approx(process_mean, rel=0.02)


def test_mean_at_saturation_is_ball_matrix():
    xi = combinatorial_matrix(DegreeSequence.undirected([1, 3]))
    model = GHypEModel(xi=xi, omega=PropensityMatrix(omega=np.array([[1.0, 2.0], [2.0, 5.0]]), directed=False), m=xi.M)
    expected = xi.ball_matrix().astype(float)
    expected[np.diag_indices(2)] *= 2
    assert np.allclose(mean_wallenius(model), expected)


def test_mean_ignores_zero_propensity_dyads():
    xi = CombinatorialMatrix(xi=np.array([[2, 2], [0, 0]]), directed=True)
    omega = PropensityMatrix(omega=np.array([[1.0, 0.0], [0.0, 0.0]]), directed=True)
    mean = mean_wallenius(GHypEModel(xi=xi, omega=omega, m=2))
    assert mean.tolist() == [[2.0, 0.0], [0.0, 0.0]]


def test_fit_example_value():
    g = build_graph([(0, 1, 2)], n=2, directed=True)
    xi = combinatorial_matrix_from_graph(g)
    assert xi.xi[0, 1] == 4
    omega = fit_propensity(g, xi)
    assert omega.omega[0, 1] == pytest.approx(math.log(2.0))
    assert omega.omega[0, 0] == 0.0
    assert mean_wallenius(GHypEModel(xi=xi, omega=omega, m=g.m))[0, 1] == pytest.approx(2.0, abs=1e-9)


@pytest.mark.parametrize("directed", [True, False])
def test_fit_round_trip(directed):
    g = build_graph([(0, 1, 3), (1, 2, 2), (2, 0, 1), (1, 1, 1), (2, 1, 2)], n=3, directed=directed)
    xi = combinatorial_matrix_from_graph(g)
    omega = fit_propensity(g, xi)
    if not directed:
        assert np.array_equal(omega.omega, omega.omega.T)
    mean = mean_wallenius(GHypEModel(xi=xi, omega=omega, m=g.m))
    assert np.allclose(mean, g.adj, atol=1e-6)


def test_fit_rejects_saturated_dyad():
    g = build_graph([(0, 1, 1)], n=2, directed=True)
    with pytest.raises(SaturatedDyadError) as info:
        fit_propensity(g, combinatorial_matrix_from_graph(g))
    assert (info.value.i, info.value.j) == (0, 1)
    assert isinstance(info.value, InfeasibleModelError)


def test_fit_rejects_counts_above_ball_count():
    g = build_graph([(0, 1, 3)], n=2, directed=True)
    xi = CombinatorialMatrix(xi=np.array([[0, 2], [0, 0]]), directed=True)
    with pytest.raises(InputError):
        fit_propensity(g, xi)


def test_sampler_is_deterministic_and_respects_ball_counts(biased_undirected):
    a = [g.adj.tolist() for g in sample_ghype_many(biased_undirected, 20, seed=99)]
    b = [g.adj.tolist() for g in sample_ghype_many(biased_undirected, 20, seed=99)]
    assert a == b
    balls = biased_undirected.xi.ball_counts()
    for adj in a:
        g = MultiGraph(adj=adj, directed=False)
        assert g.m == biased_undirected.m
        assert (g.draw_counts() <= balls).all()


def test_sampler_two_dyad_frequency():
    model = two_dyad_model()
    trials = 30000
    hits = sum(g.adj[0, 0] for g in sample_ghype_many(model, trials, seed=7))
    sigma = math.sqrt(trials * (2 / 3) * (1 / 3))
    assert abs(hits - trials * 2 / 3) <= 4 * sigma


def test_sampler_matches_pmf(biased_undirected):
    exact = wallenius_process_pmf(biased_undirected.xi, biased_undirected.omega, biased_undirected.m)
    keys = [tuple(g.draw_counts().tolist()) for g, _ in exact.entries]
    probs = np.array([float(p) for _, p in exact.entries])
    trials = 20000
    counts = dict.fromkeys(keys, 0)
    for g in sample_ghype_many(biased_undirected, trials, seed=31):
        counts[tuple(g.draw_counts().tolist())] += 1
    observed = np.array([counts[k] for k in keys])

    # Pool rare outcomes so every expected count is at least 5
    expected = probs * trials
    rare = expected < 5
    observed = np.append(observed[~rare], observed[rare].sum())
    expected = np.append(expected[~rare], expected[rare].sum())
    if expected[-1] == 0:
        observed, expected = observed[:-1], expected[:-1]
    assert chisquare(observed, expected).pvalue > 0.001


def test_sampler_on_a_dense_instance():
    rng = np.random.default_rng(4)
    n = 150
    k_out = rng.integers(1, 20, size=n)
    k_in = rng.permutation(k_out)
    xi = combinatorial_matrix(DegreeSequence.directed_pair(k_out, k_in))
    omega = PropensityMatrix(omega=rng.uniform(0.1, 5.0, size=(n, n)), directed=True)
    model = GHypEModel(xi=xi, omega=omega, m=int(k_out.sum()))
    g = sample_ghype(model, seed=1)
    assert g.m == model.m
    assert (g.draw_counts() <= xi.ball_counts()).all()


def test_large_dense_instance_runs_in_time():
    rng = np.random.default_rng(12)
    n, m = 2000, 100_000
    k_out = rng.multinomial(m - n, np.full(n, 1.0 / n)) + 1
    k_in = rng.permutation(k_out)
    xi = combinatorial_matrix(DegreeSequence.directed_pair(k_out, k_in))
    omega = PropensityMatrix(omega=rng.uniform(0.1, 5.0, size=(n, n)), directed=True)
    model = GHypEModel(xi=xi, omega=omega, m=m)

    start = time.perf_counter()
    g = sample_ghype(model, seed=2)
    sampled = time.perf_counter() - start
    assert g.m == m
    assert sampled < 5.0

    start = time.perf_counter()
    value = log_pmf_wallenius(model, g, cfg=QuadratureConfig(rel_tol=1e-10))
    evaluated = time.perf_counter() - start
    assert math.isfinite(value) and value < 0.0
    assert evaluated < 1.0
