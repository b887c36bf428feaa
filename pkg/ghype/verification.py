"""
Verification Suite
------------------
Oracle-backed checks of the ensemble implementations on randomised small
instances. Each check is a plain function returning a CheckResult so it can
run from tests, from the CLI, or as a Prefect task
(see orchestration/flows/verify_flow.py).

A check never raises: library errors are recorded as a failed result.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, List, Sequence

import numpy as np
from scipy.stats import chi2_contingency, chisquare

from ghype.config import (
    DEFAULT_SEED,
    VERIFY_INSTANCES,
    VERIFY_MAX_M,
    VERIFY_MAX_N,
    VERIFY_MAX_SUPPORT,
    VERIFY_SIGNIFICANCE,
    VERIFY_TRIALS,
)
from ghype.models.graph import (
    CombinatorialMatrix,
    MultiGraph,
    build_graph,
    combinatorial_matrix_from_graph,
    degree_sequences,
    dyad_index,
)
from ghype.models.oracle import (
    count_support,
    directed_preimages,
    enumerate_support,
    exact_soft_config_pmf,
    simulate_urn,
    wallenius_process_pmf,
)
from ghype.models.soft_config import (
    SoftConfigModel,
    expected_adjacency,
    log_pmf,
    marginal_pmf,
    sample_many,
)
from ghype.models.wallenius import (
    GHypEModel,
    PropensityMatrix,
    fit_propensity,
    log_pmf_wallenius,
    marginal_pmf_wallenius,
    mean_wallenius,
    sample_ghype_many,
)
from ghype.utils.logging_config import setup_logger

log = setup_logger("verification")

CENTRAL_TOL = 1e-9
WALLENIUS_TOL = 1e-6

# Propensity of the single biased dyad in marginal checks; all others are 1
BIASED_PROPENSITY = 2.5


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Instance:
    """A small ensemble induced by a random graph, with random propensities."""

    graph: MultiGraph
    xi: CombinatorialMatrix
    omega: PropensityMatrix
    m: int


def random_graph(rng: np.random.Generator, n: int, m: int, directed: bool) -> MultiGraph:
    """m edges with uniformly random endpoints."""
    ends = rng.integers(0, n, size=(m, 2))
    return build_graph(((int(s), int(t), 1) for s, t in ends), n=n, directed=directed)


def random_omega(rng: np.random.Generator, n: int, directed: bool) -> PropensityMatrix:
    omega = rng.uniform(0.25, 4.0, size=(n, n))
    if not directed:
        omega = np.triu(omega) + np.triu(omega, 1).T
    return PropensityMatrix(omega=omega, directed=directed)


def random_instances(
    count: int = VERIFY_INSTANCES,
    max_n: int = VERIFY_MAX_N,
    max_m: int = VERIFY_MAX_M,
    seed=DEFAULT_SEED,
    max_support: int = VERIFY_MAX_SUPPORT,
) -> List[Instance]:
    """
    count instances with 2 <= n <= max_n, 1 <= m <= max_m and at most
    max_support support graphs, alternating directed and undirected.
    """
    rng = np.random.default_rng(seed)
    instances = []
    while len(instances) < count:
        directed = len(instances) % 2 == 0
        n = int(rng.integers(2, max_n + 1))
        g = random_graph(rng, n, int(rng.integers(1, max_m + 1)), directed)
        xi = combinatorial_matrix_from_graph(g)
        m = int(rng.integers(1, min(max_m, xi.M) + 1))
        if count_support(xi, m) > max_support:
            continue
        instances.append(Instance(graph=g, xi=xi, omega=random_omega(rng, n, directed), m=m))
    return instances


def _guarded(name: str, body: Callable[[], CheckResult]) -> CheckResult:
    try:
        result = body()
    except Exception as exc:
        result = CheckResult(name, False, f"{type(exc).__name__}: {exc}")
    level = "INFO" if result.passed else "ERROR"
    log.log(level, f"{name}: {'PASS' if result.passed else 'FAIL'} — {result.detail}")
    return result


def check_normalization(instances: Sequence[Instance]) -> CheckResult:
    """Both PMFs sum to 1 over the enumerated support."""
    name = "normalization"

    def body() -> CheckResult:
        worst_central = worst_wallenius = 0.0
        for inst in instances:
            support = enumerate_support(inst.xi, inst.m)
            central = SoftConfigModel(xi=inst.xi, m=inst.m)
            biased = GHypEModel(xi=inst.xi, omega=inst.omega, m=inst.m)
            total_central = math.fsum(math.exp(log_pmf(central, g)) for g in support)
            total_biased = math.fsum(math.exp(log_pmf_wallenius(biased, g)) for g in support)
            worst_central = max(worst_central, abs(total_central - 1.0))
            worst_wallenius = max(worst_wallenius, abs(total_biased - 1.0))
        passed = worst_central <= CENTRAL_TOL and worst_wallenius <= WALLENIUS_TOL
        return CheckResult(
            name, passed,
            f"{len(instances)} instances, max |sum - 1| central={worst_central:.2e} "
            f"wallenius={worst_wallenius:.2e}",
        )

    return _guarded(name, body)


def check_constant_omega_reduction(instances: Sequence[Instance], rel_tol: float = 1e-8) -> CheckResult:
    """Omega = 1 Wallenius PMF equals the hypergeometric PMF on every support point."""
    name = "constant_omega_reduction"

    def body() -> CheckResult:
        worst = 0.0
        points = 0
        for inst in instances:
            central = SoftConfigModel(xi=inst.xi, m=inst.m)
            uniform = GHypEModel.uniform(inst.xi, inst.m)
            for g in enumerate_support(inst.xi, inst.m):
                p = math.exp(log_pmf(central, g))
                q = math.exp(log_pmf_wallenius(uniform, g))
                worst = max(worst, abs(q - p) / p)
                points += 1
        return CheckResult(name, worst <= rel_tol, f"{points} support points, max rel. diff {worst:.2e}")

    return _guarded(name, body)


def check_directed_undirected_equivalence(
    count: int = 20, max_n: int = 3, max_m: int = 4, seed=DEFAULT_SEED
) -> CheckResult:
    """Summing the directed PMF over preimages gives the undirected PMF, exactly."""
    name = "directed_undirected_equivalence"

    def body() -> CheckResult:
        rng = np.random.default_rng(seed)
        worst = 0.0
        exact_failures = 0
        for _ in range(count):
            n = int(rng.integers(2, max_n + 1))
            g = random_graph(rng, n, int(rng.integers(1, max_m + 1)), directed=False)
            undirected = combinatorial_matrix_from_graph(g)
            k = degree_sequences(g).k
            directed = CombinatorialMatrix(xi=np.outer(k, k), directed=True)

            preimages = directed_preimages(g)
            exact_sum = sum((exact_soft_config_pmf(directed, g.m, h) for h in preimages), Fraction(0))
            if exact_sum != exact_soft_config_pmf(undirected, g.m, g):
                exact_failures += 1

            model_d = SoftConfigModel(xi=directed, m=g.m)
            model_u = SoftConfigModel(xi=undirected, m=g.m)
            float_sum = math.fsum(math.exp(log_pmf(model_d, h)) for h in preimages)
            target = math.exp(log_pmf(model_u, g))
            worst = max(worst, abs(float_sum - target) / target)
        passed = exact_failures == 0 and worst <= 1e-10
        return CheckResult(
            name, passed, f"{count} graphs, {exact_failures} exact mismatches, max rel. diff {worst:.2e}"
        )

    return _guarded(name, body)


def check_expected_degrees(instances: Sequence[Instance]) -> CheckResult:
    """Graph-induced expectations reproduce the inducing degrees (exactly in rationals)."""
    name = "expected_degrees"

    def body() -> CheckResult:
        worst = 0.0
        exact_failures = 0
        for inst in instances:
            model = SoftConfigModel.from_graph(inst.graph)
            degrees = degree_sequences(inst.graph)
            exact = expected_adjacency(model, exact=True)
            rows = [sum(exact[i, :], Fraction(0)) for i in range(model.n)]
            cols = [sum(exact[:, j], Fraction(0)) for j in range(model.n)]
            if rows != [Fraction(int(k)) for k in degrees.k_out] or cols != [Fraction(int(k)) for k in degrees.k_in]:
                exact_failures += 1

            approx = expected_adjacency(model)
            scale = np.maximum(degrees.k_out, 1)
            worst = max(worst, float(np.max(np.abs(approx.sum(axis=1) - degrees.k_out) / scale)))
        passed = exact_failures == 0 and worst <= 1e-12
        return CheckResult(
            name, passed, f"{len(instances)} graphs, {exact_failures} exact mismatches, max rel. diff {worst:.2e}"
        )

    return _guarded(name, body)


def check_fit_round_trip(
    count: int = 20, max_n: int = 3, max_m: int = 8, seed=DEFAULT_SEED, tol: float = 1e-6
) -> CheckResult:
    """mean_wallenius(fit_propensity(A)) == A on graphs without saturated dyads."""
    name = "fit_round_trip"

    def body() -> CheckResult:
        rng = np.random.default_rng(seed)
        worst = 0.0
        fitted = 0
        attempts = 0
        while fitted < count:
            attempts += 1
            if attempts > 100 * count:
                return CheckResult(name, False, f"only {fitted} unsaturated graphs in {attempts} attempts")
            n = int(rng.integers(2, max_n + 1))
            directed = bool(rng.random() < 0.5)
            g = random_graph(rng, n, int(rng.integers(2, max_m + 1)), directed)
            xi = combinatorial_matrix_from_graph(g)
            draws, balls = g.draw_counts(), xi.ball_counts()
            if ((draws > 0) & (draws >= balls)).any():
                continue
            omega = fit_propensity(g, xi)
            mean = mean_wallenius(GHypEModel(xi=xi, omega=omega, m=g.m))
            worst = max(worst, float(np.max(np.abs(mean - g.adj))))
            fitted += 1
        return CheckResult(name, worst <= tol, f"{fitted} graphs, max |E - A| = {worst:.2e}")

    return _guarded(name, body)


def _sampler_instances() -> List[tuple]:
    """(label, xi, omega, m): the six-outcome uniform urn and a biased two-dyad urn."""
    ones = CombinatorialMatrix(xi=np.ones((2, 2), dtype=np.int64), directed=True)
    two_dyads = CombinatorialMatrix(xi=np.array([[1, 1], [0, 0]]), directed=True)
    return [
        ("uniform 2x2, m=2", ones, PropensityMatrix.uniform(2, directed=True), 2),
        ("biased two-dyad, m=1", two_dyads, PropensityMatrix(omega=np.array([[2.0, 1.0], [1.0, 1.0]]), directed=True), 1),
    ]


def check_sampler_chi_square(
    trials: int = VERIFY_TRIALS, seed=DEFAULT_SEED, significance: float = VERIFY_SIGNIFICANCE
) -> CheckResult:
    """
    Goodness of fit of the tree sampler and the naive urn against the exact
    process law, plus a homogeneity test between the two samplers. The
    soft-configuration sampler is tested on the uniform instance as well.
    """
    name = "sampler_chi_square"

    def body() -> CheckResult:
        worst = 1.0
        notes = []
        for label, xi, omega, m in _sampler_instances():
            exact = wallenius_process_pmf(xi, omega, m)
            keys = [tuple(int(x) for x in g.draw_counts()) for g, _ in exact.entries]
            expected = np.array([float(p) for _, p in exact.entries]) * trials

            model = GHypEModel(xi=xi, omega=omega, m=m)
            tree_counts = _tally(sample_ghype_many(model, trials, seed), keys)
            urn = simulate_urn(xi, omega, m, trials, seed)
            urn_counts = np.array([urn.counts[k] for k in keys])

            pvalues = {
                "tree": chisquare(tree_counts, expected).pvalue,
                "urn": chisquare(urn_counts, expected).pvalue,
                "tree~urn": chi2_contingency(np.vstack([tree_counts, urn_counts]))[1],
            }
            if (omega.omega == 1.0).all():
                central = SoftConfigModel(xi=xi, m=m)
                pvalues["softconfig"] = chisquare(_tally(sample_many(central, trials, seed), keys), expected).pvalue
            worst = min(worst, *pvalues.values())
            notes.append(label + ": " + ", ".join(f"{k} p={v:.3g}" for k, v in pvalues.items()))
        return CheckResult(name, worst > significance, "; ".join(notes))

    return _guarded(name, body)


def _tally(graphs, keys: List[tuple]) -> np.ndarray:
    position = {k: i for i, k in enumerate(keys)}
    counts = np.zeros(len(keys), dtype=np.int64)
    for g in graphs:
        counts[position[tuple(int(x) for x in g.draw_counts())]] += 1
    return counts


def check_marginal_consistency(instances: Sequence[Instance], seed=DEFAULT_SEED) -> CheckResult:
    """
    Marginal PMFs against summed joint probabilities.

    Soft configuration: every dyad of every instance. Wallenius: one dyad per
    instance, biased against all others sharing a propensity, compared with the
    exact process law; the merged-colour marginal is exact in that setting.
    """
    name = "marginal_consistency"

    def body() -> CheckResult:
        rng = np.random.default_rng(seed)
        worst_central = worst_wallenius = 0.0
        for inst in instances:
            central = SoftConfigModel(xi=inst.xi, m=inst.m)
            support = enumerate_support(inst.xi, inst.m)
            joint = [math.exp(log_pmf(central, g)) for g in support]
            n = inst.xi.n
            rows, cols = dyad_index(n, inst.xi.directed)
            for i, j in zip(rows.tolist(), cols.tolist()):
                gap = _marginal_gap(lambda a: marginal_pmf(central, i, j, a), support, joint, i, j)
                worst_central = max(worst_central, gap)

            candidates = np.argwhere(inst.xi.ball_matrix() > 0)
            i, j = (int(v) for v in candidates[rng.integers(len(candidates))])
            omega = np.ones((n, n))
            omega[i, j] = BIASED_PROPENSITY
            if not inst.xi.directed:
                omega[j, i] = BIASED_PROPENSITY
            biased_omega = PropensityMatrix(omega=omega, directed=inst.xi.directed)
            biased = GHypEModel(xi=inst.xi, omega=biased_omega, m=inst.m)
            exact = wallenius_process_pmf(inst.xi, biased_omega, inst.m)
            worst_wallenius = max(worst_wallenius, _marginal_gap(
                lambda a: marginal_pmf_wallenius(biased, i, j, a),
                [g for g, _ in exact.entries], [float(p) for _, p in exact.entries], i, j,
            ))
        passed = worst_central <= CENTRAL_TOL and worst_wallenius <= WALLENIUS_TOL
        return CheckResult(
            name, passed,
            f"{len(instances)} instances, max gap central={worst_central:.2e} wallenius={worst_wallenius:.2e}",
        )

    return _guarded(name, body)


def _marginal_gap(marginal: Callable[[int], float], support, joint, i: int, j: int) -> float:
    """max_a |marginal(a) - sum of joint over graphs with A_ij = a|, a in A_ij units."""
    totals = {}
    for g, p in zip(support, joint):
        a = int(g.adj[i, j])
        totals[a] = totals.get(a, 0.0) + p
    top = max(totals) if totals else 0
    return max(abs(marginal(a) - totals.get(a, 0.0)) for a in range(top + 2))


def run_all_checks(
    max_n: int = VERIFY_MAX_N,
    max_m: int = VERIFY_MAX_M,
    seed=DEFAULT_SEED,
    instances: int = VERIFY_INSTANCES,
    trials: int = VERIFY_TRIALS,
    significance: float = VERIFY_SIGNIFICANCE,
) -> List[CheckResult]:
    """Every check in sequence, without Prefect."""
    log.info("=" * 60)
    log.info(f"Verification — n<={max_n}, m<={max_m}, seed={seed}, {instances} instances")
    log.info("=" * 60)
    pool = random_instances(instances, max_n, max_m, seed)
    results = [
        check_normalization(pool),
        check_constant_omega_reduction(pool),
        check_directed_undirected_equivalence(max_n=max_n, max_m=min(max_m, 4), seed=seed),
        check_expected_degrees(pool),
        check_fit_round_trip(max_n=max_n, seed=seed),
        check_marginal_consistency(pool, seed=seed),
        check_sampler_chi_square(trials=trials, seed=seed, significance=significance),
    ]
    failed = [r.name for r in results if not r.passed]
    log.info("=" * 60)
    log.info(f"Verification {'passed' if not failed else 'FAILED: ' + ', '.join(failed)}")
    log.info("=" * 60)
    return results
