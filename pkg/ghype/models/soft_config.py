"""
Soft Configuration Model
------------------------
Uniform edge sampling from the urn of stub combinations: exact PMFs,
marginals, expectations, per-dyad tests and exact sampling for directed and
undirected multigraphs.

Sampling uses the conditional-marginal method. Row totals are drawn first,
then dyads within each row, each count from a univariate hypergeometric
conditioned on the balls and draws still left.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Tuple

import numpy as np
from scipy.special import logsumexp

from ghype.exceptions import InfeasibleModelError, InputError
from ghype.models.graph import (
    CombinatorialMatrix,
    MultiGraph,
    combinatorial_matrix_from_graph,
    dyad_index,
    graph_from_draws,
)
from ghype.utils.logging_config import setup_logger
from ghype.utils.numeric import log_binomial, log_binomial_array, log_hypergeom_pmf

log = setup_logger("soft_config")

# Relative slack when ranking outcomes as "no more likely than observed"
PVALUE_LOG_SLACK = 1e-7


@dataclass(frozen=True, eq=False)
class SoftConfigModel:
    """Draw m balls uniformly without replacement from the urn described by xi."""

    xi: CombinatorialMatrix
    m: int

    def __post_init__(self):
        m = int(self.m)
        if m < 0:
            raise InputError(f"Number of draws must be non-negative, got {m}")
        if m > self.xi.M:
            raise InfeasibleModelError(f"Cannot draw m={m} edges from an urn of M={self.xi.M} balls")
        object.__setattr__(self, "m", m)

    @classmethod
    def from_graph(cls, g: MultiGraph) -> "SoftConfigModel":
        """The soft configuration model induced by g."""
        return cls(xi=combinatorial_matrix_from_graph(g), m=g.m)

    @property
    def directed(self) -> bool:
        return self.xi.directed

    @property
    def n(self) -> int:
        return self.xi.n


def check_compatible(xi: CombinatorialMatrix, g: MultiGraph) -> None:
    """Raise InputError unless g has the model's vertex count and directedness."""
    if g.n != xi.n:
        raise InputError(f"Graph has {g.n} vertices, model has {xi.n}")
    if g.directed != xi.directed:
        kind = "directed" if xi.directed else "undirected"
        raise InputError(f"Model is {kind}, graph is not")


def check_dyad(n: int, i: int, j: int) -> None:
    if not (0 <= i < n and 0 <= j < n):
        raise InputError(f"Dyad ({i}, {j}) out of range for {n} vertices")


def dyad_balls(xi: CombinatorialMatrix, i: int, j: int) -> int:
    """Effective ball count of one dyad (doubled off the undirected diagonal)."""
    if xi.directed or i == j:
        return int(xi.xi[i, j])
    return 2 * int(xi.xi[i, j])


def log_pmf(model: SoftConfigModel, g: MultiGraph) -> float:
    """
    Log-probability of g under the multivariate hypergeometric law.

    Returns -inf outside the sample space (wrong edge count or a dyad
    exceeding its ball count).
    """
    check_compatible(model.xi, g)
    draws = g.draw_counts()
    balls = model.xi.ball_counts()
    if int(draws.sum()) != model.m or (draws > balls).any():
        return -math.inf
    return float(log_binomial_array(balls, draws).sum() - log_binomial(model.xi.M, model.m))


def marginal_pmf(model: SoftConfigModel, i: int, j: int, a: int) -> float:
    """Pr(X_ij = a). On an undirected diagonal a counts A_ii, so odd a has probability 0."""
    check_dyad(model.n, i, j)
    if not model.directed and i == j:
        if a % 2:
            return 0.0
        a //= 2
    balls = dyad_balls(model.xi, i, j)
    return float(np.exp(log_hypergeom_pmf(a, balls, model.xi.M, model.m)))


def expected_adjacency(model: SoftConfigModel, exact: bool = False) -> np.ndarray:
    """
    E[X] in adjacency convention.

    Directed: m Xi_ij / M. Undirected: 2 m Xi_ij / M everywhere; on the diagonal
    this is twice the expected number of self-loops, so row sums give degrees.
    With exact=True the entries are Fractions.
    """
    factor = 1 if model.directed else 2
    M = model.xi.M
    if exact:
        out = np.empty((model.n, model.n), dtype=object)
        for i in range(model.n):
            for j in range(model.n):
                out[i, j] = Fraction(factor * model.m * int(model.xi.xi[i, j]), M) if M else Fraction(0)
        return out
    if M == 0:
        return np.zeros((model.n, model.n))
    return factor * model.m * model.xi.xi.astype(float) / M


def sample(model: SoftConfigModel, seed) -> MultiGraph:
    """Draw one graph from the model with a private RNG seeded by seed."""
    return _sample_with(model, np.random.default_rng(seed))


def sample_many(model: SoftConfigModel, count: int, seed) -> Iterator[MultiGraph]:
    """Yield count independent graphs from one seeded stream."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield _sample_with(model, rng)


def _sample_with(model: SoftConfigModel, rng: np.random.Generator) -> MultiGraph:
    n, directed = model.n, model.directed
    balls = model.xi.ball_counts()
    draws = np.zeros_like(balls)
    if model.m == 0 or n == 0:
        return graph_from_draws(draws, n, directed)

    rows, _ = dyad_index(n, directed)
    starts = np.searchsorted(rows, np.arange(n))
    ends = np.append(starts[1:], len(rows))
    row_balls = np.add.reduceat(balls, starts)

    remaining_balls = model.xi.M
    remaining_draws = model.m
    for r in range(n):
        if remaining_draws == 0:
            break
        row_total = int(row_balls[r])
        row_draws = _hypergeometric_draw(rng, row_total, remaining_balls - row_total, remaining_draws)
        remaining_balls -= row_total
        remaining_draws -= row_draws

        left_balls, left_draws = row_total, row_draws
        for d in range(starts[r], ends[r]):
            if left_draws == 0:
                break
            b = int(balls[d])
            if b == 0:
                continue
            x = _hypergeometric_draw(rng, b, left_balls - b, left_draws)
            draws[d] = x
            left_balls -= b
            left_draws -= x

    return graph_from_draws(draws, n, directed)


def _hypergeometric_draw(rng: np.random.Generator, good: int, bad: int, draws: int) -> int:
    """
    Inverse-CDF walk from the mode: visit outcomes in decreasing probability
    order (the more likely neighbour first) and stop where the uniform lands.
    """
    lo = max(0, draws - bad)
    hi = min(good, draws)
    if lo == hi:
        return lo

    mode = (draws + 1) * (good + 1) // (good + bad + 2)
    mode = min(max(mode, lo), hi)
    p_mode = math.exp(
        log_binomial(good, mode) + log_binomial(bad, draws - mode) - log_binomial(good + bad, draws)
    )

    def up(k: int) -> float:
        return (good - k) * (draws - k) / ((k + 1) * (bad - draws + k + 1))

    def down(k: int) -> float:
        return k * (bad - draws + k) / ((good - k + 1) * (draws - k + 1))

    u = rng.random()
    if u < p_mode:
        return mode
    u -= p_mode

    lower, upper = mode - 1, mode + 1
    p_lower = p_mode * down(mode) if lower >= lo else 0.0
    p_upper = p_mode * up(mode) if upper <= hi else 0.0
    while lower >= lo or upper <= hi:
        if upper <= hi and (lower < lo or p_upper >= p_lower):
            if u < p_upper:
                return upper
            u -= p_upper
            p_upper *= up(upper)
            upper += 1
        else:
            if u < p_lower:
                return lower
            u -= p_lower
            p_lower *= down(lower)
            lower -= 1

    # Rounding left u above the accumulated mass
    return mode


def dyad_pvalues(model: SoftConfigModel, g: MultiGraph) -> Tuple[np.ndarray, np.ndarray]:
    """
    Two-sided per-dyad p-values under the soft configuration marginals.

    p_ij sums the probability of every count no more likely than the observed
    one. Dyads whose observed count lies outside the marginal support get
    p = 0 and are flagged in the returned boolean mask.

    Returns:
        (pvalues, impossible), both n x n and symmetric when undirected.
    """
    check_compatible(model.xi, g)
    n, M, m = model.n, model.xi.M, model.m
    rows, cols = dyad_index(n, model.directed)
    balls = model.xi.ball_counts()
    draws = g.draw_counts()

    pvalues = np.ones((n, n))
    impossible = np.zeros((n, n), dtype=bool)
    cache = {}
    for d in range(len(balls)):
        key = (int(balls[d]), int(draws[d]))
        if key not in cache:
            cache[key] = _dyad_pvalue(key[0], key[1], M, m)
        p, flagged = cache[key]
        i, j = int(rows[d]), int(cols[d])
        pvalues[i, j] = p
        impossible[i, j] = flagged
        if not model.directed:
            pvalues[j, i] = p
            impossible[j, i] = flagged

    log.info(
        f"Dyad tests — {len(balls)} dyads, {len(cache)} distinct (balls, count) pairs, "
        f"{int(impossible.sum())} impossible entries"
    )
    return pvalues, impossible


def _dyad_pvalue(balls: int, observed: int, M: int, m: int) -> Tuple[float, bool]:
    lo = max(0, m - (M - balls))
    hi = min(balls, m)
    if not lo <= observed <= hi:
        return 0.0, True
    support = np.arange(lo, hi + 1)
    logp = log_hypergeom_pmf(support, balls, M, m)
    threshold = logp[observed - lo] + PVALUE_LOG_SLACK
    p = float(np.exp(logsumexp(logp[logp <= threshold])))
    return min(1.0, max(0.0, p)), False
