"""
Generalised Hypergeometric Ensemble
-----------------------------------
The biased urn: every dyad's balls carry a propensity Omega_ij, and each of
the m draws picks a dyad with probability proportional to
Omega_ij * (balls of ij still in the urn). The resulting law is the
multivariate Wallenius non-central hypergeometric distribution.

Provides the exact PMF (one integral over (0, 1), see ghype.utils.numeric),
the single-dyad marginal, the mean system, propensity fitting and the exact
sequential sampler.

Undirected ensembles use the dyads i <= j, the doubled off-diagonal ball
counts and a symmetric Omega; self-loops are counted in loop units.
"""

import math
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

import numpy as np
from scipy.optimize import brentq

from ghype.config import MEAN_REL_TOL
from ghype.exceptions import (
    InfeasibleModelError,
    InputError,
    SaturatedDyadError,
)
from ghype.models.graph import (
    CombinatorialMatrix,
    MultiGraph,
    combinatorial_matrix_from_graph,
    dyad_index,
    graph_from_draws,
)
from ghype.models.soft_config import check_compatible, check_dyad, dyad_balls
from ghype.models.sum_tree import SumTree
from ghype.utils.logging_config import setup_logger
from ghype.utils.numeric import (
    QuadratureConfig,
    integrate_log_scale,
    log_binomial,
    log_binomial_array,
)

log = setup_logger("wallenius")

# Upper bound on (nodes x distinct exponents) evaluated per integrand block
_INTEGRAND_BLOCK = 4_000_000


@dataclass(frozen=True, eq=False)
class PropensityMatrix:
    """Dyadic odds weights Omega, meaningful up to a positive factor."""

    omega: np.ndarray
    directed: bool

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float, copy=True)
        if omega.ndim != 2 or omega.shape[0] != omega.shape[1]:
            raise InputError(f"Propensity matrix must be square, got shape {omega.shape}")
        if not np.isfinite(omega).all() or (omega < 0).any():
            raise InputError("Propensities must be finite and non-negative")
        if not self.directed and not np.allclose(omega, omega.T, rtol=1e-12, atol=0.0):
            raise InputError("Undirected propensity matrix must be symmetric")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "directed", bool(self.directed))

    @classmethod
    def uniform(cls, n: int, directed: bool) -> "PropensityMatrix":
        return cls(omega=np.ones((n, n)), directed=directed)

    @property
    def n(self) -> int:
        return self.omega.shape[0]

    def scaled(self, c: float) -> "PropensityMatrix":
        if c <= 0:
            raise InputError(f"Scale factor must be positive, got {c}")
        return PropensityMatrix(omega=self.omega * c, directed=self.directed)

    def weights(self) -> np.ndarray:
        """Per-dyad propensities in dyad_index order."""
        if self.directed:
            return self.omega.reshape(-1).copy()
        rows, cols = dyad_index(self.n, self.directed)
        return self.omega[rows, cols].copy()


@dataclass(frozen=True, eq=False)
class GHypEModel:
    """One generalised hypergeometric ensemble: urn xi, propensities omega, m draws."""

    xi: CombinatorialMatrix
    omega: PropensityMatrix
    m: int

    def __post_init__(self):
        if self.omega.n != self.xi.n:
            raise InputError(f"Omega is {self.omega.n}x{self.omega.n}, Xi is {self.xi.n}x{self.xi.n}")
        if self.omega.directed != self.xi.directed:
            raise InputError("Omega and Xi disagree on directedness")
        m = int(self.m)
        if m < 0:
            raise InputError(f"Number of draws must be non-negative, got {m}")
        if m > self.drawable_balls:
            raise InfeasibleModelError(
                f"Cannot draw m={m} edges: only {self.drawable_balls} balls have positive propensity"
            )
        object.__setattr__(self, "m", m)

    @classmethod
    def from_graph(cls, g: MultiGraph, omega: PropensityMatrix) -> "GHypEModel":
        return cls(xi=combinatorial_matrix_from_graph(g), omega=omega, m=g.m)

    @classmethod
    def uniform(cls, xi: CombinatorialMatrix, m: int) -> "GHypEModel":
        """Omega = 1 everywhere: the soft configuration model."""
        return cls(xi=xi, omega=PropensityMatrix.uniform(xi.n, xi.directed), m=m)

    @property
    def directed(self) -> bool:
        return self.xi.directed

    @property
    def n(self) -> int:
        return self.xi.n

    @property
    def drawable_balls(self) -> int:
        balls = self.xi.ball_counts()
        return int(balls[self.omega.weights() > 0].sum())


def _weight_sum(weights: np.ndarray, balls: np.ndarray, draws: np.ndarray) -> float:
    """S_Omega: total propensity of the balls left in the urn."""
    return float(np.dot(weights, balls - draws))


def _wallenius_log_integrand(exponents: np.ndarray, counts: np.ndarray) -> Callable:
    """
    G(s) = sum_d counts_d * ln(1 - exp(exponents_d * s)), s = ln z.

    Dyads sharing an exponent are merged before evaluation.
    """
    exponents, inverse = np.unique(np.asarray(exponents, dtype=float), return_inverse=True)
    counts = np.bincount(inverse, weights=np.asarray(counts, dtype=float), minlength=len(exponents))
    width = max(1, len(exponents))

    def log_integrand(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        flat = s.reshape(-1)
        out = np.empty(flat.shape)
        step = max(1, _INTEGRAND_BLOCK // width)
        for start in range(0, len(flat), step):
            block = flat[start:start + step]
            out[start:start + step] = np.log(-np.expm1(np.outer(block, exponents))) @ counts
        return out.reshape(s.shape)

    return log_integrand


def log_pmf_wallenius(
    model: GHypEModel, g: MultiGraph, cfg: Optional[QuadratureConfig] = None
) -> float:
    """
    Log-probability of g under the ensemble.

    ln[prod C(balls, draws)] + ln of the integral over (0, 1) of
    prod (1 - z^(Omega / S_Omega))^draws. Returns -inf outside the support.

    When m equals the number of balls with positive propensity, S_Omega = 0
    and the only graph in the support is certain: the result is 0.

    Raises:
        QuadratureError: the integral did not converge.
    """
    check_compatible(model.xi, g)
    draws = g.draw_counts()
    balls = model.xi.ball_counts()
    weights = model.omega.weights()
    if int(draws.sum()) != model.m or (draws > balls).any():
        return -math.inf
    positive = weights > 0
    if (draws[~positive] > 0).any():
        return -math.inf

    drawn = draws > 0
    log_comb = float(log_binomial_array(balls[drawn], draws[drawn]).sum())
    if model.m == int(balls[positive].sum()):
        if model.m < model.xi.M:
            log.info(f"Degenerate saturation: all {model.m} balls with positive propensity drawn, M={model.xi.M}")
        return log_comb

    s_omega = _weight_sum(weights, balls, draws)
    integrand = _wallenius_log_integrand(weights[drawn] / s_omega, draws[drawn])
    log_integral = integrate_log_scale(integrand, log_peak_hint=-float(model.m), cfg=cfg)
    return log_comb + log_integral


def marginal_pmf_wallenius(
    model: GHypEModel, i: int, j: int, a: int, cfg: Optional[QuadratureConfig] = None
) -> float:
    """
    Pr(X_ij = a) with every other dyad merged into one colour of M - Xi_ij balls
    and mean propensity Omega_bar = sum_{other} Xi Omega / (M - Xi_ij).

    On an undirected diagonal a counts A_ii, so odd a has probability 0.
    """
    check_dyad(model.n, i, j)
    if not model.directed and i == j:
        if a % 2:
            return 0.0
        a //= 2

    M, m = model.xi.M, model.m
    b = dyad_balls(model.xi, i, j)
    rest_balls = M - b
    rest_draws = m - a
    if a < 0 or a > b or rest_draws < 0 or rest_draws > rest_balls:
        return 0.0

    w = float(model.omega.omega[i, j])
    weighted_total = float(np.dot(model.omega.weights(), model.xi.ball_counts()))
    omega_bar = (weighted_total - w * b) / rest_balls if rest_balls else 0.0
    if (a > 0 and w == 0.0) or (rest_draws > 0 and omega_bar <= 0.0):
        return 0.0

    log_comb = log_binomial(b, a) + log_binomial(rest_balls, rest_draws)
    s_omega = w * (b - a) + omega_bar * (rest_balls - rest_draws)
    if s_omega == 0.0:
        # every positive-propensity ball of both colours is drawn: a certain outcome
        return math.exp(log_comb)

    exponents = np.array([w, omega_bar]) / s_omega
    counts = np.array([a, rest_draws])
    keep = counts > 0
    integrand = _wallenius_log_integrand(exponents[keep], counts[keep])
    return math.exp(log_comb + integrate_log_scale(integrand, log_peak_hint=-float(m), cfg=cfg))


def mean_wallenius(model: GHypEModel, rel_tol: float = MEAN_REL_TOL) -> np.ndarray:
    """
    Expected adjacency from the mean system (1 - E_ij / balls_ij)^(1 / Omega_ij) = C.

    Parametrised as E_ij = balls_ij (1 - C^Omega_ij) with t = ln C, the total
    falls monotonically as t rises to 0, so the root is bracketed and refined
    with Brent's method. Dyads with Omega = 0 or no balls stay at 0.

    Returns:
        n x n matrix in adjacency convention (undirected diagonal doubled).
    """
    balls = model.xi.ball_counts().astype(float)
    weights = model.omega.weights()
    active = (balls > 0) & (weights > 0)
    capacity = float(balls[active].sum())
    if model.m > capacity:
        raise InfeasibleModelError(f"m={model.m} exceeds the {int(capacity)} drawable balls")

    means = np.zeros_like(balls)
    m = float(model.m)
    if model.m == 0:
        pass
    elif model.m == capacity:
        means[active] = balls[active]
    else:
        b = balls[active]
        w = weights[active] / weights[active].max()

        def excess(t: float) -> float:
            return math.fsum(-b * np.expm1(w * t)) - m

        t_lo = -1.0
        while excess(t_lo) <= 0.0:
            t_lo *= 2.0
        t_star, result = brentq(excess, t_lo, 0.0, xtol=1e-300, rtol=4 * np.finfo(float).eps,
                                maxiter=500, full_output=True)
        means[active] = -b * np.expm1(w * t_star)
        residual = abs(math.fsum(means) - m)
        log.debug(f"Mean system solved — ln C={t_star:.12g}, {result.iterations} iterations, residual={residual:.3e}")
        if residual > rel_tol * m:
            log.warning(f"Mean system residual {residual:.3e} exceeds {rel_tol:.1e} * m")

    return _dyad_values_to_adjacency(means, model.n, model.directed)


def fit_propensity(g: MultiGraph, xi: CombinatorialMatrix) -> PropensityMatrix:
    """
    Propensities whose ensemble mean reproduces g: Omega_ij = -ln(1 - A_ij / balls_ij).

    Raises:
        SaturatedDyadError: a dyad carries as many edges as it has balls.
        InputError: a dyad carries more edges than balls.
    """
    check_compatible(xi, g)
    draws = g.draw_counts()
    balls = xi.ball_counts()
    rows, cols = dyad_index(g.n, g.directed)

    over = np.flatnonzero(draws > balls)
    if over.size:
        d = over[0]
        raise InputError(
            f"Dyad ({rows[d]}, {cols[d]}) has {draws[d]} edges but only {balls[d]} balls"
        )
    saturated = np.flatnonzero((draws > 0) & (draws == balls))
    if saturated.size:
        d = saturated[0]
        log.error(f"{saturated.size} saturated dyad(s); first is ({rows[d]}, {cols[d]})")
        raise SaturatedDyadError(int(rows[d]), int(cols[d]), int(draws[d]), int(balls[d]))

    positive = draws > 0
    omega = np.zeros(len(draws))
    omega[positive] = -np.log1p(-draws[positive] / balls[positive])

    matrix = np.zeros((g.n, g.n))
    matrix[rows, cols] = omega
    if not g.directed:
        matrix[cols, rows] = omega
    return PropensityMatrix(omega=matrix, directed=g.directed)


def sample_ghype(model: GHypEModel, seed) -> MultiGraph:
    """Run the biased urn process once with a private RNG seeded by seed."""
    return _sample_with(model, np.random.default_rng(seed))


def sample_ghype_many(model: GHypEModel, count: int, seed) -> Iterator[MultiGraph]:
    """Yield count independent graphs from one seeded stream."""
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield _sample_with(model, rng)


def _sample_with(model: GHypEModel, rng: np.random.Generator) -> MultiGraph:
    balls = model.xi.ball_counts()
    weights = model.omega.weights()
    remaining = balls.copy()
    draws = np.zeros_like(balls)
    tree = SumTree(weights * balls)

    for _ in range(model.m):
        total = tree.total
        if total <= 0.0:
            raise InfeasibleModelError("Urn ran out of balls with positive propensity")
        d = tree.find_prefixsum_idx(rng.random() * total)
        draws[d] += 1
        remaining[d] -= 1
        tree[d] = weights[d] * remaining[d]

    return graph_from_draws(draws, model.n, model.directed)


def _dyad_values_to_adjacency(values: np.ndarray, n: int, directed: bool) -> np.ndarray:
    rows, cols = dyad_index(n, directed)
    out = np.zeros((n, n))
    out[rows, cols] = values
    if not directed:
        out[cols, rows] = values
        out[np.diag_indices(n)] *= 2.0
    return out
