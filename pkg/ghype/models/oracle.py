"""
Oracles
-------
Independent ground truth for the ensembles:
- exhaustive support enumeration with exact rational probabilities,
- directed preimages of undirected graphs,
- the exact distribution of the biased urn process by forward recursion,
- a naive ball-by-ball urn simulation.

Everything here favours obviously-correct code over speed. Arithmetic is
exact (math.comb, Fraction) wherever the instance is small enough, and the
simulation draws from Python's `random` module so that it shares no
generator with the samplers it checks.
"""

import itertools
import random
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, Iterator, List, Optional, Tuple

import numpy as np

from ghype.config import MAX_SUPPORT
from ghype.exceptions import InputError, SupportTooLargeError
from ghype.models.graph import CombinatorialMatrix, MultiGraph, graph_from_draws
from ghype.models.soft_config import SoftConfigModel, check_compatible
from ghype.models.wallenius import GHypEModel, PropensityMatrix
from ghype.utils.logging_config import setup_logger

log = setup_logger("oracle")

DrawVector = Tuple[int, ...]


@dataclass
class SupportEnumeration:
    """Support points of an ensemble with their exact probabilities."""

    entries: List[Tuple[MultiGraph, Fraction]]

    @property
    def total(self) -> Fraction:
        return sum((p for _, p in self.entries), Fraction(0))

    def __len__(self) -> int:
        return len(self.entries)

    def probability(self, g: MultiGraph) -> Fraction:
        key = tuple(int(x) for x in g.draw_counts())
        for graph, p in self.entries:
            if tuple(int(x) for x in graph.draw_counts()) == key:
                return p
        return Fraction(0)


def count_support(xi: CombinatorialMatrix, m: int) -> int:
    """Number of draw vectors with sum m and every dyad within its ball count."""
    ways = [1] + [0] * m
    for b in (int(x) for x in xi.ball_counts()):
        prefix = list(itertools.accumulate(ways))
        ways = [prefix[s] - (prefix[s - b - 1] if s - b - 1 >= 0 else 0) for s in range(m + 1)]
    return ways[m]


def _draw_vectors(balls: List[int], m: int) -> Iterator[DrawVector]:
    """Bounded compositions of m in lexicographic order."""
    capacity_after = list(itertools.accumulate(reversed(balls + [0])))[::-1][1:]
    current = [0] * len(balls)

    def extend(d: int, left: int) -> Iterator[DrawVector]:
        if d == len(balls):
            if left == 0:
                yield tuple(current)
            return
        for x in range(max(0, left - capacity_after[d]), min(balls[d], left) + 1):
            current[d] = x
            yield from extend(d + 1, left - x)
        current[d] = 0

    if m >= 0:
        yield from extend(0, m)


def enumerate_support(
    xi: CombinatorialMatrix, m: int, max_support: Optional[int] = None
) -> List[MultiGraph]:
    """
    Every graph with m edges whose dyads stay within their ball counts.

    Raises:
        SupportTooLargeError: the support holds more than max_support graphs.
    """
    cap = MAX_SUPPORT if max_support is None else max_support
    size = count_support(xi, m) if m >= 0 else 0
    if size > cap:
        raise SupportTooLargeError(f"Support has {size} graphs, cap is {cap}")
    balls = [int(x) for x in xi.ball_counts()]
    log.debug(f"Enumerating {size} support graphs (n={xi.n}, m={m})")
    return [graph_from_draws(v, xi.n, xi.directed) for v in _draw_vectors(balls, m)]


def exact_soft_config_pmf(xi: CombinatorialMatrix, m: int, g: MultiGraph) -> Fraction:
    """prod C(balls, draws) / C(M, m) as a Fraction."""
    check_compatible(xi, g)
    draws = [int(x) for x in g.draw_counts()]
    if sum(draws) != m:
        return Fraction(0)
    numerator = 1
    for b, a in zip((int(x) for x in xi.ball_counts()), draws):
        numerator *= comb(b, a)
    total = comb(xi.M, m)
    return Fraction(numerator, total) if total else Fraction(0)


def exact_support(model: SoftConfigModel, max_support: Optional[int] = None) -> SupportEnumeration:
    """The soft configuration model's support with Fraction probabilities (total exactly 1)."""
    graphs = enumerate_support(model.xi, model.m, max_support)
    return SupportEnumeration(
        entries=[(g, exact_soft_config_pmf(model.xi, model.m, g)) for g in graphs]
    )


def directed_preimages(g: MultiGraph) -> List[MultiGraph]:
    """
    All directed graphs whose undirected projection is g.

    Each off-diagonal pair splits its A_ij edges between the two directions;
    self-loops are fixed at A_ii / 2.
    """
    if g.directed:
        raise InputError("directed_preimages expects an undirected graph")
    n = g.n
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if g.adj[i, j] > 0]
    base = np.diag(np.diag(g.adj) // 2).astype(np.int64)

    preimages = []
    for split in itertools.product(*(range(int(g.adj[i, j]) + 1) for i, j in pairs)):
        adj = base.copy()
        for (i, j), forward in zip(pairs, split):
            adj[i, j] = forward
            adj[j, i] = int(g.adj[i, j]) - forward
        preimages.append(MultiGraph(adj=adj, directed=True))
    return preimages


def wallenius_process_pmf(
    xi: CombinatorialMatrix,
    omega: PropensityMatrix,
    m: int,
    max_support: Optional[int] = None,
) -> SupportEnumeration:
    """
    Exact law of the biased urn process.

    Propagates the distribution over partial draw vectors one draw at a time;
    each transition has probability Omega_d * (balls left in d) / total weight.
    Float propensities are converted to Fractions exactly.
    """
    model = GHypEModel(xi=xi, omega=omega, m=m)
    cap = MAX_SUPPORT if max_support is None else max_support
    size = count_support(xi, m)
    if size > cap:
        raise SupportTooLargeError(f"Support has {size} graphs, cap is {cap}")

    balls = [int(x) for x in xi.ball_counts()]
    weights = [Fraction(float(w)) for w in model.omega.weights()]
    states: Dict[DrawVector, Fraction] = {tuple([0] * len(balls)): Fraction(1)}

    for _ in range(model.m):
        following: Dict[DrawVector, Fraction] = {}
        for state, p in states.items():
            remaining = [w * (b - x) for w, b, x in zip(weights, balls, state)]
            total = sum(remaining, Fraction(0))
            for d, weight in enumerate(remaining):
                if weight == 0:
                    continue
                nxt = state[:d] + (state[d] + 1,) + state[d + 1:]
                following[nxt] = following.get(nxt, Fraction(0)) + p * weight / total
        states = following

    return SupportEnumeration(
        entries=[
            (graph_from_draws(state, xi.n, xi.directed), states[state])
            for state in sorted(states)
        ]
    )


@dataclass
class UrnSimulation:
    """Outcome counts of repeated urn runs, keyed by draw vector."""

    n: int
    directed: bool
    counts: Counter = field(default_factory=Counter)

    @property
    def trials(self) -> int:
        return sum(self.counts.values())

    def frequency(self, g: MultiGraph) -> float:
        if not self.trials:
            return 0.0
        return self.counts[tuple(int(x) for x in g.draw_counts())] / self.trials

    def merge(self, other: "UrnSimulation") -> "UrnSimulation":
        if (other.n, other.directed) != (self.n, self.directed):
            raise InputError("Cannot merge simulations of different ensembles")
        return UrnSimulation(n=self.n, directed=self.directed, counts=self.counts + other.counts)

    def mean_adjacency(self) -> np.ndarray:
        """Empirical E[A] in adjacency convention."""
        total = np.zeros((self.n, self.n))
        for draws, count in self.counts.items():
            total += count * graph_from_draws(draws, self.n, self.directed).adj
        return total / max(self.trials, 1)


def simulate_urn(
    xi: CombinatorialMatrix,
    omega: PropensityMatrix,
    m: int,
    trials: int,
    seed,
) -> UrnSimulation:
    """Draw balls one at a time with a linear scan over the dyads, trials times."""
    if trials < 1:
        raise InputError(f"trials must be at least 1, got {trials}")
    model = GHypEModel(xi=xi, omega=omega, m=m)
    rng = random.Random(seed)
    balls = [int(x) for x in xi.ball_counts()]
    weights = [float(w) for w in model.omega.weights()]

    counts: Counter = Counter()
    for _ in range(trials):
        remaining = list(balls)
        draws = [0] * len(balls)
        for _ in range(model.m):
            masses = [w * r for w, r in zip(weights, remaining)]
            target = rng.random() * sum(masses)
            chosen = None
            for d, mass in enumerate(masses):
                if mass <= 0.0:
                    continue
                chosen = d
                if target < mass:
                    break
                target -= mass
            draws[chosen] += 1
            remaining[chosen] -= 1
        counts[tuple(draws)] += 1

    return UrnSimulation(n=xi.n, directed=xi.directed, counts=counts)
