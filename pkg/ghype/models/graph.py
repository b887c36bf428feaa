"""
Graph Core
----------
Multigraph representation, degree accounting, combinatorial matrices and the
directed -> undirected projection.

Conventions:
- Vertices are dense integer indices 0..n-1 (labels live in the CLI layer).
- Undirected adjacency stores each self-loop twice on the diagonal, so the
  row sums are the degrees and sum(A) == 2m.
- Every per-dyad vector (balls, draws) follows the order of dyad_index():
  row-major over all n*n dyads when directed, upper triangle including the
  diagonal when undirected.
"""

from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from ghype.exceptions import InputError


def _frozen_int_matrix(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.int64, copy=True)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise InputError(f"{name} must be a square matrix, got shape {arr.shape}")
    if (arr < 0).any():
        raise InputError(f"{name} entries must be non-negative")
    arr.setflags(write=False)
    return arr


def _frozen_int_vector(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.int64, copy=True).reshape(-1)
    if (arr < 0).any():
        raise InputError(f"{name} entries must be non-negative")
    arr.setflags(write=False)
    return arr


def dyad_index(n: int, directed: bool) -> Tuple[np.ndarray, np.ndarray]:
    """Row and column indices of every dyad, in canonical order."""
    if directed:
        rows, cols = np.divmod(np.arange(n * n), n)
        return rows, cols
    return np.triu_indices(n)


@dataclass(frozen=True, eq=False)
class MultiGraph:
    """Directed or undirected multigraph with self-loops, as a dense adjacency matrix."""

    adj: np.ndarray
    directed: bool

    def __post_init__(self):
        adj = _frozen_int_matrix(self.adj, "Adjacency matrix")
        if not self.directed:
            if not np.array_equal(adj, adj.T):
                raise InputError("Undirected adjacency matrix must be symmetric")
            if (np.diag(adj) % 2).any():
                raise InputError("Undirected adjacency diagonal must be even (self-loops count twice)")
        object.__setattr__(self, "adj", adj)
        object.__setattr__(self, "directed", bool(self.directed))

    @property
    def n(self) -> int:
        return self.adj.shape[0]

    @property
    def m(self) -> int:
        """Number of multi-edges."""
        total = int(self.adj.sum())
        return total if self.directed else total // 2

    def multiplicity(self, i: int, j: int) -> int:
        """Number of multi-edges on dyad (i, j); A_ii / 2 on an undirected diagonal."""
        value = int(self.adj[i, j])
        if not self.directed and i == j:
            return value // 2
        return value

    def draw_counts(self) -> np.ndarray:
        """Per-dyad multiplicities in dyad_index order (self-loop units when undirected)."""
        if self.directed:
            return self.adj.reshape(-1).copy()
        rows, cols = dyad_index(self.n, False)
        draws = self.adj[rows, cols].copy()
        draws[rows == cols] //= 2
        return draws

    def edges(self) -> List[Tuple[int, int, int]]:
        """(src, dst, multiplicity) for every dyad with at least one edge."""
        rows, cols = dyad_index(self.n, self.directed)
        draws = self.draw_counts()
        nonzero = np.flatnonzero(draws)
        return [(int(rows[d]), int(cols[d]), int(draws[d])) for d in nonzero]


@dataclass(frozen=True, eq=False)
class DegreeSequence:
    """In/out degree vectors (directed) or a single degree vector (undirected)."""

    k_out: np.ndarray
    k_in: np.ndarray
    directed: bool

    def __post_init__(self):
        k_out = _frozen_int_vector(self.k_out, "Out-degree")
        k_in = k_out if not self.directed else _frozen_int_vector(self.k_in, "In-degree")
        if k_out.shape != k_in.shape:
            raise InputError("In- and out-degree sequences must have the same length")
        if self.directed and k_out.sum() != k_in.sum():
            raise InputError(
                f"Degree sums differ: out={int(k_out.sum())}, in={int(k_in.sum())}"
            )
        if not self.directed and k_out.sum() % 2:
            raise InputError(f"Undirected degree sum must be even, got {int(k_out.sum())}")
        object.__setattr__(self, "k_out", k_out)
        object.__setattr__(self, "k_in", k_in)

    @classmethod
    def directed_pair(cls, k_out, k_in) -> "DegreeSequence":
        return cls(k_out=k_out, k_in=k_in, directed=True)

    @classmethod
    def undirected(cls, k) -> "DegreeSequence":
        return cls(k_out=k, k_in=k, directed=False)

    @property
    def k(self) -> np.ndarray:
        return self.k_out

    @property
    def n(self) -> int:
        return self.k_out.shape[0]

    @property
    def m(self) -> int:
        total = int(self.k_out.sum())
        return total if self.directed else total // 2


@dataclass(frozen=True, eq=False)
class CombinatorialMatrix:
    """
    Stub-combination counts Xi and their total M.

    Undirected matrices store Xi_ij = k_i k_j; the urn holds 2 Xi_ij balls for
    i != j and Xi_ii balls on the diagonal (see ball_counts()).
    """

    xi: np.ndarray
    directed: bool

    def __post_init__(self):
        xi = _frozen_int_matrix(self.xi, "Combinatorial matrix")
        if not self.directed and not np.array_equal(xi, xi.T):
            raise InputError("Undirected combinatorial matrix must be symmetric")
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "directed", bool(self.directed))

    @property
    def n(self) -> int:
        return self.xi.shape[0]

    @property
    def M(self) -> int:
        """Total number of balls in the urn."""
        return int(self.xi.sum())

    def ball_counts(self) -> np.ndarray:
        """Per-dyad ball counts in dyad_index order."""
        if self.directed:
            return self.xi.reshape(-1).copy()
        rows, cols = dyad_index(self.n, False)
        balls = self.xi[rows, cols].copy()
        balls[rows != cols] *= 2
        return balls

    def ball_matrix(self) -> np.ndarray:
        """Effective ball counts as an n x n matrix (2 Xi off the diagonal when undirected)."""
        if self.directed:
            return self.xi.copy()
        return 2 * self.xi - np.diag(np.diag(self.xi))


def build_graph(edges: Iterable[Tuple[int, int, int]], n: int, directed: bool) -> MultiGraph:
    """
    Accumulate (src, dst, multiplicity) triples into a MultiGraph.

    Undirected input lists each edge once; a self-loop of multiplicity w is
    stored as A_ii = 2w.
    """
    if n < 0:
        raise InputError(f"Vertex count must be non-negative, got {n}")
    adj = np.zeros((n, n), dtype=np.int64)
    for src, dst, weight in edges:
        if not (0 <= src < n and 0 <= dst < n):
            raise InputError(f"Edge ({src}, {dst}) out of range for {n} vertices")
        if int(weight) != weight or weight <= 0:
            raise InputError(f"Edge ({src}, {dst}) has non-positive multiplicity {weight}")
        weight = int(weight)
        if directed:
            adj[src, dst] += weight
        elif src == dst:
            adj[src, src] += 2 * weight
        else:
            adj[src, dst] += weight
            adj[dst, src] += weight
    return MultiGraph(adj=adj, directed=directed)


def graph_from_draws(draws, n: int, directed: bool) -> MultiGraph:
    """Inverse of MultiGraph.draw_counts()."""
    draws = np.asarray(draws, dtype=np.int64)
    if directed:
        return MultiGraph(adj=draws.reshape(n, n), directed=True)
    rows, cols = dyad_index(n, directed)
    adj = np.zeros((n, n), dtype=np.int64)
    adj[rows, cols] = draws
    adj[cols, rows] = draws
    adj[np.diag_indices(n)] *= 2
    return MultiGraph(adj=adj, directed=False)


def degree_sequences(g: MultiGraph) -> DegreeSequence:
    """Row and column sums of the adjacency matrix."""
    if g.directed:
        return DegreeSequence.directed_pair(g.adj.sum(axis=1), g.adj.sum(axis=0))
    return DegreeSequence.undirected(g.adj.sum(axis=1))


def combinatorial_matrix(d: DegreeSequence) -> CombinatorialMatrix:
    """Xi_ij = k_out_i * k_in_j (k_i * k_j when undirected)."""
    return CombinatorialMatrix(xi=np.outer(d.k_out, d.k_in), directed=d.directed)


def combinatorial_matrix_from_graph(g: MultiGraph) -> CombinatorialMatrix:
    return combinatorial_matrix(degree_sequences(g))


def undirected_projection(g: MultiGraph) -> MultiGraph:
    """Map a directed multigraph to the undirected one with adjacency A + A^T."""
    if not g.directed:
        raise InputError("undirected_projection expects a directed graph")
    return MultiGraph(adj=g.adj + g.adj.T, directed=False)
