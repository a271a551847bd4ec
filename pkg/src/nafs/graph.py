"""Undirected graphs in CSR form and the normalized smoothing operators over them."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import DataError, ParameterError


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph: symmetric, deduplicated, no self loops.

    ``indptr``/``indices`` hold the adjacency in CSR form with strictly
    increasing column indices per row.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def m(self) -> int:
        return int(self.indices.size // 2)

    @cached_property
    def dtilde(self) -> np.ndarray:
        """Degrees with the implicit self loop counted, as floats."""
        return self.degrees.astype(np.float64) + 1.0

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i]:self.indptr[i + 1]]

    def edges(self) -> np.ndarray:
        """Each undirected edge once, as an (m, 2) array with u < v."""
        rows = np.repeat(np.arange(self.n, dtype=np.int64), self.degrees)
        keep = rows < self.indices
        return np.column_stack([rows[keep], self.indices[keep]])

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(self.indices.size, dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(edges: Iterable | np.ndarray, n: int) -> Graph:
    """Build a graph from (u, v) pairs, dropping self loops and duplicates."""
    e = np.asarray(edges if isinstance(edges, np.ndarray) else list(edges), dtype=np.int64)
    if e.size == 0:
        e = e.reshape(0, 2)
    if e.ndim != 2 or e.shape[1] != 2:
        raise DataError(f"edge list must have shape (m, 2), got {e.shape}")
    if n < 0:
        raise ParameterError(f"node count must be non-negative, got {n}")
    bad = np.flatnonzero((e < 0).any(axis=1) | (e >= n).any(axis=1))
    if bad.size:
        u, v = e[bad[0]]
        raise DataError(f"edge {bad[0]} ({u}, {v}) has a node index outside [0, {n})")

    e = e[e[:, 0] != e[:, 1]]
    both = np.concatenate([e, e[:, ::-1]])
    keys = np.unique(both[:, 0] * max(n, 1) + both[:, 1])
    rows, cols = np.divmod(keys, max(n, 1))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return Graph(n=n, indptr=indptr, indices=cols.astype(np.int64))


@dataclass(frozen=True, eq=False)
class NormalizedOperator:
    """The smoothing matrix D~^(r-1) (A + I) D~^(-r), kept implicit.

    Off-diagonal entries live in a CSR matrix that shares the graph's
    structure; the self-loop contribution d~_i^(-1) is applied as a separate
    diagonal scaling inside :func:`spmm`.
    """

    graph: Graph
    r: float
    offdiag: sp.csr_matrix = field(repr=False)
    diag: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def dtilde(self) -> np.ndarray:
        return self.graph.dtilde

    def to_dense(self) -> np.ndarray:
        """Materialize the operator. Intended for small graphs and tests."""
        dense = self.offdiag.toarray()
        dense[np.diag_indices(self.n)] += self.diag
        return dense


def normalized_operator(g: Graph, r: float) -> NormalizedOperator:
    r = float(r)
    if not 0.0 <= r <= 1.0:
        raise ParameterError(f"r must lie in [0, 1], got {r}")
    dt = g.dtilde
    rows = np.repeat(np.arange(g.n, dtype=np.int64), g.degrees)
    data = dt[rows] ** (r - 1.0) * dt[g.indices] ** (-r)
    offdiag = sp.csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))
    offdiag.has_sorted_indices = True
    return NormalizedOperator(graph=g, r=r, offdiag=offdiag, diag=1.0 / dt)


def _spmm_rows(op: NormalizedOperator, x: np.ndarray, lo: int, hi: int) -> np.ndarray:
    return op.offdiag[lo:hi] @ x + op.diag[lo:hi, None] * x[lo:hi]


def spmm(op: NormalizedOperator, x: np.ndarray, threads: int = 1) -> np.ndarray:
    """Return op @ x.

    Each output row is accumulated in column order, so the result does not
    depend on ``threads``; threads only split the rows into blocks.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != op.n:
        raise DataError(f"feature matrix has shape {x.shape}, expected ({op.n}, f)")
    if threads <= 1 or op.n < 4096:
        return op.offdiag @ x + op.diag[:, None] * x
    bounds = np.linspace(0, op.n, threads + 1).astype(int)
    out = np.empty_like(x)

    def work(b):
        lo, hi = bounds[b], bounds[b + 1]
        out[lo:hi] = _spmm_rows(op, x, lo, hi)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        list(pool.map(work, range(threads)))
    return out


@dataclass(frozen=True)
class ComponentMap:
    component_id: np.ndarray
    node_counts: np.ndarray
    edge_counts: np.ndarray

    @property
    def count(self) -> int:
        return int(self.node_counts.size)


def connected_components(g: Graph) -> ComponentMap:
    ncomp, labels = csgraph.connected_components(g.adjacency(), directed=False)
    labels = labels.astype(np.int64)
    node_counts = np.bincount(labels, minlength=ncomp)
    e = g.edges()
    edge_counts = np.bincount(labels[e[:, 0]], minlength=ncomp) if len(e) else np.zeros(ncomp, np.int64)
    return ComponentMap(labels, node_counts, edge_counts)


def is_connected(g: Graph) -> bool:
    return g.n > 0 and connected_components(g).count == 1


def _pair_from_index(t: np.ndarray) -> np.ndarray:
    # t = j*(j-1)/2 + i with 0 <= i < j
    j = np.floor((1.0 + np.sqrt(1.0 + 8.0 * t.astype(np.float64))) / 2.0).astype(np.int64)
    j -= (j * (j - 1) // 2) > t
    j += ((j + 1) * j // 2) <= t
    i = t - j * (j - 1) // 2
    return np.column_stack([i, j])


def generate_er(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each unordered pair is an edge independently with probability p.

    The edge count is drawn from Binomial(n(n-1)/2, p) and that many distinct
    pairs are then chosen uniformly, which has the same distribution as
    independent per-pair coin flips but costs O(m) instead of O(n^2).
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    total = n * (n - 1) // 2
    m = int(rng.binomial(total, p)) if total else 0
    picks = np.sort(rng.choice(total, size=m, replace=False)) if m else np.zeros(0, np.int64)
    return build_graph(_pair_from_index(picks.astype(np.int64)), n)
