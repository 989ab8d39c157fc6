"""Random-graph generators used as data-generating processes, plus the
Erdős–Rényi edge-probability MLE.

All generators are pure given an explicit numpy Generator, so replicates can
run on independent per-replicate streams and remain bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidProbability, InvalidSpec, TooFewVertices, TooManyEdges
from .graph import Graph

__all__ = [
    "SmallWorldSpec",
    "SbmSpec",
    "ErdosRenyiSpec",
    "gen_erdos_renyi_gnp",
    "gen_erdos_renyi_gnm",
    "gen_small_world",
    "gen_sbm",
    "estimate_er_p",
    "generate_network",
]


@lru_cache(maxsize=8)
def _pair_index(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column labels of the C(n,2) vertex pairs, row-major upper triangle."""
    rows, cols = np.triu_indices(n, k=1)
    rows = rows.astype(np.int64)
    cols = cols.astype(np.int64)
    rows.setflags(write=False)
    cols.setflags(write=False)
    return rows, cols


def _check_probability(p: float, what: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0 or np.isnan(p):
        raise InvalidProbability(f"{what} must lie in [0, 1], got {p}")
    return p


def gen_erdos_renyi_gnp(n: int, p: float, rng: np.random.Generator) -> Graph:
    """G(n, p): each of the C(n,2) pairs is an edge independently with prob p."""
    p = _check_probability(p)
    n = int(n)
    if n < 2:
        return Graph(n, [])
    rows, cols = _pair_index(n)
    hit = np.flatnonzero(rng.random(rows.shape[0]) < p)
    pairs = np.column_stack([rows[hit], cols[hit]])
    return Graph._from_canonical(n, pairs)


def gen_erdos_renyi_gnm(n: int, m: int, rng: np.random.Generator) -> Graph:
    """G(n, m): a uniform draw of exactly m distinct vertex pairs."""
    n = int(n)
    m = int(m)
    max_m = n * (n - 1) // 2
    if m < 0 or m > max_m:
        raise TooManyEdges(f"m={m} outside [0, C({n},2)={max_m}]")
    if m == 0:
        return Graph(n, [])
    rows, cols = _pair_index(n)
    hit = rng.choice(max_m, size=m, replace=False)
    pairs = np.column_stack([rows[hit], cols[hit]])
    return Graph._from_canonical(n, pairs)


def estimate_er_p(g: Graph) -> float:
    """Edge-probability MLE: edge count over the number of vertex pairs."""
    if g.n < 2:
        raise TooFewVertices("need at least 2 vertices to estimate an edge probability")
    return g.edge_count / (g.n * (g.n - 1) // 2)


@dataclass(frozen=True)
class SmallWorldSpec:
    """Ring lattice of n vertices with k neighbors each, rewired with p_rewire."""

    n: int
    k: int
    p_rewire: float

    def __post_init__(self):
        if self.k % 2 != 0:
            raise InvalidSpec(f"k must be even, got {self.k}")
        if not 0 < self.k < self.n:
            raise InvalidSpec(f"need 0 < k < n, got k={self.k}, n={self.n}")
        _check_probability(self.p_rewire, "p_rewire")


def gen_small_world(spec: SmallWorldSpec, rng: np.random.Generator) -> Graph:
    """Watts–Strogatz small world.

    Start from the ring lattice where i connects to i±1..i±k/2 (mod n); each
    lattice edge is independently rewired with probability p_rewire by
    replacing its far endpoint with a uniform vertex among those creating
    neither a self-loop nor a duplicate. Edges with no valid replacement stay
    put, so the edge count is always n*k/2.
    """
    n, half = spec.n, spec.k // 2
    adj = np.zeros((n, n), dtype=bool)
    base = np.arange(n, dtype=np.int64)
    edges = []
    for off in range(1, half + 1):
        far = (base + off) % n
        edges.append(np.column_stack([base, far]))
        adj[base, far] = True
        adj[far, base] = True
    edge_arr = np.concatenate(edges)
    if spec.p_rewire > 0:
        rewire = rng.random(edge_arr.shape[0]) < spec.p_rewire
        for idx in np.flatnonzero(rewire):
            u, v = edge_arr[idx]
            candidates = np.flatnonzero(~adj[u])
            candidates = candidates[candidates != u]
            if candidates.size == 0:
                continue
            w = candidates[rng.integers(candidates.size)]
            adj[u, v] = adj[v, u] = False
            adj[u, w] = adj[w, u] = True
            edge_arr[idx, 1] = w
    lo = np.minimum(edge_arr[:, 0], edge_arr[:, 1])
    hi = np.maximum(edge_arr[:, 0], edge_arr[:, 1])
    return Graph._from_canonical(n, np.column_stack([lo, hi]))


@dataclass(frozen=True)
class SbmSpec:
    """Stochastic block model: contiguous blocks and a symmetric edge
    probability matrix (block preference matrix)."""

    block_sizes: tuple[int, ...]
    pref_matrix: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.block_sizes)
        object.__setattr__(self, "block_sizes", sizes)
        mat = tuple(tuple(float(x) for x in row) for row in self.pref_matrix)
        object.__setattr__(self, "pref_matrix", mat)
        k = len(sizes)
        if k == 0 or any(s <= 0 for s in sizes):
            raise InvalidSpec("block sizes must be positive")
        if len(mat) != k or any(len(row) != k for row in mat):
            raise InvalidSpec(f"preference matrix must be {k}x{k}")
        for a in range(k):
            for b in range(k):
                _check_probability(mat[a][b], f"pref_matrix[{a}][{b}]")
                if mat[a][b] != mat[b][a]:
                    raise InvalidSpec("preference matrix must be symmetric")

    @property
    def n(self) -> int:
        return sum(self.block_sizes)

    @classmethod
    def from_diag(cls, block_sizes, diag, off_diag) -> "SbmSpec":
        """Convenience: within-block probabilities on the diagonal, one shared
        between-block probability everywhere else."""
        k = len(block_sizes)
        if len(diag) != k:
            raise InvalidSpec("diag must have one entry per block")
        mat = [
            [float(diag[a]) if a == b else float(off_diag) for b in range(k)]
            for a in range(k)
        ]
        return cls(tuple(block_sizes), tuple(tuple(row) for row in mat))

    def block_of(self) -> np.ndarray:
        """Vertex label -> block index, for the contiguous labelling."""
        return np.repeat(np.arange(len(self.block_sizes)), self.block_sizes)


def gen_sbm(spec: SbmSpec, rng: np.random.Generator) -> Graph:
    """Each pair (i, j) is an edge independently with its blocks' preference.

    Vertices 0..n1-1 form block 0, the next n2 form block 1, and so on.
    """
    sizes = np.asarray(spec.block_sizes, dtype=np.int64)
    starts = np.concatenate([[0], np.cumsum(sizes)])
    k = len(sizes)
    chunks = []
    for a in range(k):
        na = sizes[a]
        if na >= 2:
            rows, cols = _pair_index(int(na))
            hit = np.flatnonzero(rng.random(rows.shape[0]) < spec.pref_matrix[a][a])
            if hit.size:
                chunks.append(np.column_stack([rows[hit] + starts[a], cols[hit] + starts[a]]))
        for b in range(a + 1, k):
            nb = sizes[b]
            hit = np.flatnonzero(rng.random(int(na) * int(nb)) < spec.pref_matrix[a][b])
            if hit.size:
                i = hit // nb + starts[a]
                j = hit % nb + starts[b]
                chunks.append(np.column_stack([i, j]))
    if chunks:
        pairs = np.concatenate(chunks)
    else:
        pairs = np.empty((0, 2), dtype=np.int64)
    return Graph._from_canonical(int(sizes.sum()), pairs)


@dataclass(frozen=True)
class ErdosRenyiSpec:
    """Erdős–Rényi network for the harness: fixed p (G(n,p)) or fixed m (G(n,m))."""

    n: int
    p: float | None = None
    m: int | None = None

    def __post_init__(self):
        if (self.p is None) == (self.m is None):
            raise InvalidSpec("specify exactly one of p or m")
        if self.p is not None:
            _check_probability(self.p)


NetworkSpec = SmallWorldSpec | SbmSpec | ErdosRenyiSpec


def generate_network(spec: NetworkSpec, rng: np.random.Generator) -> Graph:
    """Dispatch on the spec type; every path is pure given ``rng``."""
    if isinstance(spec, SmallWorldSpec):
        return gen_small_world(spec, rng)
    if isinstance(spec, SbmSpec):
        return gen_sbm(spec, rng)
    if isinstance(spec, ErdosRenyiSpec):
        if spec.p is not None:
            return gen_erdos_renyi_gnp(spec.n, spec.p, rng)
        return gen_erdos_renyi_gnm(spec.n, spec.m, rng)
    raise InvalidSpec(f"unknown network spec {type(spec).__name__}")
