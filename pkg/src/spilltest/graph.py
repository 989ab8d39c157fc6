"""Undirected simple graphs on vertices 0..n-1, plus the structural queries
every other module consumes: degrees, BFS distances, induced subgraphs,
relabeling, and edge-list text I/O.

Graphs are immutable after construction and safe to share across workers;
all sampler mutation happens on private working copies (see null_samplers).
Edges are held both as an (m, 2) array (O(1) random edge selection) and as a
lazily built CSR adjacency (BFS and neighbor scans). Unreachable BFS
distances are reported as ``numpy.inf`` — never a large finite integer — so
hop-radius comparisons exclude other components by construction.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from ._kernels import bfs_fill
from .errors import (
    LengthMismatch,
    NotABijection,
    OutOfRangeVertex,
    ParseError,
    SelfLoop,
)

__all__ = [
    "Graph",
    "VertexPermutation",
    "new_graph",
    "labelled_degrees",
    "degree_sequence",
    "bfs_distances",
    "induced_subgraph",
    "relabel",
    "read_edge_list",
    "write_edge_list",
]


def _as_edge_array(edge_list) -> np.ndarray:
    arr = np.asarray(edge_list, dtype=np.int64)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("edge list must be a sequence of (i, j) pairs")
    return arr


class Graph:
    """Immutable undirected simple graph.

    Vertices are the integers 0..n-1. Edges are stored canonically with
    i < j per row; duplicate input pairs collapse to a single edge.
    """

    __slots__ = ("n", "_edges", "_degrees", "_indptr", "_neighbors", "_hash")

    def __init__(self, n: int, edge_list: Iterable = ()):
        n = int(n)
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        arr = _as_edge_array(edge_list)
        if arr.size:
            if arr.min() < 0 or arr.max() >= n:
                bad = arr[(arr < 0).any(axis=1) | (arr >= n).any(axis=1)][0]
                raise OutOfRangeVertex(f"edge {tuple(bad)} has endpoint outside [0, {n})")
            if (arr[:, 0] == arr[:, 1]).any():
                v = int(arr[arr[:, 0] == arr[:, 1]][0, 0])
                raise SelfLoop(f"self-loop at vertex {v}")
            lo = np.minimum(arr[:, 0], arr[:, 1])
            hi = np.maximum(arr[:, 0], arr[:, 1])
            arr = np.unique(np.column_stack([lo, hi]), axis=0)
        self.n = n
        self._edges = arr
        self._edges.setflags(write=False)
        self._degrees = None
        self._indptr = None
        self._neighbors = None
        self._hash = None

    @classmethod
    def _from_canonical(cls, n: int, pairs: np.ndarray) -> "Graph":
        """Trusted constructor: rows already (i<j), unique, in range.

        Rows need not be lexsorted; canonical row order is only fixed on
        demand (equality, hashing, serialization).
        """
        g = cls.__new__(cls)
        g.n = int(n)
        g._edges = pairs
        g._edges.setflags(write=False)
        g._degrees = None
        g._indptr = None
        g._neighbors = None
        g._hash = None
        return g

    # -- basic accessors ---------------------------------------------------

    @property
    def edge_count(self) -> int:
        return self._edges.shape[0]

    @property
    def edge_array(self) -> np.ndarray:
        """(m, 2) read-only array, each row i < j; row order unspecified."""
        return self._edges

    def edges(self) -> list[tuple[int, int]]:
        """Edge set as a lexicographically sorted list of (i, j) tuples."""
        return [(int(i), int(j)) for i, j in self.canonical_edges()]

    def canonical_edges(self) -> np.ndarray:
        """Edge rows in lexicographic order (stable across equal graphs)."""
        e = self._edges
        if e.shape[0] == 0:
            return e
        order = np.lexsort((e[:, 1], e[:, 0]))
        return e[order]

    @property
    def degrees(self) -> np.ndarray:
        """Per-vertex degree vector; sum equals 2 * edge_count."""
        if self._degrees is None:
            d = np.bincount(self._edges[:, 0], minlength=self.n)
            d += np.bincount(self._edges[:, 1], minlength=self.n)
            d.setflags(write=False)
            self._degrees = d
        return self._degrees

    def has_edge(self, i: int, j: int) -> bool:
        self._build_csr()
        lo, hi = self._indptr[i], self._indptr[i + 1]
        k = np.searchsorted(self._neighbors[lo:hi], j)
        return k < hi - lo and self._neighbors[lo + k] == j

    def neighbors(self, i: int) -> np.ndarray:
        self._build_csr()
        return self._neighbors[self._indptr[i]: self._indptr[i + 1]]

    def _build_csr(self) -> None:
        if self._indptr is not None:
            return
        e = self._edges
        src = np.concatenate([e[:, 0], e[:, 1]])
        dst = np.concatenate([e[:, 1], e[:, 0]])
        order = np.lexsort((dst, src))
        self._neighbors = dst[order]
        counts = np.bincount(src, minlength=self.n)
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        self._indptr = indptr

    # -- dunder plumbing ---------------------------------------------------

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edge_count == other.edge_count
            and bool(np.array_equal(self.canonical_edges(), other.canonical_edges()))
        )

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.canonical_edges().tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"

    def __getstate__(self):
        return self.n, np.array(self._edges)

    def __setstate__(self, state):
        n, edges = state
        self.n = n
        self._edges = edges
        self._edges.setflags(write=False)
        self._degrees = None
        self._indptr = None
        self._neighbors = None
        self._hash = None


class VertexPermutation:
    """A bijection on {0, .., n-1}, stored as the image array ``mapping``."""

    __slots__ = ("mapping",)

    def __init__(self, mapping: Sequence[int] | np.ndarray):
        arr = np.asarray(mapping, dtype=np.int64)
        if arr.ndim != 1:
            raise NotABijection("permutation must be a flat array")
        n = arr.shape[0]
        seen = np.zeros(n, dtype=bool)
        if n and (arr.min() < 0 or arr.max() >= n):
            raise NotABijection("permutation values must lie in [0, n)")
        seen[arr] = True
        if not seen.all():
            raise NotABijection("permutation must visit every label exactly once")
        self.mapping = arr
        self.mapping.setflags(write=False)

    def __len__(self) -> int:
        return self.mapping.shape[0]

    def inverse(self) -> "VertexPermutation":
        inv = np.empty_like(self.mapping)
        inv[self.mapping] = np.arange(len(self), dtype=np.int64)
        return VertexPermutation(inv)

    def __repr__(self) -> str:
        return f"VertexPermutation({self.mapping.tolist()})"


def new_graph(n: int, edge_list: Iterable) -> Graph:
    """Validated construction; alias of the Graph constructor."""
    return Graph(n, edge_list)


def labelled_degrees(g: Graph) -> np.ndarray:
    """Degree of each vertex, indexed by label."""
    return g.degrees


def degree_sequence(g: Graph) -> np.ndarray:
    """Degrees sorted ascending (the label-free sequence)."""
    return np.sort(g.degrees)


def bfs_distances(g: Graph, source: int) -> np.ndarray:
    """Hop distance from ``source`` to every vertex; inf when unreachable."""
    if not 0 <= source < g.n:
        raise OutOfRangeVertex(f"source {source} outside [0, {g.n})")
    g._build_csr()
    raw = np.full(g.n, -1, dtype=np.int64)
    queue = np.empty(g.n, dtype=np.int64)
    bfs_fill(g._indptr, g._neighbors, source, raw, queue)
    out = raw.astype(np.float64)
    out[raw < 0] = np.inf
    return out


def induced_subgraph(g: Graph, vertex_set: Iterable[int]) -> tuple[Graph, np.ndarray]:
    """Subgraph on ``vertex_set`` with vertices relabelled densely.

    Returns (subgraph, index_map) where index_map[k] is the original label
    of the subgraph's vertex k.
    """
    keep = np.unique(np.asarray(list(vertex_set), dtype=np.int64))
    if keep.size and (keep[0] < 0 or keep[-1] >= g.n):
        raise OutOfRangeVertex("vertex set contains labels outside [0, n)")
    new_label = np.full(g.n, -1, dtype=np.int64)
    new_label[keep] = np.arange(keep.size, dtype=np.int64)
    e = g.edge_array
    if e.shape[0]:
        mask = (new_label[e[:, 0]] >= 0) & (new_label[e[:, 1]] >= 0)
        sub_edges = new_label[e[mask]]
    else:
        sub_edges = e
    return Graph._from_canonical(keep.size, sub_edges), keep


def relabel(g: Graph, pi: VertexPermutation | Sequence[int]) -> Graph:
    """Image of g under the vertex permutation: edge (i,j) maps to (pi_i, pi_j)."""
    if not isinstance(pi, VertexPermutation):
        arr = np.asarray(pi, dtype=np.int64)
        if arr.shape[0] != g.n:
            raise LengthMismatch(f"permutation length {arr.shape[0]} != n {g.n}")
        pi = VertexPermutation(arr)
    if len(pi) != g.n:
        raise LengthMismatch(f"permutation length {len(pi)} != n {g.n}")
    mapped = pi.mapping[g.edge_array]
    if mapped.shape[0]:
        lo = np.minimum(mapped[:, 0], mapped[:, 1])
        hi = np.maximum(mapped[:, 0], mapped[:, 1])
        mapped = np.column_stack([lo, hi])
    return Graph._from_canonical(g.n, mapped)


def write_edge_list(g: Graph, path) -> None:
    """Text format: first line n, then one 'i j' pair per line (i < j)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{g.n}\n")
        for i, j in g.canonical_edges():
            fh.write(f"{i} {j}\n")


def read_edge_list(path) -> Graph:
    """Parse the edge-list format written by write_edge_list.

    Blank lines and lines starting with '#' are skipped; duplicate pairs are
    ignored. Raises ParseError with a 1-based line number on malformed input.
    """
    path = Path(path)
    n = None
    pairs: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if n is None:
                try:
                    n = int(line)
                except ValueError:
                    raise ParseError(f"expected vertex count, got {line!r}", line_no) from None
                if n < 0:
                    raise ParseError("vertex count must be nonnegative", line_no)
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected two vertex indices, got {line!r}", line_no)
            try:
                i, j = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer vertex index in {line!r}", line_no) from None
            if not (0 <= i < n and 0 <= j < n):
                raise OutOfRangeVertex(f"line {line_no}: edge ({i}, {j}) outside [0, {n})")
            if i == j:
                raise SelfLoop(f"line {line_no}: self-loop at vertex {i}")
            pairs.append((i, j))
    if n is None:
        raise ParseError("empty edge-list file: missing vertex count", 1)
    return Graph(n, pairs)
