"""Treatment-assignment mechanisms: completely randomized assignment and
graph-cluster randomization built on a deterministic hop-radius (epsilon-net)
peeling partition.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidCount, InvalidProbability
from .graph import Graph, bfs_distances

__all__ = [
    "TreatmentAssignment",
    "Clustering",
    "CompletelyRandomizedDesign",
    "ClusterBernoulliDesign",
    "assign_completely_randomized",
    "epsilon_net_clusters",
    "assign_cluster_bernoulli",
    "as_z_array",
]


@dataclass(frozen=True)
class TreatmentAssignment:
    """Length-n binary treatment vector plus the design it came from."""

    z: np.ndarray
    design: str  # "completely-randomized" | "cluster-bernoulli" | "external"
    n_treated: int | None = None
    cluster_p: float | None = None

    def __post_init__(self):
        z = np.asarray(self.z, dtype=np.int8)
        if z.ndim != 1 or not np.isin(z, (0, 1)).all():
            raise ValueError("z must be a flat 0/1 vector")
        z.setflags(write=False)
        object.__setattr__(self, "z", z)

    @property
    def n(self) -> int:
        return self.z.shape[0]


def as_z_array(z) -> np.ndarray:
    """Accept a TreatmentAssignment or any 0/1 vector; return int8 array.

    int8 arrays pass straight through (the hot path; they were validated
    where they were built).
    """
    if isinstance(z, TreatmentAssignment):
        return z.z
    if isinstance(z, np.ndarray) and z.dtype == np.int8 and z.ndim == 1:
        return z
    arr = np.asarray(z, dtype=np.int8)
    if arr.ndim != 1 or (arr.size and not np.isin(arr, (0, 1)).all()):
        raise ValueError("treatment vector must be a flat 0/1 vector")
    return arr


@dataclass(frozen=True)
class Clustering:
    """Partition of the vertices with one center per cluster.

    Every member sits within ``epsilon`` hops of its center, and any two
    centers are more than ``epsilon`` hops apart (or in different components).
    """

    clusters: tuple[tuple[int, ...], ...]
    centers: tuple[int, ...]
    epsilon: int

    @property
    def k(self) -> int:
        return len(self.clusters)

    def membership(self, n: int) -> np.ndarray:
        """Vertex label -> cluster index."""
        out = np.full(n, -1, dtype=np.int64)
        for ci, members in enumerate(self.clusters):
            out[list(members)] = ci
        return out


def assign_completely_randomized(n: int, n_t: int, rng: np.random.Generator) -> TreatmentAssignment:
    """Uniform draw over the C(n, n_t) binary vectors with exactly n_t ones."""
    n, n_t = int(n), int(n_t)
    if not 0 <= n_t <= n:
        raise InvalidCount(f"n_treated must lie in [0, {n}], got {n_t}")
    z = np.zeros(n, dtype=np.int8)
    if n_t:
        z[rng.choice(n, size=n_t, replace=False)] = 1
    return TreatmentAssignment(z, "completely-randomized", n_treated=n_t)


def epsilon_net_clusters(g: Graph, epsilon: int) -> Clustering:
    """Deterministic hop-radius peeling partition.

    Vertices are sorted once, ascending by degree with ties broken toward
    the larger label. Repeatedly take the earliest not-yet-removed vertex in
    that order (the minimum-degree vertex of largest label), capture every
    remaining vertex within ``epsilon`` hops of it in the full graph, and
    remove the capture as one cluster. Peeling from the sparse periphery
    inward keeps captured balls small, so dense graphs still split into
    several clusters. Cluster member lists come back in original label
    order; centers are pairwise more than ``epsilon`` hops apart because a
    closer later center would already have been captured.
    """
    if epsilon < 0:
        raise InvalidCount(f"epsilon must be nonnegative, got {epsilon}")
    n = g.n
    order = np.lexsort((-np.arange(n), g.degrees))
    alive = np.ones(n, dtype=bool)
    clusters: list[tuple[int, ...]] = []
    centers: list[int] = []
    for v in order:
        v = int(v)
        if not alive[v]:
            continue
        dist = bfs_distances(g, v)
        members = np.flatnonzero(alive & (dist <= epsilon))
        clusters.append(tuple(int(u) for u in members))
        centers.append(v)
        alive[members] = False
    assert sum(len(c) for c in clusters) == n, "clusters must partition the vertices"
    return Clustering(tuple(clusters), tuple(centers), int(epsilon))


def assign_cluster_bernoulli(
    clustering: Clustering, p: float, rng: np.random.Generator
) -> TreatmentAssignment:
    """Independent Bernoulli(p) coin per cluster; members inherit the coin."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise InvalidProbability(f"cluster treatment probability must lie in [0,1], got {p}")
    n = sum(len(c) for c in clustering.clusters)
    coins = rng.random(clustering.k) < p
    z = np.zeros(n, dtype=np.int8)
    for ci, members in enumerate(clustering.clusters):
        if coins[ci]:
            z[list(members)] = 1
    return TreatmentAssignment(z, "cluster-bernoulli", cluster_p=p)


@dataclass(frozen=True)
class CompletelyRandomizedDesign:
    n_treated: int


@dataclass(frozen=True)
class ClusterBernoulliDesign:
    epsilon: int = 3
    p_treat: float = 0.5
