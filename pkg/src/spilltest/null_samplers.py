"""Samplers over the conditional null classes used to build the reference
distribution: graphs with the observed labelled degree sequence (double-edge
swap MCMC), degree-preserving relabelings, treatment-stratified
degree-preserving relabelings, and parametric Erdős–Rényi redraws.

A brute-force enumerator over the same classes acts as the correctness
oracle at small n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Protocol

import numpy as np

from ._kernels import run_swap_attempts
from .designs import as_z_array
from .errors import InvalidCount, LengthMismatch, TooLargeForEnumeration
from .generators import gen_erdos_renyi_gnp
from .graph import Graph

__all__ = [
    "NullClassMode",
    "SwapChainConfig",
    "SwapChain",
    "double_edge_swap_step",
    "sample_same_degree_sequence",
    "sample_degree_isomorphism",
    "sample_block_isomorphism",
    "DegreeSequenceSwapSampler",
    "DegreeClassPermutationSampler",
    "BlockPermutationSampler",
    "ErdosRenyiGnpSampler",
    "make_null_sampler",
    "enumerate_null_class",
]


class NullClassMode(str, Enum):
    """The conditional classes with exact enumeration support."""

    LABELLED_DEGREE_SEQUENCE = "degseq"
    DEGREE_ISOMORPHISM = "iso"
    BLOCK_DEGREE_ISOMORPHISM = "blockiso"


@dataclass(frozen=True)
class SwapChainConfig:
    """Absolute swap counts for the degree-sequence MCMC chain."""

    burn_in_swaps: int
    swaps_between_samples: int

    def __post_init__(self):
        if self.burn_in_swaps < 0 or self.swaps_between_samples < 0:
            raise InvalidCount("swap counts must be nonnegative")

    @classmethod
    def from_multipliers(
        cls, edge_count: int, burn_in_mult: float = 100.0, thin_mult: float = 10.0
    ) -> "SwapChainConfig":
        """CLI convention: counts as multiples of the observed edge count."""
        return cls(
            burn_in_swaps=int(round(burn_in_mult * edge_count)),
            swaps_between_samples=int(round(thin_mult * edge_count)),
        )


_SEGMENT = 1 << 19  # proposals per pre-generated random block


class SwapChain:
    """Mutable working copy of a graph evolving under double-edge swaps.

    Each proposal picks two distinct edges uniformly, picks one of the two
    rewirings uniformly, and applies it unless it would create a self-loop
    or a duplicate edge (rejections are counted, never resampled). Every
    state keeps the labelled degree vector of the start graph. Uses an
    n x n boolean adjacency internally, which is the right trade at the
    desk scales this package targets.
    """

    def __init__(self, g: Graph):
        self.n = g.n
        self._edges = np.array(g.edge_array, dtype=np.int64)
        self._adj = np.zeros((g.n, g.n), dtype=bool)
        e = self._edges
        self._adj[e[:, 0], e[:, 1]] = True
        self._adj[e[:, 1], e[:, 0]] = True
        self.attempted = 0
        self.accepted = 0

    @property
    def edge_count(self) -> int:
        return self._edges.shape[0]

    def degrees(self) -> np.ndarray:
        d = np.bincount(self._edges[:, 0], minlength=self.n)
        d += np.bincount(self._edges[:, 1], minlength=self.n)
        return d

    def advance(self, n_attempts: int, rng: np.random.Generator) -> int:
        """Run proposals; returns how many were accepted.

        With fewer than two edges no proposal is possible and the chain
        (correctly) stays put without consuming randomness.
        """
        m = self.edge_count
        if m < 2 or n_attempts <= 0:
            return 0
        done = 0
        accepted = 0
        while done < n_attempts:
            k = min(_SEGMENT, n_attempts - done)
            first = rng.integers(0, m, size=k)
            offset = rng.integers(0, m - 1, size=k)
            side = rng.integers(0, 2, size=k)
            accepted += run_swap_attempts(self._edges, self._adj, first, offset, side)
            done += k
        self.attempted += n_attempts
        self.accepted += accepted
        return accepted

    def step(self, rng: np.random.Generator) -> bool:
        """One proposal; True when it was applied."""
        return self.advance(1, rng) == 1

    def snapshot(self) -> Graph:
        return Graph._from_canonical(self.n, np.array(self._edges))


def double_edge_swap_step(chain: SwapChain, rng: np.random.Generator) -> bool:
    """Single degree-preserving rewiring proposal on the working copy."""
    return chain.step(rng)


class NullSampler(Protocol):
    name: str

    def draw(self, rng: np.random.Generator) -> Graph: ...


class DegreeSequenceSwapSampler:
    """Draws from the labelled-degree-sequence class via the swap chain.

    The chain starts at the observed graph; the first draw follows
    burn_in_swaps proposals and later draws follow swaps_between_samples
    each, so a zero/zero config replays the observed graph.
    """

    name = NullClassMode.LABELLED_DEGREE_SEQUENCE.value

    def __init__(self, g_obs: Graph, config: SwapChainConfig):
        self.config = config
        self._chain = SwapChain(g_obs)
        self._started = False

    @property
    def chain(self) -> SwapChain:
        return self._chain

    def draw(self, rng: np.random.Generator) -> Graph:
        if not self._started:
            self._chain.advance(self.config.burn_in_swaps, rng)
            self._started = True
        else:
            self._chain.advance(self.config.swaps_between_samples, rng)
        return self._chain.snapshot()


def sample_same_degree_sequence(
    g_obs: Graph, config: SwapChainConfig, count: int, rng: np.random.Generator
) -> list[Graph]:
    """``count`` draws from one swap chain started at the observed graph."""
    sampler = DegreeSequenceSwapSampler(g_obs, config)
    return [sampler.draw(rng) for _ in range(count)]


def _permute_within_groups(groups: list[np.ndarray], n: int, rng: np.random.Generator) -> np.ndarray:
    pi = np.arange(n, dtype=np.int64)
    for grp in groups:
        pi[grp] = grp[rng.permutation(grp.size)]
    return pi


def _relabel_fast(g: Graph, pi: np.ndarray) -> Graph:
    mapped = pi[g.edge_array]
    if mapped.shape[0]:
        lo = np.minimum(mapped[:, 0], mapped[:, 1])
        hi = np.maximum(mapped[:, 0], mapped[:, 1])
        mapped = np.column_stack([lo, hi])
    return Graph._from_canonical(g.n, mapped)


def _group_indices(keys: np.ndarray) -> list[np.ndarray]:
    """Indices grouped by equal key, singleton groups dropped."""
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    cuts = np.flatnonzero(np.diff(sorted_keys)) + 1
    return [grp for grp in np.split(order, cuts) if grp.size > 1]


class DegreeClassPermutationSampler:
    """Uniform permutation over the product of symmetric groups on each
    degree class; draws are degree-preserving relabelings of the observed
    graph. Classes are computed once and cached."""

    name = NullClassMode.DEGREE_ISOMORPHISM.value

    def __init__(self, g_obs: Graph):
        self.g_obs = g_obs
        self._groups = _group_indices(np.asarray(g_obs.degrees, dtype=np.int64))

    def draw_permutation(self, rng: np.random.Generator) -> np.ndarray:
        return _permute_within_groups(self._groups, self.g_obs.n, rng)

    def draw(self, rng: np.random.Generator) -> Graph:
        return _relabel_fast(self.g_obs, self.draw_permutation(rng))


class BlockPermutationSampler:
    """Same as DegreeClassPermutationSampler but cells are (degree, arm):
    treated units map only to treated units of equal degree, controls to
    controls. Draws therefore preserve the labelled degree vector and induce
    isomorphisms on both arm subgraphs."""

    name = NullClassMode.BLOCK_DEGREE_ISOMORPHISM.value

    def __init__(self, g_obs: Graph, z_obs):
        z = as_z_array(z_obs)
        if z.shape[0] != g_obs.n:
            raise LengthMismatch(f"treatment length {z.shape[0]} != n {g_obs.n}")
        self.g_obs = g_obs
        deg = np.asarray(g_obs.degrees, dtype=np.int64)
        cells = deg * 2 + z  # unique key per (degree, arm) pair
        self._groups = _group_indices(cells)

    def draw_permutation(self, rng: np.random.Generator) -> np.ndarray:
        return _permute_within_groups(self._groups, self.g_obs.n, rng)

    def draw(self, rng: np.random.Generator) -> Graph:
        return _relabel_fast(self.g_obs, self.draw_permutation(rng))


class ErdosRenyiGnpSampler:
    """Parametric redraws from G(n, p); the known- or estimated-law null."""

    def __init__(self, n: int, p: float, name: str = "er"):
        self.n = int(n)
        self.p = float(p)
        self.name = name

    def draw(self, rng: np.random.Generator) -> Graph:
        return gen_erdos_renyi_gnp(self.n, self.p, rng)


def sample_degree_isomorphism(g_obs: Graph, rng: np.random.Generator) -> Graph:
    """One degree-preserving relabeling, uniform over its permutation group."""
    return DegreeClassPermutationSampler(g_obs).draw(rng)


def sample_block_isomorphism(g_obs: Graph, z_obs, rng: np.random.Generator) -> Graph:
    """One treatment-stratified degree-preserving relabeling."""
    return BlockPermutationSampler(g_obs, z_obs).draw(rng)


def make_null_sampler(
    mode: str | NullClassMode,
    g_obs: Graph,
    z_obs=None,
    swap_config: SwapChainConfig | None = None,
    er_p: float | None = None,
):
    """Build the sampler named by ``mode``.

    Class modes: "degseq" (swap chain; swap_config defaults to 100x/10x the
    edge count), "iso", "blockiso" (needs z_obs). Parametric modes: "er"
    (needs er_p) and "er-hat" (edge-probability MLE from the observed graph).
    """
    mode = mode.value if isinstance(mode, NullClassMode) else str(mode)
    if mode == NullClassMode.LABELLED_DEGREE_SEQUENCE.value:
        if swap_config is None:
            swap_config = SwapChainConfig.from_multipliers(g_obs.edge_count)
        return DegreeSequenceSwapSampler(g_obs, swap_config)
    if mode == NullClassMode.DEGREE_ISOMORPHISM.value:
        return DegreeClassPermutationSampler(g_obs)
    if mode == NullClassMode.BLOCK_DEGREE_ISOMORPHISM.value:
        if z_obs is None:
            raise ValueError("blockiso sampling needs the observed treatment vector")
        return BlockPermutationSampler(g_obs, z_obs)
    if mode == "er":
        if er_p is None:
            raise ValueError("er sampling needs the edge probability")
        return ErdosRenyiGnpSampler(g_obs.n, er_p, name="er")
    if mode == "er-hat":
        from .generators import estimate_er_p

        return ErdosRenyiGnpSampler(g_obs.n, estimate_er_p(g_obs), name="er-hat")
    raise ValueError(f"unknown null-class mode {mode!r}")


# -- exhaustive enumeration oracle ------------------------------------------

_MAX_ENUM_VERTICES = 10
_MAX_ENUM_ITEMS = 1_000_000


def _graphs_with_degree_vector(deg: np.ndarray) -> Iterator[np.ndarray]:
    """Backtracking enumeration of all simple graphs realizing the labelled
    degree vector, yielded as canonical (m, 2) arrays."""
    n = deg.shape[0]
    remaining = [int(d) for d in deg]
    edges: list[tuple[int, int]] = []

    def rec(v: int):
        if v == n:
            yield np.array(edges, dtype=np.int64).reshape(-1, 2)
            return
        need = remaining[v]
        if need == 0:
            yield from rec(v + 1)
            return
        candidates = [u for u in range(v + 1, n) if remaining[u] > 0]
        if need > len(candidates):
            return
        for combo in itertools.combinations(candidates, need):
            remaining[v] = 0
            for u in combo:
                remaining[u] -= 1
                edges.append((v, u))
            yield from rec(v + 1)
            for u in combo:
                remaining[u] += 1
                edges.pop()
            remaining[v] = need

    yield from rec(0)


def _permutation_group(groups: list[np.ndarray], n: int) -> Iterator[np.ndarray]:
    """All permutations in the product of symmetric groups on ``groups``."""
    fixed = np.arange(n, dtype=np.int64)
    perms_per_group = [list(itertools.permutations(g.tolist())) for g in groups]
    for choice in itertools.product(*perms_per_group):
        pi = fixed.copy()
        for grp, images in zip(groups, choice):
            pi[grp] = images
        yield pi


def enumerate_null_class(
    g_obs: Graph, mode: str | NullClassMode, z_obs=None
) -> tuple[list[Graph], np.ndarray]:
    """Exact finite null class with multiplicities.

    For the labelled-degree-sequence class every distinct graph appears with
    multiplicity 1. For the isomorphism classes, all permutations in the
    relevant group are walked and image graphs recorded with multiplicity
    (the permutation measure), so exact p-values match the samplers' law.
    Guarded at n <= 10 and one million enumerated items.
    """
    mode = NullClassMode(mode)
    n = g_obs.n
    if n > _MAX_ENUM_VERTICES:
        raise TooLargeForEnumeration(f"enumeration guarded at n <= {_MAX_ENUM_VERTICES}, got {n}")
    if mode is NullClassMode.LABELLED_DEGREE_SEQUENCE:
        graphs = []
        for pairs in _graphs_with_degree_vector(np.asarray(g_obs.degrees)):
            graphs.append(Graph._from_canonical(n, pairs))
            if len(graphs) > _MAX_ENUM_ITEMS:
                raise TooLargeForEnumeration("labelled degree class exceeds the item guard")
        return graphs, np.ones(len(graphs), dtype=np.int64)

    if mode is NullClassMode.DEGREE_ISOMORPHISM:
        groups = _group_indices(np.asarray(g_obs.degrees, dtype=np.int64))
    else:
        z = as_z_array(z_obs)
        if z.shape[0] != n:
            raise LengthMismatch(f"treatment length {z.shape[0]} != n {n}")
        groups = _group_indices(np.asarray(g_obs.degrees, dtype=np.int64) * 2 + z)

    total = 1
    for grp in groups:
        for i in range(2, grp.size + 1):
            total *= i
        if total > _MAX_ENUM_ITEMS:
            raise TooLargeForEnumeration("permutation group exceeds the item guard")

    seen: dict[bytes, int] = {}
    graphs = []
    counts = []
    for pi in _permutation_group(groups, n):
        img = _relabel_fast(g_obs, pi)
        key = img.canonical_edges().tobytes()
        at = seen.get(key)
        if at is None:
            seen[key] = len(graphs)
            graphs.append(img)
            counts.append(1)
        else:
            counts[at] += 1
    return graphs, np.asarray(counts, dtype=np.int64)
