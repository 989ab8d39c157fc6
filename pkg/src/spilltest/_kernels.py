"""Numba kernels for the two hot loops: BFS and the double-edge-swap chain.

Kept in one module so the compilation surface is small and cacheable; every
kernel is single-threaded so results never depend on a thread count.
"""

from __future__ import annotations

import numba as nb


@nb.njit(cache=True)
def bfs_fill(indptr, neighbors, source, dist, queue):
    """Unweighted BFS from ``source`` over a CSR adjacency.

    ``dist`` must come in filled with -1 (the unreachable marker) and
    ``queue`` must have room for n entries. Distances are written in place.
    """
    head = 0
    tail = 0
    dist[source] = 0
    queue[tail] = source
    tail += 1
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for k in range(indptr[u], indptr[u + 1]):
            v = neighbors[k]
            if dist[v] < 0:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1


@nb.njit(cache=True)
def run_swap_attempts(edges, adj, first_edge, other_offset, side):
    """Run a batch of double-edge-swap proposals in place.

    edges        : (m, 2) int64 array, each row (i, j) with i < j
    adj          : (n, n) bool adjacency matrix kept in sync with ``edges``
    first_edge   : per-attempt index of the first edge, in [0, m)
    other_offset : per-attempt offset in [0, m-1); the second edge is
                   (first + 1 + offset) % m, so the pair is uniform over
                   distinct edge pairs without a rejection loop
    side         : per-attempt bit choosing which of the two rewirings
                   (a,d),(c,b) or (a,c),(b,d) is proposed

    Proposals creating a self-loop or duplicating an existing edge are
    rejected; degrees are preserved either way. Returns the accept count.
    """
    m = edges.shape[0]
    accepted = 0
    for t in range(first_edge.shape[0]):
        i = first_edge[t]
        j = (i + 1 + other_offset[t]) % m
        a = edges[i, 0]
        b = edges[i, 1]
        c = edges[j, 0]
        d = edges[j, 1]
        if side[t] == 1:
            c, d = d, c
        # proposed replacement edges: (a, d) and (c, b)
        if a == d or c == b:
            continue
        if adj[a, d] or adj[c, b]:
            continue
        adj[a, b] = False
        adj[b, a] = False
        adj[c, d] = False
        adj[d, c] = False
        adj[a, d] = True
        adj[d, a] = True
        adj[c, b] = True
        adj[b, c] = True
        if a < d:
            edges[i, 0] = a
            edges[i, 1] = d
        else:
            edges[i, 0] = d
            edges[i, 1] = a
        if c < b:
            edges[j, 0] = c
            edges[j, 1] = b
        else:
            edges[j, 0] = b
            edges[j, 1] = c
        accepted += 1
    return accepted
