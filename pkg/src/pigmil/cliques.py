"""Largest quasi-clique containing a vertex pair.

A vertex set ``V`` is a quasi-clique when its induced subgraph is connected
and has at least ``floor(gamma * |V|(|V|-1)/2)`` edges.  The consistency of a
pair is the size of the largest quasi-clique holding both vertices (such a
set is maximal by construction), or 0 when there is none.

Graphs up to ``EXACT_LIMIT`` vertices are solved exactly by tabulating the
induced edge count of every vertex subset; larger graphs use greedy
expansion from the pair.
"""

import math
from functools import lru_cache

import numpy as np

EXACT_LIMIT = 20


def edge_threshold(k, gamma=0.9):
    # tolerance keeps 0.9 * 10 from flooring to 8
    return math.floor(gamma * k * (k - 1) / 2 + 1e-9)


def _bitmasks(adj):
    A = np.asarray(adj) != 0
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("adjacency must be square")
    A = A & ~np.eye(n, dtype=bool)
    A = A | A.T
    return tuple(int(sum(1 << j for j in np.flatnonzero(A[i]))) for i in range(n))


def _connected_masks(masks, adj_bits, n):
    """Vectorized connectivity test for an array of vertex masks."""
    masks = masks.astype(np.uint32)
    low = masks & (~masks + np.uint32(1))
    reach = low
    nbr = np.array(adj_bits, dtype=np.uint32)
    for _ in range(n):
        grown = reach.copy()
        for v in range(n):
            has_v = (reach >> np.uint32(v)) & np.uint32(1)
            grown |= np.where(has_v.astype(bool), nbr[v], np.uint32(0))
        grown &= masks
        if np.array_equal(grown, reach):
            break
        reach = grown
    return reach == masks


@lru_cache(maxsize=4096)
def _exact_matrix(adj_bits, gamma):
    n = len(adj_bits)
    out = np.zeros((n, n), dtype=int)
    if n < 2:
        return out
    size = 1 << n
    masks = np.arange(size, dtype=np.uint32)
    pc = np.bitwise_count(masks).astype(np.int64)
    edges = np.zeros(size, dtype=np.int64)
    for v in range(n):
        lo = masks[: 1 << v]
        edges[1 << v: 1 << (v + 1)] = edges[: 1 << v] + np.bitwise_count(lo & np.uint32(adj_bits[v]))
    thr = np.array([edge_threshold(k, gamma) for k in range(n + 1)])
    ok = (edges >= thr[pc]) & (pc >= 2)

    todo = np.triu(np.ones((n, n), dtype=bool), 1)
    bit_index = np.arange(n, dtype=np.uint32)
    for k in range(n, 1, -1):
        cand = masks[ok & (pc == k)]
        if cand.size == 0:
            continue
        # a disconnected k-vertex graph has at most C(k-1, 2) edges
        if thr[k] <= (k - 1) * (k - 2) // 2:
            cand = cand[_connected_masks(cand, adj_bits, n)]
            if cand.size == 0:
                continue
        B = ((cand[:, None] >> bit_index[None, :]) & 1).astype(np.float32)
        covered = (B.T @ B) > 0
        hit = covered & todo
        out[hit] = k
        todo &= ~hit
        if not todo.any():
            break
    return out + out.T


def _rows_connected(inside, A, start):
    """Whether each row's member set is connected, growing reach from ``start``."""
    P = inside.shape[0]
    reach = np.zeros_like(inside)
    reach[np.arange(P), start] = True
    Af = A.astype(np.float32)
    while True:
        grown = inside & (reach | ((reach.astype(np.float32) @ Af) > 0))
        if np.array_equal(grown, reach):
            return np.all(reach == inside, axis=1)
        reach = grown


def _greedy_all(A, gamma):
    """Greedy expansion from every pair at once.

    Each pair repeatedly adds the outside vertex with the most neighbors in
    the current set (lowest index on ties) and records the largest size at
    which the set is a quasi-clique.  Expansion stops at the first failure
    after a success, or once four vertices have failed.
    """
    n = A.shape[0]
    iu, ju = np.triu_indices(n, 1)
    P = iu.size
    rows = np.arange(P)
    thr = np.array([edge_threshold(k, gamma) for k in range(n + 1)])
    inside = np.zeros((P, n), dtype=bool)
    inside[rows, iu] = True
    inside[rows, ju] = True
    gain = A[iu] + A[ju]
    edges = A[iu, ju].astype(np.int64)
    best = np.where((edges > 0) & (edges >= thr[2]), 2, 0)
    active = np.ones(P, dtype=bool)
    k = 2
    while k < n and active.any():
        v = np.argmax(np.where(inside, -1, gain), axis=1)
        edges = edges + gain[rows, v]
        inside[rows, v] = True
        gain = gain + A[v]
        k += 1
        ok = (edges >= thr[k]) & _rows_connected(inside, A, iu)
        best = np.where(active & ok, k, best)
        active &= ok | ((best == 0) & (k <= 3))
    out = np.zeros((n, n), dtype=int)
    out[iu, ju] = best
    return out + out.T


def consistency_matrix(adj, gamma=0.9):
    """Consistency for every vertex pair of the graph ``adj`` (diagonal 0)."""
    bits = _bitmasks(adj)
    n = len(bits)
    if n <= EXACT_LIMIT:
        return _exact_matrix(bits, float(gamma)).copy()
    A = (np.asarray(adj) != 0).astype(np.int64)
    np.fill_diagonal(A, 0)
    A = A | A.T
    return _greedy_all(A, float(gamma))


def consistency(adj, i, j, gamma_q=0.9) -> int:
    if i == j:
        raise ValueError("consistency needs two distinct vertices")
    return int(consistency_matrix(adj, gamma_q)[i, j])
