"""Bipartite matching routines used by the exact oracles and reference ops.

The engine's hot loops carry their own compiled twins of these; keeping a
plain-Python implementation here means the two can be cross-checked.
"""
from __future__ import annotations

import numpy as np


def max_bipartite_matching(adj: list[list[int]], n_right: int) -> int:
    """Maximum-cardinality matching size (augmenting paths).

    ``adj[i]`` lists the right-side vertices reachable from left vertex i.
    """
    match_right = [-1] * n_right

    def try_augment(i: int, seen: list[bool]) -> bool:
        for j in adj[i]:
            if not seen[j]:
                seen[j] = True
                if match_right[j] == -1 or try_augment(match_right[j], seen):
                    match_right[j] = i
                    return True
        return False

    size = 0
    for i in range(len(adj)):
        if try_augment(i, [False] * n_right):
            size += 1
    return size


def greedy_weight_matching(weights: np.ndarray, feasible: np.ndarray,
                           col_major: bool = False) -> list[tuple[int, int]]:
    """Greedy matching: scan feasible cells by weight descending.

    Ties break toward the smaller source index, then the smaller target
    index; ``col_major=True`` makes columns the source side (used when the
    mapping's domain is the second set).  Zero-weight feasible cells are
    still taken: they keep the mapping size maximal without changing the
    sum.
    """
    m, n = weights.shape
    cells = []
    if col_major:
        for j in range(n):
            for i in range(m):
                if feasible[i, j]:
                    cells.append((-weights[i, j], j, i))
    else:
        for i in range(m):
            for j in range(n):
                if feasible[i, j]:
                    cells.append((-weights[i, j], i, j))
    cells.sort(key=lambda c: c[0])  # stable: ties keep source-major order
    used_i = [False] * m
    used_j = [False] * n
    pairs = []
    for _, a, b in cells:
        i, j = (b, a) if col_major else (a, b)
        if not used_i[i] and not used_j[j]:
            used_i[i] = True
            used_j[j] = True
            pairs.append((i, j))
    return pairs


def exact_weight_matching(weights: np.ndarray,
                          feasible: np.ndarray) -> tuple[float, list[tuple[int, int]]]:
    """Maximum-weight bipartite matching over the feasible cells.

    Exact bitmask dynamic program over the smaller side; intended for
    small neighborhoods (smaller side <= ~20).  Returns the best weight
    sum and one optimal pair set (rows, cols of ``weights``).
    """
    m, n = weights.shape
    transposed = m > n
    if transposed:
        weights = weights.T
        feasible = feasible.T
        m, n = n, m
    nmask = 1 << m
    # dp[j][mask]: best weight using columns < j with matched row set mask
    dp = np.full((n + 1, nmask), -1.0)
    dp[0, 0] = 0.0
    for j in range(n):
        dp[j + 1] = dp[j]  # skip column j
        for mask in range(nmask):
            base = dp[j, mask]
            if base < 0.0:
                continue
            for r in range(m):
                bit = 1 << r
                if mask & bit or not feasible[r, j]:
                    continue
                val = base + weights[r, j]
                if val > dp[j + 1, mask | bit]:
                    dp[j + 1, mask | bit] = val
    best_mask = int(np.argmax(dp[n]))
    total = float(dp[n, best_mask])
    # backtrack one optimal assignment
    pairs = []
    mask = best_mask
    for j in range(n - 1, -1, -1):
        if dp[j, mask] == dp[j + 1, mask]:
            continue  # column j unused
        for r in range(m):
            bit = 1 << r
            if mask & bit and feasible[r, j] and \
                    dp[j, mask ^ bit] >= 0.0 and \
                    dp[j, mask ^ bit] + weights[r, j] == dp[j + 1, mask]:
                pairs.append((r, j))
                mask ^= bit
                break
    pairs.reverse()
    if transposed:
        pairs = [(j, r) for r, j in pairs]
    return total, pairs
