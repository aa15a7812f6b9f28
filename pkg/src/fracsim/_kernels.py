"""Hot inner loops of the iterative engine.

Everything here is written in nopython-compatible Python over flat numpy
arrays.  When numba is available (the default) the functions are compiled
with ``@njit(cache=True, nogil=True)``; setting the environment variable
``FRACSIM_BACKEND=numpy`` keeps them as interpreted Python, which is slow
but produces bit-identical results (same code, IEEE semantics preserved).

Argument conventions shared by most kernels:

    gadj       (g1_out_ptr, g1_out_idx, g1_in_ptr, g1_in_idx,
                g2_out_ptr, g2_out_idx, g2_in_ptr, g2_in_idx)
    lab1/lab2  per-node label ids (int64)
    labmat     label-id pair similarity matrix (float64, 2-D)
    row_ptr/cols/prev
               CSR candidate-pair table of the previous generation
    a_idx[a_lo:a_hi], b_idx[b_lo:b_hi]
               the two neighbor sets being scored (g1 side, g2 side)
"""
from __future__ import annotations

import math
import os

import numpy as np

S_CODE, DP_CODE, B_CODE, BJ_CODE, CROSS_CODE = 0, 1, 2, 3, 4
VARIANT_CODES = {"s": S_CODE, "dp": DP_CODE, "b": B_CODE, "bj": BJ_CODE,
                 "cross": CROSS_CODE}

LABEL_MATRIX, LABEL_ZERO, LABEL_ONE = 0, 1, 2
NORM_ROP, NORM_MAX = 0, 1

EXACT_SMALL_CELLS = 64


def _resolve_backend() -> str:
    want = os.environ.get("FRACSIM_BACKEND", "auto").strip().lower()
    if want in ("auto", ""):
        try:
            import numba  # noqa: F401
            return "numba"
        except ImportError:
            return "numpy"
    if want == "numba":
        import numba  # noqa: F401  (raises if unavailable)
        return "numba"
    if want in ("numpy", "python"):
        return "numpy"
    raise RuntimeError(f"FRACSIM_BACKEND must be 'numba' or 'numpy', "
                       f"got {want!r}")


BACKEND = _resolve_backend()

if BACKEND == "numba":
    from numba import njit

    def _jit(fn):
        return njit(cache=True, nogil=True)(fn)
else:
    def _jit(fn):
        return fn


@_jit
def _pair_label(x, y, lab1, lab2, labmat, label_mode):
    if label_mode == 1:    # constant zero
        return 0.0
    if label_mode == 2:    # constant one
        return 1.0
    return labmat[lab1[x], lab2[y]]


@_jit
def _find_pair(row_ptr, cols, x, y):
    lo = row_ptr[x]
    hi = row_ptr[x + 1]
    while lo < hi:
        mid = (lo + hi) // 2
        c = cols[mid]
        if c == y:
            return mid
        if c < y:
            lo = mid + 1
        else:
            hi = mid
    return np.int64(-1)


@_jit
def _feasible_match_size(a_idx, a_lo, a_hi, b_idx, b_lo, b_hi,
                         lab1, lab2, labmat, label_mode, theta):
    """Maximum-cardinality matching size on the label-feasibility graph.

    BFS augmenting paths; exact, so the derived upper bounds stay sound.
    """
    m = a_hi - a_lo
    n = b_hi - b_lo
    if m == 0 or n == 0:
        return 0
    match_x = np.full(m, -1, np.int64)
    match_y = np.full(n, -1, np.int64)
    reached_from = np.empty(n, np.int64)
    visited = np.zeros(n, np.bool_)
    queue = np.empty(m, np.int64)
    size = 0
    for sx in range(m):
        for j in range(n):
            visited[j] = False
        qh = 0
        qt = 0
        queue[qt] = sx
        qt += 1
        aug_y = -1
        while qh < qt and aug_y < 0:
            cx = queue[qh]
            qh += 1
            x_node = a_idx[a_lo + cx]
            for j in range(n):
                if visited[j]:
                    continue
                y_node = b_idx[b_lo + j]
                if _pair_label(x_node, y_node, lab1, lab2, labmat,
                               label_mode) >= theta:
                    visited[j] = True
                    reached_from[j] = cx
                    if match_y[j] < 0:
                        aug_y = j
                        break
                    queue[qt] = match_y[j]
                    qt += 1
        if aug_y >= 0:
            yy = aug_y
            while True:
                px = reached_from[yy]
                prev_y = match_x[px]
                match_y[yy] = px
                match_x[px] = yy
                if prev_y < 0:
                    break
                yy = prev_y
            size += 1
    return size


@_jit
def _lambda_fraction(variant, a_idx, a_lo, a_hi, b_idx, b_lo, b_hi,
                     lab1, lab2, labmat, label_mode, theta, norm_mode):
    """|M| / Omega with label-feasibility counts standing in for |M|."""
    m = a_hi - a_lo
    n = b_hi - b_lo
    if variant == S_CODE or variant == DP_CODE:
        if m == 0:
            return 1.0
        if n == 0:
            return 0.0
    elif variant == B_CODE or variant == BJ_CODE:
        if m == 0 and n == 0:
            return 1.0
        if m == 0 or n == 0:
            return 0.0
    else:  # cross product: |M| = m * n = Omega
        if m == 0 or n == 0:
            return 0.0
        return 1.0
    if variant == S_CODE or variant == B_CODE:
        cnt = 0
        for i in range(m):
            x = a_idx[a_lo + i]
            for j in range(n):
                if _pair_label(x, b_idx[b_lo + j], lab1, lab2, labmat,
                               label_mode) >= theta:
                    cnt += 1
                    break
        if variant == S_CODE:
            return cnt / m
        cnt2 = 0
        for j in range(n):
            y = b_idx[b_lo + j]
            for i in range(m):
                if _pair_label(a_idx[a_lo + i], y, lab1, lab2, labmat,
                               label_mode) >= theta:
                    cnt2 += 1
                    break
        return (cnt + cnt2) / (m + n)
    size = _feasible_match_size(a_idx, a_lo, a_hi, b_idx, b_lo, b_hi,
                                lab1, lab2, labmat, label_mode, theta)
    if variant == DP_CODE:
        return size / m
    if norm_mode == 1:
        return size / max(m, n)
    return size / math.sqrt(m * n)


@_jit
def _upper_bound_pair(u, v, gadj, lab1, lab2, labmat, label_mode,
                      theta, variant, wp, wm, norm_mode):
    g1op, g1oi, g1ip, g1ii, g2op, g2oi, g2ip, g2ii = gadj
    lam_out = _lambda_fraction(variant, g1oi, g1op[u], g1op[u + 1],
                               g2oi, g2op[v], g2op[v + 1],
                               lab1, lab2, labmat, label_mode, theta,
                               norm_mode)
    lam_in = _lambda_fraction(variant, g1ii, g1ip[u], g1ip[u + 1],
                              g2ii, g2ip[v], g2ip[v + 1],
                              lab1, lab2, labmat, label_mode, theta,
                              norm_mode)
    ub = wp * lam_out + wm * lam_in + \
        (1.0 - wp - wm) * _pair_label(u, v, lab1, lab2, labmat, label_mode)
    if ub > 1.0:
        ub = 1.0
    if ub < 0.0:
        ub = 0.0
    return ub


@_jit
def _lookup(x, y, row_ptr, cols, prev, gadj, lab1, lab2, labmat, label_mode,
            theta, variant, wp, wm, norm_mode, ub_on, alpha):
    i = _find_pair(row_ptr, cols, x, y)
    if i >= 0:
        return prev[i]
    if ub_on:
        if alpha == 0.0:
            return 0.0
        return alpha * _upper_bound_pair(x, y, gadj, lab1, lab2, labmat,
                                         label_mode, theta, variant, wp, wm,
                                         norm_mode)
    return 0.0


@_jit
def _matching_sum(variant, a_idx, a_lo, a_hi, b_idx, b_lo, b_hi,
                  row_ptr, cols, prev, gadj, lab1, lab2, labmat, label_mode,
                  theta, wp, wm, norm_mode, ub_on, alpha, exact_small):
    """Best injective-mapping score sum for the dp/bj variants."""
    m = a_hi - a_lo
    n = b_hi - b_lo
    if exact_small and m * n <= EXACT_SMALL_CELLS:
        # exact bitmask assignment over the smaller side
        if m <= n:
            rows = m
            ncols = n
            rows_are_a = True
        else:
            rows = n
            ncols = m
            rows_are_a = False
        w = np.zeros((rows, ncols), np.float64)
        feas = np.zeros((rows, ncols), np.bool_)
        for r in range(rows):
            for c in range(ncols):
                if rows_are_a:
                    x = a_idx[a_lo + r]
                    y = b_idx[b_lo + c]
                else:
                    x = a_idx[a_lo + c]
                    y = b_idx[b_lo + r]
                if _pair_label(x, y, lab1, lab2, labmat,
                               label_mode) >= theta:
                    feas[r, c] = True
                    w[r, c] = _lookup(x, y, row_ptr, cols, prev, gadj,
                                      lab1, lab2, labmat, label_mode, theta,
                                      variant, wp, wm, norm_mode, ub_on,
                                      alpha)
        nmask = 1 << rows
        dp = np.full(nmask, -1.0)
        dp[0] = 0.0
        for j in range(ncols):
            ndp = dp.copy()
            for mask in range(nmask):
                base = dp[mask]
                if base < 0.0:
                    continue
                for r in range(rows):
                    bit = 1 << r
                    if mask & bit == 0 and feas[r, j]:
                        val = base + w[r, j]
                        if val > ndp[mask | bit]:
                            ndp[mask | bit] = val
            dp = ndp
        return dp.max()
    # greedy: feasible cells by score descending, source-major tie order
    col_major = variant == BJ_CODE and n < m
    cnt = 0
    for i in range(m):
        x = a_idx[a_lo + i]
        for j in range(n):
            if _pair_label(x, b_idx[b_lo + j], lab1, lab2, labmat,
                           label_mode) >= theta:
                cnt += 1
    if cnt == 0:
        return 0.0
    wk = np.empty(cnt, np.float64)
    ik = np.empty(cnt, np.int64)
    jk = np.empty(cnt, np.int64)
    k = 0
    if col_major:
        for j in range(n):
            y = b_idx[b_lo + j]
            for i in range(m):
                x = a_idx[a_lo + i]
                if _pair_label(x, y, lab1, lab2, labmat,
                               label_mode) >= theta:
                    wk[k] = _lookup(x, y, row_ptr, cols, prev, gadj, lab1,
                                    lab2, labmat, label_mode, theta, variant,
                                    wp, wm, norm_mode, ub_on, alpha)
                    ik[k] = i
                    jk[k] = j
                    k += 1
    else:
        for i in range(m):
            x = a_idx[a_lo + i]
            for j in range(n):
                y = b_idx[b_lo + j]
                if _pair_label(x, y, lab1, lab2, labmat,
                               label_mode) >= theta:
                    wk[k] = _lookup(x, y, row_ptr, cols, prev, gadj, lab1,
                                    lab2, labmat, label_mode, theta, variant,
                                    wp, wm, norm_mode, ub_on, alpha)
                    ik[k] = i
                    jk[k] = j
                    k += 1
    order = np.argsort(-wk, kind="mergesort")
    used_i = np.zeros(m, np.bool_)
    used_j = np.zeros(n, np.bool_)
    total = 0.0
    for o in range(cnt):
        idx = order[o]
        i = ik[idx]
        j = jk[idx]
        if not used_i[i] and not used_j[j]:
            used_i[i] = True
            used_j[j] = True
            total += wk[idx]
    return total


@_jit
def _set_score(variant, a_idx, a_lo, a_hi, b_idx, b_lo, b_hi,
               row_ptr, cols, prev, gadj, lab1, lab2, labmat, label_mode,
               theta, wp, wm, norm_mode, ub_on, alpha, exact_small):
    """Score of two neighbor sets under the variant's mapping/normalizer.

    Empty-set conventions mirror the exact definitions: a vacuously
    satisfiable side scores 1, an unsatisfiable one scores 0.
    """
    m = a_hi - a_lo
    n = b_hi - b_lo
    if variant == S_CODE or variant == DP_CODE:
        if m == 0:
            return 1.0
        if n == 0:
            return 0.0
    elif variant == B_CODE or variant == BJ_CODE:
        if m == 0 and n == 0:
            return 1.0
        if m == 0 or n == 0:
            return 0.0
    else:  # CROSS
        if m == 0 or n == 0:
            return 0.0
        total = 0.0
        for i in range(m):
            x = a_idx[a_lo + i]
            for j in range(n):
                total += _lookup(x, b_idx[b_lo + j], row_ptr, cols, prev,
                                 gadj, lab1, lab2, labmat, label_mode, theta,
                                 variant, wp, wm, norm_mode, ub_on, alpha)
        return total / (m * n)
    if variant == S_CODE or variant == B_CODE:
        total = 0.0
        for i in range(m):
            x = a_idx[a_lo + i]
            best = -1.0
            for j in range(n):
                y = b_idx[b_lo + j]
                if _pair_label(x, y, lab1, lab2, labmat,
                               label_mode) >= theta:
                    s = _lookup(x, y, row_ptr, cols, prev, gadj, lab1, lab2,
                                labmat, label_mode, theta, variant, wp, wm,
                                norm_mode, ub_on, alpha)
                    if s > best:
                        best = s
            if best >= 0.0:
                total += best
        if variant == S_CODE:
            return total / m
        for j in range(n):
            y = b_idx[b_lo + j]
            best = -1.0
            for i in range(m):
                x = a_idx[a_lo + i]
                if _pair_label(x, y, lab1, lab2, labmat,
                               label_mode) >= theta:
                    s = _lookup(x, y, row_ptr, cols, prev, gadj, lab1, lab2,
                                labmat, label_mode, theta, variant, wp, wm,
                                norm_mode, ub_on, alpha)
                    if s > best:
                        best = s
            if best >= 0.0:
                total += best
        return total / (m + n)
    # DP / BJ
    total = _matching_sum(variant, a_idx, a_lo, a_hi, b_idx, b_lo, b_hi,
                          row_ptr, cols, prev, gadj, lab1, lab2, labmat,
                          label_mode, theta, wp, wm, norm_mode, ub_on, alpha,
                          exact_small)
    if variant == DP_CODE:
        return total / m
    if norm_mode == 1:
        return total / max(m, n)
    return total / math.sqrt(m * n)


@_jit
def update_pairs(start, stride, pair_u, pair_v, row_ptr, cols, prev, cur,
                 gadj, lab1, lab2, labmat, label_mode, variant, theta,
                 wp, wm, norm_mode, ub_on, alpha, exact_small):
    """One generation update for candidate pairs start, start+stride, ...

    Reads only previous-generation scores and writes disjoint slots of
    ``cur``, so concurrent calls with distinct residues never conflict and
    the result is independent of the partitioning.
    """
    g1op, g1oi, g1ip, g1ii, g2op, g2oi, g2ip, g2ii = gadj
    n_pairs = pair_u.shape[0]
    wl = 1.0 - wp - wm
    i = start
    while i < n_pairs:
        u = pair_u[i]
        v = pair_v[i]
        s = 0.0
        if wp > 0.0:
            s += wp * _set_score(variant, g1oi, g1op[u], g1op[u + 1],
                                 g2oi, g2op[v], g2op[v + 1],
                                 row_ptr, cols, prev, gadj, lab1, lab2,
                                 labmat, label_mode, theta, wp, wm,
                                 norm_mode, ub_on, alpha, exact_small)
        if wm > 0.0:
            s += wm * _set_score(variant, g1ii, g1ip[u], g1ip[u + 1],
                                 g2ii, g2ip[v], g2ip[v + 1],
                                 row_ptr, cols, prev, gadj, lab1, lab2,
                                 labmat, label_mode, theta, wp, wm,
                                 norm_mode, ub_on, alpha, exact_small)
        s += wl * _pair_label(u, v, lab1, lab2, labmat, label_mode)
        cur[i] = s
        i += stride


@_jit
def compute_upper_bounds(start, stride, pair_u, pair_v, out, gadj,
                         lab1, lab2, labmat, label_mode, theta, variant,
                         wp, wm, norm_mode):
    n_pairs = pair_u.shape[0]
    i = start
    while i < n_pairs:
        out[i] = _upper_bound_pair(pair_u[i], pair_v[i], gadj, lab1, lab2,
                                   labmat, label_mode, theta, variant,
                                   wp, wm, norm_mode)
        i += stride
