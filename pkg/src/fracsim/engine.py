"""Iterative fractional-simulation engine.

``FSimEngine`` owns one run: it precomputes the label-pair similarity
matrix, materializes the candidate pair set, and iterates generation
updates (through the compiled kernels) until convergence.  Candidate
pairs are partitioned round-robin over worker threads; every worker
reads the immutable previous generation and writes disjoint slots of
the current one, so results are independent of the worker count.

The module also provides plain-Python reference implementations of the
per-pair operations (``map_neighbors``, ``set_score``, ``update_pair``,
``upper_bound``, ``lookup_score``).  They mirror the kernels' semantics
including tie-breaking and are cross-checked against them in the test
suite.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .config import EXACT_SMALL_CELLS, FSimConfig
from .errors import ConfigError, ResourceBudgetError, ValidationError
from .graph import LabeledDigraph
from .labels import label_matrix, label_sim
from .matching import (exact_weight_matching, greedy_weight_matching,
                       max_bipartite_matching)
from .scores import ConvergenceReport, ScoreTable, make_table

_REL_FLOOR = float(np.finfo(np.float64).eps)


@dataclass(frozen=True)
class NeighborMapping:
    """Node pairs chosen by a mapping operator.

    ``pairs`` holds (source, target) in pick order.  For the b variant
    sources come from both sets (forward then backward sweep); for bj the
    source side is the smaller set.  ``score_pairs`` normalizes every
    entry to (g1 node, g2 node) orientation for score lookups.
    """

    variant: str
    pairs: tuple[tuple[int, int], ...]
    sources_from_second: tuple[bool, ...] = ()

    def score_pairs(self) -> list[tuple[int, int]]:
        if not self.sources_from_second:
            return list(self.pairs)
        return [(y, x) if swapped else (x, y)
                for (x, y), swapped in zip(self.pairs, self.sources_from_second)]

    def __len__(self) -> int:
        return len(self.pairs)


class FSimEngine:
    """One configured fractional-simulation computation over two graphs."""

    def __init__(self, g1: LabeledDigraph, g2: LabeledDigraph,
                 cfg: FSimConfig, *, variant_code: int | None = None,
                 label_mode: int = K.LABEL_MATRIX, init_fn=None,
                 pin_diagonal: bool = False, norm_mode: int = K.NORM_ROP):
        self.g1 = g1
        self.g2 = g2
        self.cfg = cfg
        self._variant = (K.VARIANT_CODES[cfg.variant]
                         if variant_code is None else variant_code)
        self._label_mode = label_mode
        self._norm_mode = norm_mode
        self._pin_diagonal = pin_diagonal
        if label_mode == K.LABEL_MATRIX:
            self._labmat = label_matrix(cfg.label_fn, g1.label_dict,
                                        g2.label_dict)
        else:
            self._labmat = np.zeros((1, 1), dtype=np.float64)
        self._gadj = (g1.out_indptr, g1.out_indices, g1.in_indptr,
                      g1.in_indices, g2.out_indptr, g2.out_indices,
                      g2.in_indptr, g2.in_indices)
        self._build_candidates()
        self._init_scores = self._initial_scores(init_fn)

    # ---- candidate set -----------------------------------------------------

    def _build_candidates(self) -> None:
        g1, g2, cfg = self.g1, self.g2, self.cfg
        n1, n2 = g1.n_nodes, g2.n_nodes
        budget = cfg.max_candidates
        if self._label_mode != K.LABEL_MATRIX or cfg.theta == 0.0:
            total = n1 * n2
            if total > budget:
                raise ResourceBudgetError(
                    f"candidate set of {total} pairs exceeds the budget of "
                    f"{budget}; raise theta (label-constrained mapping) or "
                    f"enable upper-bound pruning with a beta threshold")
            pair_u = np.repeat(np.arange(n1, dtype=np.int64), n2)
            pair_v = np.tile(np.arange(n2, dtype=np.int64), n1)
        else:
            # group by label: all nodes sharing a label share a row pattern
            nodes2_by_label = [
                np.sort(np.nonzero(g2.labels == j)[0]).astype(np.int64)
                for j in range(len(g2.label_dict))]
            row_for_label: list[np.ndarray] = []
            for a in range(len(g1.label_dict)):
                feas = np.nonzero(self._labmat[a] >= cfg.theta)[0]
                if len(feas):
                    row = np.sort(np.concatenate(
                        [nodes2_by_label[j] for j in feas]))
                else:
                    row = np.empty(0, dtype=np.int64)
                row_for_label.append(row)
            counts = np.array([len(row_for_label[g1.labels[u]])
                               for u in range(n1)], dtype=np.int64)
            total = int(counts.sum())
            if total > budget:
                raise ResourceBudgetError(
                    f"candidate set of {total} pairs exceeds the budget of "
                    f"{budget}; raise theta or enable upper-bound pruning "
                    f"with a beta threshold")
            pair_u = np.repeat(np.arange(n1, dtype=np.int64), counts)
            pair_v = (np.concatenate([row_for_label[g1.labels[u]]
                                      for u in range(n1)]).astype(np.int64)
                      if total else np.empty(0, dtype=np.int64))
        if cfg.ub_enabled and len(pair_u):
            ub = np.empty(len(pair_u), dtype=np.float64)
            K.compute_upper_bounds(0, 1, pair_u, pair_v, ub, self._gadj,
                                   g1.labels, g2.labels, self._labmat,
                                   self._label_mode, cfg.theta, self._variant,
                                   cfg.w_plus, cfg.w_minus, self._norm_mode)
            keep = ub > cfg.beta
            pair_u = pair_u[keep]
            pair_v = pair_v[keep]
        self.pair_u = pair_u
        self.pair_v = pair_v
        self.row_ptr = np.zeros(n1 + 1, dtype=np.int64)
        if len(pair_u):
            np.cumsum(np.bincount(pair_u, minlength=n1), out=self.row_ptr[1:])
        self._pin_idx = (np.nonzero(pair_u == pair_v)[0]
                         if self._pin_diagonal else None)

    @property
    def candidate_count(self) -> int:
        return len(self.pair_u)

    def _initial_scores(self, init_fn) -> np.ndarray:
        if init_fn is not None:
            init = np.asarray(init_fn(self.pair_u, self.pair_v),
                              dtype=np.float64)
        elif self._label_mode == K.LABEL_ZERO:
            init = np.zeros(len(self.pair_u), dtype=np.float64)
        elif self._label_mode == K.LABEL_ONE:
            init = np.ones(len(self.pair_u), dtype=np.float64)
        else:
            init = self._labmat[self.g1.labels[self.pair_u],
                                self.g2.labels[self.pair_v]].astype(np.float64)
        if self._pin_idx is not None:
            init[self._pin_idx] = 1.0
        return init

    def initial_table(self) -> ScoreTable:
        return make_table(self.g1.n_nodes, self.g2.n_nodes, self.pair_u,
                          self.pair_v, self._init_scores.copy(), generation=0)

    # ---- iteration ----------------------------------------------------------

    def _kernel_args(self, prev: np.ndarray, cur: np.ndarray) -> tuple:
        cfg = self.cfg
        return (self.pair_u, self.pair_v, self.row_ptr, self.pair_v, prev,
                cur, self._gadj, self.g1.labels, self.g2.labels, self._labmat,
                self._label_mode, self._variant, cfg.theta, cfg.w_plus,
                cfg.w_minus, self._norm_mode, cfg.ub_enabled, cfg.alpha,
                cfg.matching_mode == "exact-small")

    def run(self) -> tuple[ScoreTable, ConvergenceReport]:
        cfg = self.cfg
        report = ConvergenceReport()
        n_pairs = len(self.pair_u)
        prev = self._init_scores.copy()
        if n_pairs == 0:
            return (make_table(self.g1.n_nodes, self.g2.n_nodes, self.pair_u,
                               self.pair_v, prev, generation=0),
                    ConvergenceReport(iterations=0, converged=True))
        report.score_min.append(float(prev.min()))
        report.score_max.append(float(prev.max()))
        cur = np.empty_like(prev)
        max_iters = cfg.resolved_max_iterations
        workers = cfg.workers
        pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
        if pool is not None:
            # compile before threads race for the dispatcher
            K.update_pairs(n_pairs, 1, *self._kernel_args(prev, cur))
        try:
            for it in range(1, max_iters + 1):
                args = self._kernel_args(prev, cur)
                if pool is None:
                    K.update_pairs(0, 1, *args)
                else:
                    futures = [pool.submit(K.update_pairs, w, workers, *args)
                               for w in range(workers)]
                    for f in futures:
                        f.result()
                if self._pin_idx is not None:
                    cur[self._pin_idx] = 1.0
                if cfg.convergence_mode == "absolute":
                    delta = float(np.max(np.abs(cur - prev)))
                else:
                    delta = float(np.max(np.abs(cur - prev) /
                                         np.maximum(np.abs(prev), _REL_FLOOR)))
                report.deltas.append(delta)
                report.score_min.append(float(cur.min()))
                report.score_max.append(float(cur.max()))
                prev, cur = cur, prev
                report.iterations = it
                if delta < cfg.epsilon:
                    report.converged = True
                    break
        finally:
            if pool is not None:
                pool.shutdown()
        table = make_table(self.g1.n_nodes, self.g2.n_nodes, self.pair_u,
                           self.pair_v, prev, generation=report.iterations)
        return table, report

    # ---- single-pair reference entry points ---------------------------------

    def upper_bound(self, u: int, v: int) -> float:
        return upper_bound(self.g1, self.g2, u, v, self.cfg)


# ---- module-level operations -------------------------------------------------


def initialize_scores(g1: LabeledDigraph, g2: LabeledDigraph,
                      cfg: FSimConfig) -> ScoreTable:
    """Candidate pairs under the theta/beta filters, scored at L(u, v)."""
    return FSimEngine(g1, g2, cfg).initial_table()


def iterate_to_convergence(g1: LabeledDigraph, g2: LabeledDigraph,
                           cfg: FSimConfig) -> tuple[ScoreTable, ConvergenceReport]:
    """Run generation updates until the max delta drops below epsilon.

    Hitting the iteration cap is reported (``converged=False``), never
    raised.
    """
    return FSimEngine(g1, g2, cfg).run()


def normalizer(variant: str, n1: int, n2: int) -> float:
    """The variant's score denominator for neighbor-set sizes n1, n2."""
    if variant in ("s", "dp"):
        return float(n1)
    if variant == "b":
        return float(n1 + n2)
    if variant == "bj":
        return math.sqrt(n1 * n2)
    raise ConfigError(f"unknown variant {variant!r}")


def _exact_mode(cfg: FSimConfig, m: int, n: int) -> bool:
    return cfg.matching_mode == "exact-small" and m * n <= EXACT_SMALL_CELLS


def _feasible(cfg: FSimConfig, g1, g2, x: int, y: int) -> bool:
    return label_sim(cfg.label_fn, g1.label_of(x), g2.label_of(y)) >= cfg.theta


def lookup_score(prev: ScoreTable, u: int, v: int, cfg: FSimConfig,
                 g1: LabeledDigraph | None = None,
                 g2: LabeledDigraph | None = None) -> float:
    """Stored score, else alpha * upper bound under pruning, else 0."""
    val = prev.get(u, v)
    if val is not None:
        return val
    if cfg.ub_enabled:
        if cfg.alpha == 0.0:
            return 0.0
        if g1 is None or g2 is None:
            raise ValidationError(
                "lookup of a pruned pair with alpha > 0 needs both graphs")
        return cfg.alpha * upper_bound(g1, g2, u, v, cfg)
    return 0.0


def map_neighbors(g1: LabeledDigraph, g2: LabeledDigraph, variant: str,
                  s1, s2, prev: ScoreTable, cfg: FSimConfig) -> NeighborMapping:
    """The variant's mapping operator over neighbor sets s1, s2.

    Ties break toward the higher score, then the smaller source id, then
    the smaller target id.  Reference implementation; the engine's kernels
    compute the same mapping implicitly.
    """
    s1 = [int(x) for x in s1]
    s2 = [int(y) for y in s2]

    def score(x, y):
        return lookup_score(prev, x, y, cfg, g1, g2)

    def argmax_into(sources, targets, swap_key):
        chosen = []
        for x in sources:
            best, best_y = -1.0, None
            for y in targets:
                ok = _feasible(cfg, g1, g2, y, x) if swap_key \
                    else _feasible(cfg, g1, g2, x, y)
                if not ok:
                    continue
                s = score(y, x) if swap_key else score(x, y)
                if s > best:
                    best, best_y = s, y
            if best_y is not None:
                chosen.append((x, best_y))
        return chosen

    if variant == "s":
        return NeighborMapping("s", tuple(argmax_into(s1, s2, False)))
    if variant == "b":
        fwd = argmax_into(s1, s2, False)
        bwd = argmax_into(s2, s1, True)
        pairs = tuple(fwd + bwd)
        flags = tuple([False] * len(fwd) + [True] * len(bwd))
        return NeighborMapping("b", pairs, flags)
    if variant not in ("dp", "bj"):
        raise ConfigError(f"unknown variant {variant!r}")

    m, n = len(s1), len(s2)
    if m == 0 or n == 0:
        return NeighborMapping(variant, ())
    weights = np.zeros((m, n))
    feas = np.zeros((m, n), dtype=bool)
    for i, x in enumerate(s1):
        for j, y in enumerate(s2):
            if _feasible(cfg, g1, g2, x, y):
                feas[i, j] = True
                weights[i, j] = score(x, y)
    col_major = variant == "bj" and n < m
    if _exact_mode(cfg, m, n):
        _, cells = exact_weight_matching(weights, feas)
        # complete to a maximal matching: any free feasible cell has zero
        # weight (else the matching was not optimal), so the sum is
        # unchanged and the mapping size stays stable across iterations
        used_i = {i for i, _ in cells}
        used_j = {j for _, j in cells}
        for i in range(m):
            for j in range(n):
                if feas[i, j] and i not in used_i and j not in used_j:
                    cells.append((i, j))
                    used_i.add(i)
                    used_j.add(j)
        # keep reported pair order deterministic: source-major
        cells = sorted(cells, key=lambda c: (c[1], c[0]) if col_major else c)
    else:
        cells = greedy_weight_matching(weights, feas, col_major=col_major)
    if col_major:
        pairs = tuple((s2[j], s1[i]) for i, j in cells)
        flags = tuple([True] * len(cells))
        return NeighborMapping(variant, pairs, flags)
    return NeighborMapping(variant, tuple((s1[i], s2[j]) for i, j in cells))


def set_score(g1: LabeledDigraph, g2: LabeledDigraph, variant: str,
              s1, s2, prev: ScoreTable, cfg: FSimConfig) -> float:
    """Mapped score sum over the normalizer, with empty-set conventions.

    Empty sets mirror the exact definitions: for s/dp an empty s1 is
    vacuously simulated (1) while a non-empty s1 against an empty s2
    cannot be (0); for b/bj both-empty gives 1 and exactly-one-empty 0.
    """
    s1 = [int(x) for x in s1]
    s2 = [int(y) for y in s2]
    m, n = len(s1), len(s2)
    if variant in ("s", "dp"):
        if m == 0:
            return 1.0
        if n == 0:
            return 0.0
    elif variant in ("b", "bj"):
        if m == 0 and n == 0:
            return 1.0
        if m == 0 or n == 0:
            return 0.0
    else:
        raise ConfigError(f"unknown variant {variant!r}")
    if variant in ("dp", "bj") and _exact_mode(cfg, m, n):
        weights = np.zeros((m, n))
        feas = np.zeros((m, n), dtype=bool)
        for i, x in enumerate(s1):
            for j, y in enumerate(s2):
                if _feasible(cfg, g1, g2, x, y):
                    feas[i, j] = True
                    weights[i, j] = lookup_score(prev, x, y, cfg, g1, g2)
        total, _ = exact_weight_matching(weights, feas)
    else:
        mapping = map_neighbors(g1, g2, variant, s1, s2, prev, cfg)
        total = 0.0
        for x, y in mapping.score_pairs():
            total += lookup_score(prev, x, y, cfg, g1, g2)
    return total / normalizer(variant, m, n)


def update_pair(g1: LabeledDigraph, g2: LabeledDigraph, u: int, v: int,
                prev: ScoreTable, cfg: FSimConfig) -> float:
    """One generation update of a single candidate pair."""
    s = 0.0
    if cfg.w_plus > 0.0:
        s += cfg.w_plus * set_score(g1, g2, cfg.variant, g1.out_neighbors(u),
                                    g2.out_neighbors(v), prev, cfg)
    if cfg.w_minus > 0.0:
        s += cfg.w_minus * set_score(g1, g2, cfg.variant, g1.in_neighbors(u),
                                     g2.in_neighbors(v), prev, cfg)
    s += (1.0 - cfg.w_plus - cfg.w_minus) * \
        label_sim(cfg.label_fn, g1.label_of(u), g2.label_of(v))
    return s


def _lambda_py(cfg: FSimConfig, g1, g2, variant: str, s1, s2) -> float:
    m, n = len(s1), len(s2)
    if variant in ("s", "dp"):
        if m == 0:
            return 1.0
        if n == 0:
            return 0.0
    else:
        if m == 0 and n == 0:
            return 1.0
        if m == 0 or n == 0:
            return 0.0
    if variant in ("s", "b"):
        cnt = sum(1 for x in s1
                  if any(_feasible(cfg, g1, g2, int(x), int(y)) for y in s2))
        if variant == "s":
            return cnt / m
        cnt2 = sum(1 for y in s2
                   if any(_feasible(cfg, g1, g2, int(x), int(y)) for x in s1))
        return (cnt + cnt2) / (m + n)
    adj = [[j for j, y in enumerate(s2)
            if _feasible(cfg, g1, g2, int(x), int(y))] for x in s1]
    size = max_bipartite_matching(adj, n)
    if variant == "dp":
        return size / m
    return size / math.sqrt(m * n)


def upper_bound(g1: LabeledDigraph, g2: LabeledDigraph, u: int, v: int,
                cfg: FSimConfig) -> float:
    """Label-feasibility bound on the converged score of (u, v)."""
    lam_out = _lambda_py(cfg, g1, g2, cfg.variant, g1.out_neighbors(u),
                         g2.out_neighbors(v))
    lam_in = _lambda_py(cfg, g1, g2, cfg.variant, g1.in_neighbors(u),
                        g2.in_neighbors(v))
    ub = cfg.w_plus * lam_out + cfg.w_minus * lam_in + \
        (1.0 - cfg.w_plus - cfg.w_minus) * \
        label_sim(cfg.label_fn, g1.label_of(u), g2.label_of(v))
    return min(1.0, max(0.0, ub))
