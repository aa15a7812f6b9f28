"""Evaluation toolkit over finished score tables.

Pure read-only consumers: Pearson correlation for sensitivity studies,
top-k similarity queries, argmax alignment with the per-node F1
aggregate, and nDCG ranking quality.  Pairs pruned by theta/beta are
absent from tables and are treated as absent (never as zero) throughout.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .scores import ScoreTable


def pearson(a, b) -> float:
    """Sample Pearson correlation of two paired score lists."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise ValidationError(
            f"paired lists differ in length: {x.shape} vs {y.shape}")
    if len(x) < 2:
        raise ValidationError("need at least 2 paired values")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc)) * math.sqrt(float(yc @ yc))
    if denom == 0.0:
        raise ValidationError("correlation undefined for a constant input")
    return float(xc @ yc) / denom


def top_k(table: ScoreTable, u: int, k: int) -> list[tuple[int, float]]:
    """Maintained pairs (u, .) by score descending, smaller id on ties."""
    if not 0 <= u < table.n1:
        raise ValidationError(f"unknown node id {u}")
    if k < 1:
        raise ValidationError(f"k must be >= 1, got {k}")
    vs, scores = table.row(u)
    order = np.argsort(-scores, kind="stable")  # rows are v-ascending
    return [(int(vs[i]), float(scores[i])) for i in order[:k]]


@dataclass(frozen=True)
class AlignmentResult:
    """Per-node argmax candidate sets and the aggregate F1."""

    argmax_sets: dict[int, list[int]]
    precision: dict[int, float]
    recall: dict[int, float]
    f1: float


def align(table: ScoreTable, truth) -> AlignmentResult:
    """Argmax alignment of every g1 node, scored against ground truth.

    ``truth`` maps a subset of g1 nodes to their true g2 counterpart.
    A node's candidate set is the argmax of its maintained scores (ties
    included); precision is 1/|A_u| and recall 1 when the set contains
    the truth, both 0 otherwise.  F1 averages 2PR/(P+R) over all |V1|
    nodes, so nodes with empty candidate sets contribute 0.
    """
    truth = dict(truth)
    for u, v in truth.items():
        if not 0 <= u < table.n1:
            raise ValidationError(f"truth references unknown g1 node {u}")
        if not 0 <= v < table.n2:
            raise ValidationError(f"truth references unknown g2 node {v}")
    argmax_sets: dict[int, list[int]] = {}
    precision: dict[int, float] = {}
    recall: dict[int, float] = {}
    total = 0.0
    for u in range(table.n1):
        vs, scores = table.row(u)
        if len(vs) == 0:
            argmax_sets[u] = []
            precision[u] = recall[u] = 0.0
            continue
        best = scores.max()
        cand = [int(v) for v, s in zip(vs, scores) if s == best]
        argmax_sets[u] = cand
        hit = u in truth and truth[u] in cand
        p = 1.0 / len(cand) if hit else 0.0
        r = 1.0 if hit else 0.0
        precision[u] = p
        recall[u] = r
        if p + r > 0.0:
            total += 2.0 * p * r / (p + r)
    f1 = total / table.n1 if table.n1 else 0.0
    return AlignmentResult(argmax_sets, precision, recall, f1)


def ndcg(ranked, relevance) -> float:
    """Normalized discounted cumulative gain with linear gains.

    ``relevance`` maps items to grades (0/1/2); position i (1-based) is
    discounted by log2(i + 1).  An all-zero relevance list scores 0 by
    convention.
    """
    if not ranked:
        raise ValidationError("ranked list must be non-empty")
    rel = relevance if callable(relevance) else \
        (lambda item: relevance.get(item, 0))
    gains = [float(rel(item)) for item in ranked]

    def dcg(values):
        return sum(g / math.log2(i + 1) for i, g in enumerate(values, start=1))

    ideal = dcg(sorted(gains, reverse=True))
    if ideal == 0.0:
        return 0.0
    return dcg(gains) / ideal
