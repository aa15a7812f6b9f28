"""Label similarity functions.

Three instantiations are provided, selected by kind:

    indicator   1 if the labels are byte-equal, else 0
    edit        1 - editDistance(a, b) / max(|a|, |b|)
    jw          Jaro-Winkler similarity (prefix scale 0.1, prefix <= 4)

All of them map into [0, 1], are symmetric, and score 1 exactly when the
two labels are equal.  Comparison is exact string equality; any case
folding or normalization is a data-preparation concern.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ResourceBudgetError

KINDS = ("indicator", "edit", "jw")


@dataclass(frozen=True)
class LabelSimilarity:
    kind: str = "indicator"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(
                f"unknown label function {self.kind!r}; expected one of {KINDS}")

    def __call__(self, a: str, b: str) -> float:
        return label_sim(self, a, b)


def resolve_label_fn(fn) -> LabelSimilarity:
    if isinstance(fn, LabelSimilarity):
        return fn
    return LabelSimilarity(str(fn))


def label_sim(fn, a: str, b: str) -> float:
    """Similarity of two label strings in [0, 1] under the given function."""
    kind = resolve_label_fn(fn).kind
    if kind == "indicator":
        return 1.0 if a == b else 0.0
    if kind == "edit":
        return edit_sim(a, b)
    return jaro_winkler_sim(a, b)


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance, two-row dynamic program."""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cur[j] = min(prev[j] + 1,          # deletion
                         cur[j - 1] + 1,       # insertion
                         prev[j - 1] + (ca != cb))
        prev = cur
    return prev[-1]


def edit_sim(a: str, b: str) -> float:
    if a == b:
        return 1.0  # covers the both-empty case
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


def _jaro(a: str, b: str) -> float:
    if a == b:
        return 1.0
    la, lb = len(a), len(b)
    if la == 0 or lb == 0:
        return 0.0
    window = max(la, lb) // 2 - 1
    if window < 0:
        window = 0
    match_a = [False] * la
    match_b = [False] * lb
    matches = 0
    for i, ca in enumerate(a):
        lo = max(0, i - window)
        hi = min(lb, i + window + 1)
        for j in range(lo, hi):
            if not match_b[j] and b[j] == ca:
                match_a[i] = True
                match_b[j] = True
                matches += 1
                break
    if matches == 0:
        return 0.0
    sa = [c for c, f in zip(a, match_a) if f]
    sb = [c for c, f in zip(b, match_b) if f]
    half_transpositions = sum(x != y for x, y in zip(sa, sb))
    t = half_transpositions // 2
    return (matches / la + matches / lb + (matches - t) / matches) / 3.0


def jaro_winkler_sim(a: str, b: str) -> float:
    j = _jaro(a, b)
    prefix = 0
    for ca, cb in zip(a, b):
        if ca != cb or prefix == 4:
            break
        prefix += 1
    return j + prefix * 0.1 * (1.0 - j)


def label_matrix(fn, labels1: list[str], labels2: list[str],
                 max_cells: int = 50_000_000) -> np.ndarray:
    """Pairwise similarity matrix over two label dictionaries.

    The engine indexes this matrix with per-node label ids so the hot
    loops never touch strings.
    """
    n1, n2 = len(labels1), len(labels2)
    if n1 * n2 > max_cells:
        raise ResourceBudgetError(
            f"label similarity matrix would need {n1 * n2} cells "
            f"(budget {max_cells})")
    kind = resolve_label_fn(fn).kind
    mat = np.zeros((max(n1, 1), max(n2, 1)), dtype=np.float64)
    if kind == "indicator":
        index2 = {lab: j for j, lab in enumerate(labels2)}
        for i, lab in enumerate(labels1):
            j = index2.get(lab)
            if j is not None:
                mat[i, j] = 1.0
        return mat
    for i, la in enumerate(labels1):
        for j, lb in enumerate(labels2):
            mat[i, j] = label_sim(kind, la, lb)
    return mat
