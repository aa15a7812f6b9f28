"""Sparse candidate-pair score tables and their TSV serialization."""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import GraphParseError


@dataclass
class ScoreTable:
    """Scores for a fixed set of candidate (u, v) pairs.

    The pair key set is fixed for the lifetime of a run; one table holds
    one generation of scores.  Pairs are stored sorted by (u, v) with a
    CSR-style row index for O(log d) lookup.
    """

    n1: int
    n2: int
    pair_u: np.ndarray   # int64, sorted by (u, v)
    pair_v: np.ndarray
    row_ptr: np.ndarray  # int64, len n1 + 1
    scores: np.ndarray   # float64 in [0, 1]
    generation: int = 0

    def __len__(self) -> int:
        return len(self.scores)

    def index_of(self, u: int, v: int) -> int:
        """Index of pair (u, v) in the flat arrays, or -1 if absent."""
        if not 0 <= u < self.n1:
            return -1
        lo, hi = int(self.row_ptr[u]), int(self.row_ptr[u + 1])
        i = np.searchsorted(self.pair_v[lo:hi], v) + lo
        if i < hi and self.pair_v[i] == v:
            return int(i)
        return -1

    def __contains__(self, pair) -> bool:
        return self.index_of(*pair) >= 0

    def get(self, u: int, v: int, default=None):
        i = self.index_of(u, v)
        return float(self.scores[i]) if i >= 0 else default

    def row(self, u: int) -> tuple[np.ndarray, np.ndarray]:
        """(v ids, scores) of all maintained pairs for node u."""
        lo, hi = int(self.row_ptr[u]), int(self.row_ptr[u + 1])
        return self.pair_v[lo:hi], self.scores[lo:hi]

    def items(self):
        for i in range(len(self.scores)):
            yield int(self.pair_u[i]), int(self.pair_v[i]), float(self.scores[i])

    def with_scores(self, scores: np.ndarray, generation: int) -> "ScoreTable":
        return ScoreTable(self.n1, self.n2, self.pair_u, self.pair_v,
                          self.row_ptr, scores, generation)


def make_table(n1: int, n2: int, pair_u: np.ndarray, pair_v: np.ndarray,
               scores: np.ndarray, generation: int = 0) -> ScoreTable:
    """Build a table from (u, v)-sorted pair arrays."""
    row_ptr = np.zeros(n1 + 1, dtype=np.int64)
    if len(pair_u):
        np.cumsum(np.bincount(pair_u, minlength=n1), out=row_ptr[1:])
    return ScoreTable(n1, n2, pair_u.astype(np.int64),
                      pair_v.astype(np.int64), row_ptr,
                      scores.astype(np.float64), generation)


@dataclass
class ConvergenceReport:
    """Per-iteration convergence diagnostics of one run."""

    iterations: int = 0
    converged: bool = False
    deltas: list[float] = field(default_factory=list)
    score_min: list[float] = field(default_factory=list)  # incl. generation 0
    score_max: list[float] = field(default_factory=list)


# ---- TSV serialization -------------------------------------------------------


def write_scores(path, table: ScoreTable, ext1: list[str], ext2: list[str],
                 meta: dict | None = None) -> None:
    """Write `u<TAB>v<TAB>score` rows (6 decimals) sorted by internal ids.

    ``meta`` entries become `# key: value` header lines.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for key, value in (meta or {}).items():
            fh.write(f"# {key}: {value}\n")
        for i in range(len(table.scores)):
            u = ext1[table.pair_u[i]]
            v = ext2[table.pair_v[i]]
            fh.write(f"{u}\t{v}\t{table.scores[i]:.6f}\n")


def read_scores(path) -> tuple[list[tuple[str, str, float]], dict[str, str]]:
    """Read a score TSV back as (rows, meta).

    Row order is preserved: files are written sorted by internal ids, so
    downstream tie-breaks can rely on it.
    """
    rows: list[tuple[str, str, float]] = []
    meta: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line:
                continue
            if line.startswith("#"):
                body = line.lstrip("#").strip()
                if ":" in body:
                    key, _, value = body.partition(":")
                    meta[key.strip()] = value.strip()
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise GraphParseError(
                    f"expected 3 tab-separated fields, got {len(fields)}",
                    line_no)
            rows.append((fields[0], fields[1], float(fields[2])))
    return rows, meta
