"""Labeled directed graphs with dual (out/in) adjacency.

Graphs are immutable after construction.  Nodes carry exactly one string
label; node identity is an external string id mapped onto dense internal
ids 0..n-1.  Internal ids are assigned in first-appearance order of the
label file, then the edge file, which keeps every downstream tie-break
deterministic.

File format (TSV, UTF-8):

    edges:   src<TAB>dst        one edge per line
    labels:  node<TAB>label     one node per line

Lines starting with ``#`` are comments; blank lines are skipped.
Duplicate edges collapse silently (the edge set is a set).  Nodes that
appear only in the edge file receive the reserved empty label ``""``.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .errors import GraphParseError, ValidationError

EMPTY_LABEL = ""


class LabeledDigraph:
    """Immutable node-labeled digraph with CSR out- and in-adjacency."""

    __slots__ = (
        "ext_ids",
        "_id_of",
        "labels",
        "label_dict",
        "out_indptr",
        "out_indices",
        "in_indptr",
        "in_indices",
    )

    def __init__(self, ext_ids, labels, label_dict, out_indptr, out_indices,
                 in_indptr, in_indices):
        self.ext_ids: list[str] = ext_ids
        self._id_of: dict[str, int] = {x: i for i, x in enumerate(ext_ids)}
        self.labels: np.ndarray = labels            # int64 label id per node
        self.label_dict: list[str] = label_dict     # label id -> string
        self.out_indptr: np.ndarray = out_indptr    # int64, len n+1
        self.out_indices: np.ndarray = out_indices  # int64, sorted per row
        self.in_indptr: np.ndarray = in_indptr
        self.in_indices: np.ndarray = in_indices
        for arr in (labels, out_indptr, out_indices, in_indptr, in_indices):
            arr.setflags(write=False)

    # ---- basic queries ----------------------------------------------------

    @property
    def n_nodes(self) -> int:
        return len(self.ext_ids)

    @property
    def n_edges(self) -> int:
        return len(self.out_indices)

    def internal_id(self, ext_id: str) -> int:
        try:
            return self._id_of[ext_id]
        except KeyError:
            raise ValidationError(f"unknown node id: {ext_id!r}") from None

    def external_id(self, u: int) -> str:
        return self.ext_ids[u]

    def label_of(self, u: int) -> str:
        return self.label_dict[self.labels[u]]

    def out_neighbors(self, u: int) -> np.ndarray:
        return self.out_indices[self.out_indptr[u]:self.out_indptr[u + 1]]

    def in_neighbors(self, u: int) -> np.ndarray:
        return self.in_indices[self.in_indptr[u]:self.in_indptr[u + 1]]

    def out_degree(self, u: int) -> int:
        return int(self.out_indptr[u + 1] - self.out_indptr[u])

    def in_degree(self, u: int) -> int:
        return int(self.in_indptr[u + 1] - self.in_indptr[u])

    def has_edge(self, u: int, v: int) -> bool:
        row = self.out_neighbors(u)
        i = np.searchsorted(row, v)
        return i < len(row) and row[i] == v

    def edges(self) -> Iterator[tuple[int, int]]:
        """Yield edges as internal-id pairs, sorted by (src, dst)."""
        for u in range(self.n_nodes):
            for v in self.out_neighbors(u):
                yield u, int(v)

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return (f"LabeledDigraph(n_nodes={self.n_nodes}, "
                f"n_edges={self.n_edges}, n_labels={len(self.label_dict)})")


@dataclass(frozen=True)
class DegreeStats:
    avg_degree: Fraction
    max_out: int
    max_in: int


# ---- construction ----------------------------------------------------------


def build_graph(nodes: Iterable[tuple[str, str]],
                edges: Iterable[tuple[str, str]]) -> LabeledDigraph:
    """Build a graph from (node, label) pairs and (src, dst) edge pairs.

    Node order fixes the internal ids; edge endpoints not present in
    ``nodes`` are appended in edge order with the empty label.  A node
    listed twice with different labels is a validation error.
    """
    ext_ids: list[str] = []
    id_of: dict[str, int] = {}
    label_of: dict[int, str] = {}

    def intern_node(ext: str) -> int:
        i = id_of.get(ext)
        if i is None:
            i = len(ext_ids)
            id_of[ext] = i
            ext_ids.append(ext)
        return i

    for ext, lab in nodes:
        i = intern_node(ext)
        old = label_of.get(i)
        if old is not None and old != lab:
            raise ValidationError(
                f"conflicting labels for node {ext!r}: {old!r} vs {lab!r}")
        label_of[i] = lab

    edge_set: set[tuple[int, int]] = set()
    for src, dst in edges:
        edge_set.add((intern_node(src), intern_node(dst)))

    n = len(ext_ids)
    label_dict: list[str] = []
    label_id: dict[str, int] = {}
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        lab = label_of.get(i, EMPTY_LABEL)
        j = label_id.get(lab)
        if j is None:
            j = len(label_dict)
            label_id[lab] = j
            label_dict.append(lab)
        labels[i] = j

    return LabeledDigraph(ext_ids, labels, label_dict,
                          *_csr_from_edges(n, edge_set))


def _csr_from_edges(n: int, edge_set: set[tuple[int, int]]):
    m = len(edge_set)
    out_indptr = np.zeros(n + 1, dtype=np.int64)
    in_indptr = np.zeros(n + 1, dtype=np.int64)
    if m == 0:
        empty = np.empty(0, dtype=np.int64)
        return out_indptr, empty, in_indptr, empty.copy()
    edge_arr = np.array(sorted(edge_set), dtype=np.int64)
    src, dst = edge_arr[:, 0], edge_arr[:, 1]
    np.cumsum(np.bincount(src, minlength=n), out=out_indptr[1:])
    out_indices = dst.copy()
    # mirror adjacency: sort by (dst, src)
    order = np.lexsort((src, dst))
    np.cumsum(np.bincount(dst, minlength=n), out=in_indptr[1:])
    in_indices = src[order]
    return out_indptr, out_indices, in_indptr, in_indices


def _iter_lines(source) -> Iterator[tuple[int, str]]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from enumerate(fh, start=1)
    else:
        yield from enumerate(source, start=1)


def _parse_tsv(source, what: str) -> Iterator[tuple[str, str]]:
    for line_no, raw in _iter_lines(source):
        line = raw.rstrip("\n").rstrip("\r")
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise GraphParseError(
                f"expected 2 tab-separated fields in {what} line, "
                f"got {len(fields)}", line_no)
        yield fields[0], fields[1]


def load_graph(edge_source, label_source) -> LabeledDigraph:
    """Load a graph from edge and label line streams (or file paths)."""
    nodes = list(_parse_tsv(label_source, "label"))
    edges = list(_parse_tsv(edge_source, "edge"))
    return build_graph(nodes, edges)


def serialize_graph(g: LabeledDigraph) -> tuple[str, str]:
    """Render (edge_text, label_text) with nodes in internal-id order."""
    label_lines = [f"{g.ext_ids[u]}\t{g.label_of(u)}" for u in range(g.n_nodes)]
    edge_lines = [f"{g.ext_ids[u]}\t{g.ext_ids[v]}" for u, v in g.edges()]
    return "\n".join(edge_lines) + ("\n" if edge_lines else ""), \
           "\n".join(label_lines) + ("\n" if label_lines else "")


def write_graph(g: LabeledDigraph, edge_path, label_path) -> None:
    edge_text, label_text = serialize_graph(g)
    Path(edge_path).write_text(edge_text, encoding="utf-8")
    Path(label_path).write_text(label_text, encoding="utf-8")


# ---- derived graphs --------------------------------------------------------


def symmetric_closure(g: LabeledDigraph) -> LabeledDigraph:
    """Undirected view: every edge doubled so out == in == all neighbors."""
    edge_set = set()
    for u, v in g.edges():
        edge_set.add((u, v))
        edge_set.add((v, u))
    return LabeledDigraph(list(g.ext_ids), g.labels.copy(),
                          list(g.label_dict),
                          *_csr_from_edges(g.n_nodes, edge_set))


def degree_stats(g: LabeledDigraph) -> DegreeStats:
    n = g.n_nodes
    avg = Fraction(g.n_edges, n) if n else Fraction(0)
    out_deg = np.diff(g.out_indptr)
    in_deg = np.diff(g.in_indptr)
    return DegreeStats(
        avg_degree=avg,
        max_out=int(out_deg.max()) if n else 0,
        max_in=int(in_deg.max()) if n else 0,
    )


def validate_mirror(g: LabeledDigraph) -> bool:
    """Full-scan check that out_adj and in_adj are exact mirrors."""
    fwd = {(u, v) for u, v in g.edges()}
    bwd = set()
    for v in range(g.n_nodes):
        row = g.in_neighbors(v)
        if len(np.unique(row)) != len(row):
            return False
        for u in row:
            bwd.add((int(u), v))
    for u in range(g.n_nodes):
        row = g.out_neighbors(u)
        if len(np.unique(row)) != len(row):
            return False
    return fwd == bwd


# ---- noise injection -------------------------------------------------------


def inject_noise(g: LabeledDigraph, edge_add_rate: float, edge_del_rate: float,
                 label_err_rate: float, seed: int) -> LabeledDigraph:
    """Perturb a graph for robustness experiments.

    Removes ``floor(edge_del_rate * |E|)`` edges chosen uniformly,
    adds ``floor(edge_add_rate * |E|)`` uniformly random edges that were
    not present in the input, and replaces ``floor(label_err_rate * |V|)``
    node labels with the reserved empty label.  Deterministic for a fixed
    seed.  Additions are sampled from the complement of the *original*
    edge set, so a deleted edge is never re-added.
    """
    for name, rate in (("edge_add_rate", edge_add_rate),
                       ("edge_del_rate", edge_del_rate),
                       ("label_err_rate", label_err_rate)):
        if not 0.0 <= rate <= 1.0:
            raise ValidationError(f"{name} must be in [0, 1], got {rate}")

    rng = np.random.default_rng(seed)
    n = g.n_nodes
    m = g.n_edges
    edge_list = list(g.edges())

    n_del = int(edge_del_rate * m)
    del_idx = set(rng.choice(m, size=n_del, replace=False).tolist()) if n_del else set()
    kept = {e for i, e in enumerate(edge_list) if i not in del_idx}

    n_add = int(edge_add_rate * m)
    capacity = n * n - m
    if n_add > capacity:
        warnings.warn(
            f"requested {n_add} edge additions but only {capacity} "
            f"non-existing edges are available; clamping")
        n_add = capacity
    existing = {u * n + v for u, v in edge_list}
    added: set[int] = set()
    if n_add > 0:
        if n_add * 2 >= capacity:
            # dense case: enumerate the complement and sample exactly
            pool = np.setdiff1d(np.arange(n * n, dtype=np.int64),
                                np.fromiter(existing, dtype=np.int64, count=m))
            added = set(rng.choice(pool, size=n_add, replace=False).tolist())
        else:
            while len(added) < n_add:
                code = int(rng.integers(0, n * n))
                if code not in existing and code not in added:
                    added.add(code)
    for code in added:
        kept.add((code // n, code % n))

    labels = g.labels.copy()
    label_dict = list(g.label_dict)
    n_err = int(label_err_rate * n)
    if n_err:
        if EMPTY_LABEL in label_dict:
            empty_id = label_dict.index(EMPTY_LABEL)
        else:
            empty_id = len(label_dict)
            label_dict.append(EMPTY_LABEL)
        victims = rng.choice(n, size=n_err, replace=False)
        labels[victims] = empty_id

    return LabeledDigraph(list(g.ext_ids), labels, label_dict,
                          *_csr_from_edges(n, kept))
