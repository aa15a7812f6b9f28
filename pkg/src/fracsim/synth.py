"""Seeded random graph generators for tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .graph import LabeledDigraph, build_graph, symmetric_closure


def _label_names(n_labels: int) -> list[str]:
    return [f"L{i}" for i in range(n_labels)]


def random_labeled_digraph(n_nodes: int, *, edge_prob: float | None = None,
                           n_edges: int | None = None, n_labels: int = 3,
                           seed: int = 0) -> LabeledDigraph:
    """Erdos-Renyi style digraph with uniform random labels.

    Either ``edge_prob`` (independent arcs, no self-loops) or ``n_edges``
    (distinct arcs sampled without replacement) must be given.
    """
    if (edge_prob is None) == (n_edges is None):
        raise ValueError("give exactly one of edge_prob / n_edges")
    rng = np.random.default_rng(seed)
    names = _label_names(n_labels)
    nodes = [(f"n{i}", names[int(rng.integers(0, n_labels))])
             for i in range(n_nodes)]
    edges = []
    if edge_prob is not None:
        mask = rng.random((n_nodes, n_nodes)) < edge_prob
        np.fill_diagonal(mask, False)
        for u, v in zip(*np.nonzero(mask)):
            edges.append((f"n{u}", f"n{v}"))
    else:
        capacity = n_nodes * (n_nodes - 1)
        if n_edges > capacity:
            raise ValueError(f"cannot place {n_edges} distinct arcs "
                             f"on {n_nodes} nodes")
        codes = rng.choice(capacity, size=n_edges, replace=False)
        for code in codes:
            u, r = divmod(int(code), n_nodes - 1)
            v = r if r < u else r + 1  # skip the diagonal
            edges.append((f"n{u}", f"n{v}"))
    return build_graph(nodes, edges)


def random_connected_undirected(n_nodes: int, *, extra_edge_prob: float = 0.2,
                                n_labels: int = 2,
                                seed: int = 0) -> LabeledDigraph:
    """Connected undirected graph (random tree plus extras), as a
    symmetric digraph."""
    rng = np.random.default_rng(seed)
    names = _label_names(n_labels)
    nodes = [(f"n{i}", names[int(rng.integers(0, n_labels))])
             for i in range(n_nodes)]
    edges = []
    for v in range(1, n_nodes):
        u = int(rng.integers(0, v))
        edges.append((f"n{u}", f"n{v}"))
    for u in range(n_nodes):
        for v in range(u + 1, n_nodes):
            if rng.random() < extra_edge_prob:
                edges.append((f"n{u}", f"n{v}"))
    return symmetric_closure(build_graph(nodes, edges))
