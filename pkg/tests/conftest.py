import numpy as np
import pytest

from fracsim import build_graph


@pytest.fixture
def chain_pair():
    """The worked 2-chain example: A->B against A->C."""
    g1 = build_graph([("a1", "A"), ("a2", "B")], [("a1", "a2")])
    g2 = build_graph([("c1", "A"), ("c2", "C")], [("c1", "c2")])
    return g1, g2


def make_random_pair(rng, max_nodes=12, n_labels=3, edge_prob=0.2):
    from fracsim.synth import random_labeled_digraph
    n1 = int(rng.integers(2, max_nodes + 1))
    n2 = int(rng.integers(2, max_nodes + 1))
    g1 = random_labeled_digraph(n1, edge_prob=edge_prob, n_labels=n_labels,
                                seed=int(rng.integers(0, 2**31)))
    g2 = random_labeled_digraph(n2, edge_prob=edge_prob, n_labels=n_labels,
                                seed=int(rng.integers(0, 2**31)))
    return g1, g2


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
