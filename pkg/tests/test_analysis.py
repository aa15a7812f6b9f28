import itertools
import math

import numpy as np
import pytest

from fracsim import (FSimConfig, ValidationError, align, build_graph,
                     iterate_to_convergence, ndcg, pearson, top_k)
from fracsim.scores import make_table


def table_from(entries, n1, n2):
    entries = sorted(entries)
    return make_table(n1, n2,
                      np.array([e[0] for e in entries], dtype=np.int64),
                      np.array([e[1] for e in entries], dtype=np.int64),
                      np.array([e[2] for e in entries], dtype=np.float64))


def test_pearson_examples():
    assert pearson([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
    assert pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)


def test_pearson_errors():
    with pytest.raises(ValidationError):
        pearson([1.0], [2.0])
    with pytest.raises(ValidationError):
        pearson([1, 1, 1], [1, 2, 3])


def test_pearson_affine_invariance(rng):
    x = rng.random(50)
    y = rng.random(50)
    base = pearson(x, y)
    assert pearson(3.0 * x + 2.0, y) == pytest.approx(base, abs=1e-12)
    assert pearson(x, 0.25 * y - 7.0) == pytest.approx(base, abs=1e-12)
    assert pearson(y, x) == pytest.approx(base, abs=1e-12)


def test_top_k_basics():
    table = table_from([(0, 0, 0.5), (0, 1, 0.9), (0, 2, 0.9),
                        (0, 3, 0.1), (1, 0, 1.0)], 2, 4)
    # ties at 0.9 resolve toward the smaller id
    assert top_k(table, 0, 2) == [(1, 0.9), (2, 0.9)]
    # k larger than the candidate count returns everything
    assert len(top_k(table, 0, 99)) == 4
    with pytest.raises(ValidationError):
        top_k(table, 9, 1)
    with pytest.raises(ValidationError):
        top_k(table, 0, 0)


def test_top_k_self_query_identity_graphs():
    g = build_graph([("a", "A"), ("b", "B"), ("c", "C")],
                    [("a", "b"), ("b", "c")])
    cfg = FSimConfig(variant="bj", w_plus=0.4, w_minus=0.4,
                     label_fn="indicator", matching_mode="exact-small")
    table, _ = iterate_to_convergence(g, g, cfg)
    for u in range(g.n_nodes):
        best, score = top_k(table, u, 1)[0]
        assert best == u
        assert score == pytest.approx(1.0, abs=1e-9)


def test_align_identity_unique_labels():
    g = build_graph([("a", "A"), ("b", "B"), ("c", "C")],
                    [("a", "b"), ("b", "c")])
    for variant in ("s", "dp", "b", "bj"):
        cfg = FSimConfig(variant=variant, w_plus=0.4, w_minus=0.4,
                         label_fn="indicator", matching_mode="exact-small")
        table, _ = iterate_to_convergence(g, g, cfg)
        result = align(table, {u: u for u in range(g.n_nodes)})
        assert result.f1 == pytest.approx(1.0)
        assert all(result.argmax_sets[u] == [u] for u in range(g.n_nodes))


def test_align_tied_argmax_term():
    # A_0 = {0, 1} contains the truth: the node contributes 2/3 / |V1|
    table = table_from([(0, 0, 0.7), (0, 1, 0.7), (0, 2, 0.3)], 1, 3)
    result = align(table, {0: 0})
    assert result.precision[0] == pytest.approx(0.5)
    assert result.recall[0] == 1.0
    assert result.f1 == pytest.approx(2 * 0.5 * 1 / 1.5)


def test_align_miss_contributes_zero():
    table = table_from([(0, 0, 0.9), (0, 1, 0.2), (1, 0, 0.8)], 2, 2)
    result = align(table, {0: 1, 1: 0})
    assert result.precision[0] == 0.0 and result.recall[0] == 0.0
    assert result.f1 == pytest.approx((2 * 1 * 1 / 2) / 2)


def test_align_validates_truth_nodes():
    table = table_from([(0, 0, 0.9)], 1, 1)
    with pytest.raises(ValidationError):
        align(table, {5: 0})


def test_ndcg_examples():
    assert ndcg(["a", "b"], {"a": 2, "b": 0}) == pytest.approx(1.0)
    assert ndcg(["a", "b"], {}) == 0.0
    got = ndcg(["a", "b"], {"a": 0, "b": 2})
    assert got == pytest.approx((2 / math.log2(3)) / 2, abs=1e-4)
    assert got == pytest.approx(0.6309, abs=1e-4)


def test_ndcg_one_iff_sorted_exhaustive():
    grades = [2, 1, 0, 1, 2, 0]
    items = list(range(6))
    rel = dict(zip(items, grades))
    for perm in itertools.permutations(items):
        ranked_grades = [rel[i] for i in perm]
        value = ndcg(list(perm), rel)
        is_sorted = all(a >= b for a, b in
                        zip(ranked_grades, ranked_grades[1:]))
        assert (value >= 1.0 - 1e-12) == is_sorted
        assert value <= 1.0 + 1e-12
