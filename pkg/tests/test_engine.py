import math

import numpy as np
import pytest

from fracsim import (FSimConfig, FSimEngine, ResourceBudgetError, build_graph,
                     check_pair, initialize_scores, iterate_to_convergence,
                     lookup_score, map_neighbors, normalizer, set_score,
                     update_pair, upper_bound)
from fracsim.scores import make_table
from conftest import make_random_pair

CFG04 = dict(w_plus=0.4, w_minus=0.4, label_fn="indicator")


def stub_table(n1, n2, entries):
    """ScoreTable with explicit (u, v, score) entries."""
    entries = sorted(entries)
    pu = np.array([e[0] for e in entries], dtype=np.int64)
    pv = np.array([e[1] for e in entries], dtype=np.int64)
    sc = np.array([e[2] for e in entries], dtype=np.float64)
    return make_table(n1, n2, pu, pv, sc)


def python_sweep(g1, g2, cfg, k):
    """Reference iteration: update_pair over every candidate, k times."""
    table = initialize_scores(g1, g2, cfg)
    for gen in range(1, k + 1):
        scores = np.array([update_pair(g1, g2, u, v, table, cfg)
                           for u, v, _ in table.items()], dtype=np.float64)
        table = table.with_scores(scores, gen)
    return table


def test_normalizer_examples():
    assert normalizer("bj", 4, 9) == 6
    assert normalizer("b", 2, 3) == 5
    assert normalizer("s", 3, 7) == 3
    assert normalizer("dp", 3, 7) == 3


def test_initialize_theta_one_indicator():
    g1 = build_graph([("a", "A"), ("b", "B")], [])
    g2 = build_graph([("x", "A"), ("y", "B"), ("z", "A")], [])
    cfg = FSimConfig(theta=1.0, **CFG04)
    table = initialize_scores(g1, g2, cfg)
    assert {(u, v) for u, v, _ in table.items()} == {(0, 0), (0, 2), (1, 1)}
    assert all(s == 1.0 for _, _, s in table.items())


def test_initialize_theta_zero_counts():
    g1 = build_graph([(f"a{i}", "A") for i in range(3)], [])
    g2 = build_graph([(f"b{i}", "B") for i in range(4)], [])
    table = initialize_scores(g1, g2, FSimConfig(theta=0.0, **CFG04))
    assert len(table) == 12


def test_initialize_ub_beta_one_empty():
    g1 = build_graph([("a", "A")], [])
    g2 = build_graph([("x", "A")], [])
    cfg = FSimConfig(ub_enabled=True, beta=1.0, **CFG04)
    table = initialize_scores(g1, g2, cfg)
    assert len(table) == 0
    result, report = iterate_to_convergence(g1, g2, cfg)
    assert len(result) == 0 and report.converged


def test_config_rejects_zero_weights():
    from fracsim.errors import ConfigError
    with pytest.raises(ConfigError):
        FSimConfig(w_plus=0.0, w_minus=0.0)


def test_map_neighbors_s_argmax():
    g1 = build_graph([("x", "A")], [])
    g2 = build_graph([("y1", "A"), ("y2", "A")], [])
    prev = stub_table(1, 2, [(0, 0, 0.3), (0, 1, 0.7)])
    cfg = FSimConfig(variant="s", **CFG04)
    mapping = map_neighbors(g1, g2, "s", [0], [0, 1], prev, cfg)
    assert mapping.pairs == ((0, 1),)


def test_map_neighbors_theta_label_constraint():
    g1 = build_graph([("x1", "B"), ("x2", "C")], [])
    g2 = build_graph([("y", "B")], [])
    prev = stub_table(2, 1, [(0, 0, 1.0), (1, 0, 1.0)])
    cfg = FSimConfig(variant="s", theta=1.0, **CFG04)
    mapping = map_neighbors(g1, g2, "s", [0, 1], [0], prev, cfg)
    assert mapping.pairs == ((0, 0),)
    assert len(mapping) == 1


def test_map_neighbors_bj_greedy_vs_exact():
    g1 = build_graph([("x1", "A"), ("x2", "A")], [])
    g2 = build_graph([("y1", "A"), ("y2", "A")], [])
    prev = stub_table(2, 2, [(0, 0, 0.9), (0, 1, 0.8),
                             (1, 0, 0.85), (1, 1, 0.1)])
    greedy = FSimConfig(variant="bj", matching_mode="greedy", **CFG04)
    exact = FSimConfig(variant="bj", matching_mode="exact-small", **CFG04)
    picks = map_neighbors(g1, g2, "bj", [0, 1], [0, 1], prev, greedy)
    assert set(picks.pairs) == {(0, 0), (1, 1)}
    assert set_score(g1, g2, "bj", [0, 1], [0, 1], prev, greedy) == \
        pytest.approx(1.0 / 2.0)
    best = map_neighbors(g1, g2, "bj", [0, 1], [0, 1], prev, exact)
    assert set(best.pairs) == {(0, 1), (1, 0)}
    assert set_score(g1, g2, "bj", [0, 1], [0, 1], prev, exact) == \
        pytest.approx(1.65 / 2.0)


def test_set_score_empty_conventions():
    g1 = build_graph([("u", "A"), ("w", "B")], [])
    g2 = build_graph([("v", "A"), ("z", "B")], [])
    prev = initialize_scores(g1, g2, FSimConfig(**CFG04))
    for variant in ("s", "dp", "b", "bj"):
        cfg = FSimConfig(variant=variant, **CFG04)
        assert set_score(g1, g2, variant, [], [], prev, cfg) == 1.0
    for variant in ("s", "dp"):
        cfg = FSimConfig(variant=variant, **CFG04)
        assert set_score(g1, g2, variant, [], [1], prev, cfg) == 1.0
        assert set_score(g1, g2, variant, [1], [], prev, cfg) == 0.0
    for variant in ("b", "bj"):
        cfg = FSimConfig(variant=variant, **CFG04)
        assert set_score(g1, g2, variant, [], [1], prev, cfg) == 0.0
        assert set_score(g1, g2, variant, [1], [], prev, cfg) == 0.0
    # the one-sided-empty convention mirrors the exact b-variant behavior
    iso = build_graph([("u", "A")], [])
    succ = build_graph([("v", "A"), ("z", "B")], [("v", "z")])
    assert not check_pair(iso, succ, "b", 0, 0)


def test_update_pair_isolated_nodes():
    g1 = build_graph([("u", "A")], [])
    same = build_graph([("v", "A")], [])
    diff = build_graph([("v", "Z")], [])
    for variant in ("s", "dp", "b", "bj"):
        cfg = FSimConfig(variant=variant, **CFG04)
        prev = initialize_scores(g1, same, cfg)
        assert update_pair(g1, same, 0, 0, prev, cfg) == pytest.approx(1.0)
        prev = initialize_scores(g1, diff, cfg)
        assert update_pair(g1, diff, 0, 0, prev, cfg) == pytest.approx(0.8)


def test_chain_fixed_point(chain_pair):
    g1, g2 = chain_pair
    cfg = FSimConfig(variant="s", epsilon=1e-10, **CFG04)
    table, report = iterate_to_convergence(g1, g2, cfg)
    assert report.converged
    assert table.get(0, 0) == pytest.approx(19 / 21, abs=1e-9)
    assert table.get(1, 1) == pytest.approx(16 / 21, abs=1e-9)


def test_identical_graphs_reach_one_within_bound(rng):
    from fracsim.synth import random_labeled_digraph
    g = random_labeled_digraph(9, edge_prob=0.25, n_labels=2, seed=17)
    cfg = FSimConfig(variant="s", theta=1.0, epsilon=0.01,
                     matching_mode="exact-small", **CFG04)
    table, report = iterate_to_convergence(g, g, cfg)
    assert report.converged
    assert report.iterations <= math.ceil(math.log(0.01) / math.log(0.8))
    for u in range(g.n_nodes):
        assert table.get(u, u) == pytest.approx(1.0, abs=1e-12)


def test_upper_bound_examples():
    # u's out-labels {B, C} vs v's out-label {B}: half the sources map
    g1 = build_graph([("u", "A"), ("p", "B"), ("q", "C")],
                     [("u", "p"), ("u", "q")])
    g2 = build_graph([("v", "A"), ("r", "B")], [("v", "r")])
    cfg = FSimConfig(variant="s", theta=1.0, **CFG04)
    assert upper_bound(g1, g2, 0, 0, cfg) == pytest.approx(0.8)

    # every neighbor mappable: bound hits 1
    iso1 = build_graph([("u", "A"), ("p", "B")], [("u", "p")])
    iso2 = build_graph([("v", "A"), ("r", "B")], [("v", "r")])
    assert upper_bound(iso1, iso2, 0, 0, cfg) == pytest.approx(1.0)

    # different labels, no neighbors: only the label term is lost
    d1 = build_graph([("u", "A")], [])
    d2 = build_graph([("v", "Z")], [])
    assert upper_bound(d1, d2, 0, 0, cfg) == pytest.approx(0.8)


def test_lookup_score_paths():
    g1 = build_graph([("u", "A")], [])
    g2 = build_graph([("v", "Z")], [])
    table = stub_table(1, 1, [(0, 0, 0.42)])
    cfg = FSimConfig(**CFG04)
    assert lookup_score(table, 0, 0, cfg) == 0.42
    empty = stub_table(1, 1, [])
    assert lookup_score(empty, 0, 0, cfg) == 0.0
    ub_cfg = FSimConfig(ub_enabled=True, alpha=0.0, **CFG04)
    assert lookup_score(empty, 0, 0, ub_cfg, g1, g2) == 0.0
    ub_cfg = FSimConfig(ub_enabled=True, alpha=0.2, **CFG04)
    # bound for the different-label isolated pair is 0.8
    assert lookup_score(empty, 0, 0, ub_cfg, g1, g2) == pytest.approx(0.16)


def test_kernel_matches_python_reference(rng):
    variants = ("s", "dp", "b", "bj")
    thetas = (0.0, 0.6, 1.0)
    label_fns = ("indicator", "jw")
    matchings = ("greedy", "exact-small")
    ub_setups = ((False, 0.0, 0.5), (True, 0.0, 0.5), (True, 0.3, 0.3))
    for variant in variants:
        for theta in thetas:
            for label_fn in label_fns:
                for matching in matchings:
                    for ub, alpha, beta in ub_setups:
                        g1, g2 = make_random_pair(rng, max_nodes=7)
                        cfg = FSimConfig(
                            variant=variant, theta=theta, label_fn=label_fn,
                            matching_mode=matching, ub_enabled=ub,
                            alpha=alpha, beta=beta, w_plus=0.4, w_minus=0.4,
                            epsilon=1e-300, max_iterations=3)
                        table, _ = iterate_to_convergence(g1, g2, cfg)
                        ref = python_sweep(g1, g2, cfg, 3)
                        assert len(table) == len(ref)
                        got = {(u, v): s for u, v, s in table.items()}
                        want = {(u, v): s for u, v, s in ref.items()}
                        for key, val in want.items():
                            assert got[key] == pytest.approx(val, abs=1e-12), \
                                (variant, theta, label_fn, matching, ub, key)


def test_determinism_across_workers(rng):
    g1, g2 = make_random_pair(rng, max_nodes=10)
    tables = []
    for workers in (1, 2, 4):
        cfg = FSimConfig(variant="bj", workers=workers, **CFG04)
        table, _ = iterate_to_convergence(g1, g2, cfg)
        tables.append(table.scores)
    assert np.array_equal(tables[0], tables[1])
    assert np.array_equal(tables[0], tables[2])


def test_repeat_runs_bit_identical(rng):
    g1, g2 = make_random_pair(rng, max_nodes=9)
    cfg = FSimConfig(variant="dp", label_fn="jw", w_plus=0.4, w_minus=0.4)
    a, _ = iterate_to_convergence(g1, g2, cfg)
    b, _ = iterate_to_convergence(g1, g2, cfg)
    assert np.array_equal(a.scores, b.scores)


def test_contraction_and_range(rng):
    for _ in range(10):
        g1, g2 = make_random_pair(rng, max_nodes=9)
        for variant in ("s", "dp", "b", "bj"):
            cfg = FSimConfig(variant=variant, matching_mode="exact-small",
                             epsilon=0.01, **CFG04)
            _, report = iterate_to_convergence(g1, g2, cfg)
            assert report.converged
            for lo, hi in zip(report.score_min, report.score_max):
                assert lo >= 0.0 and hi <= 1.0
            for d_prev, d_next in zip(report.deltas, report.deltas[1:]):
                assert d_next <= 0.8 * d_prev + 1e-12


def test_swapped_arguments_symmetry(rng):
    for _ in range(5):
        g1, g2 = make_random_pair(rng, max_nodes=8)
        for variant in ("b", "bj"):
            cfg = FSimConfig(variant=variant, matching_mode="exact-small",
                             epsilon=1e-6, **CFG04)
            fwd, _ = iterate_to_convergence(g1, g2, cfg)
            bwd, _ = iterate_to_convergence(g2, g1, cfg)
            for u, v, s in fwd.items():
                assert abs(s - bwd.get(v, u)) <= 1e-12


def test_mapping_structure_stable_across_generations(rng):
    # C1/C2: mapping size and normalizer are generation-independent
    g1, g2 = make_random_pair(rng, max_nodes=7)
    cfg = FSimConfig(variant="dp", matching_mode="exact-small",
                     theta=1.0, epsilon=1e-300, **CFG04)
    sizes = {}
    for k in range(1, 5):
        run_cfg = FSimConfig(variant="dp", matching_mode="exact-small",
                             theta=1.0, epsilon=1e-300, max_iterations=k,
                             **CFG04)
        table, _ = iterate_to_convergence(g1, g2, run_cfg)
        for u, v, _ in table.items():
            s1 = g1.out_neighbors(u)
            s2 = g2.out_neighbors(v)
            mapping = map_neighbors(g1, g2, "dp", s1, s2, table, cfg)
            om = normalizer("dp", len(s1), len(s2))
            assert len(mapping) <= om or (len(s1) == 0)
            key = (u, v)
            if key in sizes:
                assert sizes[key] == len(mapping)
            else:
                sizes[key] = len(mapping)


def test_upper_bound_sound_and_consistent_with_kernel(rng):
    from fracsim import _kernels as K
    for _ in range(5):
        g1, g2 = make_random_pair(rng, max_nodes=8)
        for variant in ("s", "dp", "b", "bj"):
            cfg = FSimConfig(variant=variant, matching_mode="exact-small",
                             theta=1.0, **CFG04)
            engine = FSimEngine(g1, g2, cfg)
            table, _ = engine.run()
            ubs = np.empty(len(table), dtype=np.float64)
            K.compute_upper_bounds(
                0, 1, table.pair_u, table.pair_v, ubs, engine._gadj,
                g1.labels, g2.labels, engine._labmat, K.LABEL_MATRIX,
                cfg.theta, K.VARIANT_CODES[variant], cfg.w_plus, cfg.w_minus,
                K.NORM_ROP)
            for i, (u, v, s) in enumerate(table.items()):
                bound = upper_bound(g1, g2, u, v, cfg)
                assert ubs[i] == bound  # kernel and reference agree exactly
                assert s <= bound + 1e-9


def test_resource_budget_error():
    g = build_graph([(f"n{i}", "A") for i in range(20)], [])
    cfg = FSimConfig(max_candidates=100, **CFG04)
    with pytest.raises(ResourceBudgetError):
        initialize_scores(g, g, cfg)


def test_relative_convergence_mode(chain_pair):
    g1, g2 = chain_pair
    cfg = FSimConfig(variant="s", convergence_mode="relative", epsilon=0.01,
                     **CFG04)
    table, report = iterate_to_convergence(g1, g2, cfg)
    assert report.converged
    assert table.get(0, 0) == pytest.approx(19 / 21, abs=0.02)


def test_iteration_cap_reports_not_converged(chain_pair):
    g1, g2 = chain_pair
    cfg = FSimConfig(variant="s", max_iterations=1, epsilon=1e-9, **CFG04)
    _, report = iterate_to_convergence(g1, g2, cfg)
    assert not report.converged
    assert report.iterations == 1
