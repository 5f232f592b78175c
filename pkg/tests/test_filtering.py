"""Edge filtering by score threshold and hotspot removal."""

import numpy as np
import pytest

from netab.filtering import filter_by_score, remove_hotspots

from conftest import edge_set, er_graph, graph_from_pairs


def test_filter_by_score_keeps_at_or_above_gamma():
    g = graph_from_pairs([(0, 1), (0, 2), (1, 2), (2, 3)], n=4)
    # canonical order: (0,1) (0,2) (1,2) (2,3)
    scores = np.array([0.9, 0.5, 0.2, 0.7])
    fg = filter_by_score(g, scores, gamma=0.5)
    assert edge_set(fg) == {(0, 1): 0.9, (0, 2): 0.5, (2, 3): 0.7}
    assert fg.node_count == g.node_count  # isolates keep their rows


def test_filter_by_score_unit_weights():
    g = graph_from_pairs([(0, 1), (1, 2)], n=3)
    fg = filter_by_score(g, np.array([0.8, 0.1]), 0.5, "unit")
    assert edge_set(fg) == {(0, 1): 1.0}


def test_filter_by_score_carries_features():
    feats = np.arange(8.0).reshape(4, 2)
    g = er_graph(4, 0.9, seed=0, features=feats)
    fg = filter_by_score(g, np.full(g.edge_count, 0.6), 0.5)
    assert np.array_equal(fg.node_features, feats)


def test_filter_by_score_monotone_in_gamma():
    g = er_graph(40, 0.2, seed=5)
    scores = np.random.default_rng(3).random(g.edge_count)
    kept_prev = None
    for gamma in (0.1, 0.3, 0.5, 0.7, 0.9):
        kept = set(edge_set(filter_by_score(g, scores, gamma)))
        if kept_prev is not None:
            assert kept <= kept_prev
        kept_prev = kept


def test_filter_by_score_input_validation():
    g = graph_from_pairs([(0, 1), (1, 2)], n=3)
    with pytest.raises(ValueError):
        filter_by_score(g, np.array([0.5]), 0.5)
    with pytest.raises(ValueError):
        filter_by_score(g, np.array([0.5, np.nan]), 0.5)
    with pytest.raises(ValueError):
        filter_by_score(g, np.array([0.5, 0.6]), 0.5, "bogus")


def test_remove_hotspots_drops_all_hub_edges():
    # hub 0 with 5 spokes, plus a 2-path among cool nodes
    g = graph_from_pairs([(0, i) for i in range(1, 6)] + [(1, 2), (6, 7)],
                         n=8)
    fg = remove_hotspots(g, theta=4)
    assert edge_set(fg) == {(1, 2): 1.0, (6, 7): 1.0}


def test_remove_hotspots_single_pass_no_cascade():
    # b's only edges are to the hub and to c; removing the hub leaves b
    # below theta, but b-c survives because degrees are read once
    pairs = [(0, i) for i in range(1, 5)] + [(1, 5)]
    g = graph_from_pairs(pairs, n=6)
    fg = remove_hotspots(g, theta=3)
    assert edge_set(fg) == {(1, 5): 1.0}


def test_remove_hotspots_monotone_in_theta():
    g = er_graph(50, 0.15, seed=9)
    kept_prev = set()
    for theta in (2, 4, 8, 100):
        kept = set(edge_set(remove_hotspots(g, theta)))
        assert kept >= kept_prev
        kept_prev = kept
    assert kept_prev == set(edge_set(g))  # theta above max degree: no-op


def test_remove_hotspots_matches_pair_scan():
    g = er_graph(40, 0.2, seed=2)
    theta = 6
    deg = {u: len(g.neighbors(u)[0]) for u in range(g.node_count)}
    want = {e: w for e, w in edge_set(g).items()
            if deg[e[0]] <= theta and deg[e[1]] <= theta}
    assert edge_set(remove_hotspots(g, theta)) == pytest.approx(want)


def test_remove_hotspots_rejects_negative_theta():
    g = graph_from_pairs([(0, 1)], n=2)
    with pytest.raises(ValueError):
        remove_hotspots(g, -1)
