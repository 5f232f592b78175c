"""Shared builders for the test suite.

Oracles here are deliberately dumb: pair scans, dict counting, and
explicit arithmetic, so they cannot share a bug with the vectorized
code under test.
"""

import numpy as np
import pytest

from netab.graphs import SocialGraph, build_graph


def er_graph(n, p, seed, features=None):
    """Erdos-Renyi graph via explicit pair enumeration (test scale only)."""
    rng = np.random.default_rng(seed)
    src, dst = [], []
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                src.append(u)
                dst.append(v)
    return build_graph(np.array(src, np.int64), np.array(dst, np.int64),
                       num_nodes=n, node_features=features)


def edge_set(g: SocialGraph):
    """Undirected edge set {(u, v): weight} with u < v, by pair scan."""
    out = {}
    for u in range(g.node_count):
        nbrs, ws = g.neighbors(u)
        for v, w in zip(nbrs, ws):
            if u < v:
                out[(u, int(v))] = float(w)
    return out


def graph_from_pairs(pairs, n=None, weights=None):
    pairs = np.asarray(pairs, np.int64).reshape(-1, 2)
    return build_graph(pairs[:, 0], pairs[:, 1], weights, num_nodes=n)


def two_cliques(k, bridge=False):
    """Two disjoint K_k graphs, optionally joined by one edge."""
    pairs = []
    for base in (0, k):
        for i in range(k):
            for j in range(i + 1, k):
                pairs.append((base + i, base + j))
    if bridge:
        pairs.append((0, k))
    return graph_from_pairs(pairs, n=2 * k)


def connected(g: SocialGraph) -> bool:
    n = g.node_count
    seen = np.zeros(n, bool)
    stack = [0]
    seen[0] = True
    while stack:
        u = stack.pop()
        for v in g.neighbors(u)[0]:
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return bool(seen.all())


@pytest.fixture
def tmp_text(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return write
