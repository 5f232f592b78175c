"""Weighted graph clustering and modularity.

Louvain here is the production path: seeded sequential local moves with
deterministic tie-breaking, then aggregation, repeated until the
modularity gain of a pass falls under min_gain. The exhaustive
partition search exists as an oracle for small graphs, not for use at
scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graphs import SocialGraph


@dataclass
class ModularityParams:
    resolution: float = 1.0
    min_gain: float = 1e-7
    max_passes: int = 20

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("resolution must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be >= 1")


@dataclass
class Clustering:
    """Partition of nodes into contiguous cluster ids 0..C-1."""

    assignment: np.ndarray  # (n,) int32
    modularity: float
    quality_trace: np.ndarray | None = None  # per-pass modularity (louvain)

    @property
    def cluster_count(self) -> int:
        return int(self.assignment.max()) + 1 if self.assignment.size else 0

    @property
    def cluster_sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.cluster_count)

    def validate(self) -> None:
        if self.assignment.size == 0:
            raise ValueError("empty assignment")
        c = self.cluster_count
        if self.assignment.min() < 0:
            raise ValueError("negative cluster id")
        if np.any(np.bincount(self.assignment, minlength=c) == 0):
            raise ValueError("empty cluster id in range")


def _dense_relabel(labels: np.ndarray) -> np.ndarray:
    """Relabel to 0..C-1 (order of sorted old labels), int32."""
    _, inv = np.unique(labels, return_inverse=True)
    return inv.astype(np.int32)


def singleton_clustering(n: int) -> Clustering:
    return Clustering(assignment=np.arange(n, dtype=np.int32),
                      modularity=float("nan"))


def clustering_from_labels(labels) -> Clustering:
    """Wrap an arbitrary label vector (e.g. planted blocks) as a Clustering."""
    labels = np.asarray(labels)
    return Clustering(assignment=_dense_relabel(labels),
                      modularity=float("nan"))


def modularity(g: SocialGraph, clustering: Clustering,
               resolution: float = 1.0) -> float:
    """Newman modularity with a resolution factor on the null term.

    Q = sum_c [ w_in_c / (2m) - resolution * (tot_c / (2m))^2 ]
    where w_in_c double-counts intra-cluster weight and tot_c is the
    cluster's total weighted degree.
    """
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    comm = clustering.assignment
    if comm.shape[0] != g.node_count:
        raise ValueError("assignment length != node count")
    two_m = float(g.weights.sum())
    if two_m <= 0:
        raise ValueError("modularity undefined: zero total weight")
    rows = np.repeat(np.arange(g.node_count, dtype=np.int64), g.degrees)
    same = comm[rows] == comm[g.indices]
    w_in = float(g.weights[same].sum())
    ncomm = int(comm.max()) + 1
    tot = np.bincount(comm, weights=g.strengths(), minlength=ncomm)
    return w_in / two_m - resolution * float(np.sum((tot / two_m) ** 2))


def _level_modularity(indptr, indices, weights, self_w, comm, resolution):
    """Modularity of a level graph that may carry self-loop weight."""
    n = indptr.shape[0] - 1
    two_m = float(weights.sum() + 2.0 * self_w.sum())
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    same = comm[rows] == comm[indices]
    w_in = float(weights[same].sum()) + 2.0 * float(self_w.sum())
    cs = np.concatenate(([0.0], np.cumsum(weights)))
    k = cs[indptr[1:]] - cs[indptr[:-1]] + 2.0 * self_w
    ncomm = int(comm.max()) + 1
    tot = np.bincount(comm, weights=k, minlength=ncomm)
    return w_in / two_m - resolution * float(np.sum((tot / two_m) ** 2))


def _aggregate(indptr, indices, weights, self_w, comm):
    """Collapse communities into nodes, keeping self-loop weight separate."""
    n = indptr.shape[0] - 1
    ncomm = int(comm.max()) + 1
    rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(indptr))
    cu = comm[rows]
    cv = comm[indices]
    intra = cu == cv
    new_self = np.bincount(cu[intra], weights=weights[intra],
                           minlength=ncomm) / 2.0
    new_self += np.bincount(comm, weights=self_w, minlength=ncomm)
    a = cu[~intra]
    b = cv[~intra]
    w = weights[~intra]
    key = a.astype(np.int64) * ncomm + b
    order = np.argsort(key, kind="stable")
    key = key[order]
    uniq, start = np.unique(key, return_index=True)
    wsum = np.add.reduceat(w[order], start) if key.size else w
    na = (uniq // ncomm).astype(np.int64)
    nb = (uniq % ncomm).astype(np.int32)
    new_indptr = np.zeros(ncomm + 1, np.int64)
    np.cumsum(np.bincount(na, minlength=ncomm), out=new_indptr[1:])
    return new_indptr, nb, wsum.astype(np.float64), new_self


# Small graphs are cheap to cluster but prone to sweep-order local
# optima, so they get a few extra seeded restarts; larger graphs keep
# single-run cost.
_RESTART_LIMIT = 512
_RESTARTS = 8


def louvain(g: SocialGraph, params: ModularityParams | None = None, *,
            seed: int) -> Clustering:
    """Two-phase modularity maximization with seeded sweep orders.

    Each pass shuffles the visit order, runs local moves to a fixed
    point, records the pass modularity, then aggregates. Stops when a
    pass improves modularity by less than min_gain, makes no move, or
    max_passes is reached. Graphs with at most _RESTART_LIMIT nodes run
    _RESTARTS seeded restarts and keep the best partition found.
    """
    if params is None:
        params = ModularityParams()
    if float(g.weights.sum()) <= 0:
        raise ValueError("louvain undefined: zero total weight")
    runs = _RESTARTS if g.node_count <= _RESTART_LIMIT else 1
    best = None
    for r in range(runs):
        rng = np.random.default_rng(seed if r == 0 else [seed, r])
        candidate = _louvain_once(g, params, rng)
        if best is None or candidate[2] > best[2] + 1e-12:
            best = candidate
    assignment, trace, q = best
    return Clustering(assignment=assignment, modularity=q,
                      quality_trace=trace)


def _louvain_once(g: SocialGraph, params: ModularityParams, rng):
    indptr = g.indptr.astype(np.int64, copy=True)
    indices = g.indices.astype(np.int32, copy=True)
    weights = g.weights.astype(np.float64, copy=True)
    self_w = np.zeros(g.node_count, np.float64)
    m = float(g.weights.sum()) / 2.0
    mapping = np.arange(g.node_count, dtype=np.int64)
    trace = []
    q_prev = _level_modularity(indptr, indices, weights, self_w,
                               mapping, params.resolution)
    for _pass in range(params.max_passes):
        level_n = indptr.shape[0] - 1
        comm = np.arange(level_n, dtype=np.int64)
        order = rng.permutation(level_n).astype(np.int64)
        moves = _kernels.louvain_local_phase(
            indptr, indices, weights, self_w, comm, order,
            float(params.resolution), m, 1000)
        comm = _dense_relabel(comm).astype(np.int64)
        q_new = _level_modularity(indptr, indices, weights, self_w, comm,
                                  params.resolution)
        trace.append(q_new)
        mapping = comm[mapping]
        if moves == 0 or q_new - q_prev < params.min_gain:
            break
        q_prev = q_new
        if int(comm.max()) + 1 == level_n:
            break
        indptr, indices, weights, self_w = _aggregate(
            indptr, indices, weights, self_w, comm)
    assignment = _dense_relabel(mapping)
    q = modularity(g, Clustering(assignment, 0.0), params.resolution)
    return assignment, np.asarray(trace), q


def label_propagation(g: SocialGraph, *, seed: int,
                      max_sweeps: int = 100) -> Clustering:
    """Seeded asynchronous weighted-majority label propagation.

    Every node starts in its own label; sweeps visit nodes in a fresh
    shuffled order and adopt the neighbor label with the largest
    incident weight (ties to the smallest label) until a sweep changes
    nothing or max_sweeps is hit.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    n = g.node_count
    rng = np.random.default_rng(seed)
    labels = np.arange(n, dtype=np.int64)
    for _sweep in range(max_sweeps):
        order = rng.permutation(n).astype(np.int64)
        changes = _kernels.labelprop_sweep(g.indptr, g.indices, g.weights,
                                           labels, order)
        if changes == 0:
            break
    assignment = _dense_relabel(labels)
    q = modularity(g, Clustering(assignment, 0.0)) \
        if float(g.weights.sum()) > 0 else float("nan")
    return Clustering(assignment=assignment, modularity=q)


def brute_force_best_partition(g: SocialGraph,
                               resolution: float = 1.0) -> Clustering:
    """Exhaustive search over all partitions; oracle for n <= 12."""
    n = g.node_count
    if n > 12:
        raise ValueError("exhaustive search capped at 12 nodes")
    if float(g.weights.sum()) <= 0:
        raise ValueError("modularity undefined: zero total weight")
    adj = np.zeros((n, n), np.float64)
    rows = np.repeat(np.arange(n, dtype=np.int64), g.degrees)
    adj[rows, g.indices] = g.weights
    best_a, best_q = _kernels.best_partition_exhaustive(adj,
                                                        float(resolution))
    return Clustering(assignment=_dense_relabel(best_a),
                      modularity=float(best_q))
