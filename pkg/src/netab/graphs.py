"""Undirected social graphs in CSR form, plus structural summaries.

The static graph G is the substrate everything else runs on: link
scoring, filtering, clustering, group assignment, and the campaign
simulator. Edges are stored twice (once per direction) with sorted
neighbor lists per row, so neighborhood scans, membership tests, and
set intersections are all cheap and allocation-free.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import _kernels


class EdgeListError(ValueError):
    """Malformed edge-list input; message carries the offending line."""


@dataclass
class IngestStats:
    rows_read: int = 0
    edges_kept: int = 0
    self_loops_dropped: int = 0
    duplicates_collapsed: int = 0


@dataclass
class SocialGraph:
    """Static undirected graph over dense node ids 0..n-1.

    indptr : (n+1,) int64, CSR row offsets
    indices : (2E,) int32, neighbor ids, ascending within each row
    weights : (2E,) float64, nonnegative, symmetric across directions
    node_ids : (n,) int64, external id of each dense node
    node_features : optional (n, d) float64
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    node_ids: np.ndarray
    node_features: np.ndarray | None = None
    ingest: IngestStats | None = None

    def __post_init__(self):
        if self.indptr[0] != 0 or self.indptr[-1] != self.indices.shape[0]:
            raise ValueError("indptr does not span indices")
        if np.any(np.diff(self.indptr) < 0):
            raise ValueError("indptr must be nondecreasing")
        if self.weights.shape != self.indices.shape:
            raise ValueError("weights/indices length mismatch")
        if self.node_ids.shape[0] != self.node_count:
            raise ValueError("node_ids length mismatch")
        if self.weights.size and (not np.all(np.isfinite(self.weights))
                                  or self.weights.min() < 0):
            raise ValueError("weights must be finite and nonnegative")
        if self.node_features is not None \
                and self.node_features.shape[0] != self.node_count:
            raise ValueError("node_features row count mismatch")

    @property
    def node_count(self) -> int:
        return self.indptr.shape[0] - 1

    @property
    def edge_count(self) -> int:
        return self.indices.shape[0] // 2

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def total_weight(self) -> float:
        """Sum of undirected edge weights."""
        return float(self.weights.sum()) / 2.0

    def strengths(self) -> np.ndarray:
        """Weighted degree per node."""
        cs = np.concatenate(([0.0], np.cumsum(self.weights)))
        return cs[self.indptr[1:]] - cs[self.indptr[:-1]]

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        s, e = self.indptr[v], self.indptr[v + 1]
        return self.indices[s:e], self.weights[s:e]

    def has_edge(self, u: int, v: int) -> bool:
        s, e = self.indptr[u], self.indptr[u + 1]
        j = np.searchsorted(self.indices[s:e], v)
        return bool(j < e - s and self.indices[s + j] == v)

    def edge_array(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Canonical (src, dst, weight) with src < dst, sorted by (src, dst)."""
        rows = np.repeat(np.arange(self.node_count, dtype=np.int32),
                         self.degrees)
        keep = self.indices > rows
        return rows[keep], self.indices[keep], self.weights[keep]

    def validate(self) -> None:
        """Full O(E log E) structural check; builders already guarantee this."""
        rows = np.repeat(np.arange(self.node_count, dtype=np.int64),
                         self.degrees)
        if np.any(rows == self.indices):
            raise ValueError("self loop present")
        order_ok = np.ones(self.indices.shape[0], bool)
        if self.indices.shape[0] > 1:
            same_row = rows[1:] == rows[:-1]
            order_ok[1:] = ~same_row | (self.indices[1:] > self.indices[:-1])
        if not order_ok.all():
            raise ValueError("rows not strictly sorted (or duplicate edge)")
        key_fwd = rows.astype(np.int64) * self.node_count + self.indices
        key_rev = self.indices.astype(np.int64) * self.node_count + rows
        fwd = np.sort(key_fwd)
        rev = np.sort(key_rev)
        if not np.array_equal(fwd, rev):
            raise ValueError("adjacency not symmetric")
        w_by_fwd = self.weights[np.argsort(key_fwd, kind="stable")]
        w_by_rev = self.weights[np.argsort(key_rev, kind="stable")]
        if not np.array_equal(w_by_fwd, w_by_rev):
            raise ValueError("weights not symmetric")


@dataclass
class LabelGraph:
    """Timestamped realized edges (the campaign's own graph), L subset of G
    by construction in the simulator; endpoints are dense ids into the same
    node universe as the SocialGraph it was observed on.
    """

    src: np.ndarray  # (L,) int32, src < dst
    dst: np.ndarray
    day: np.ndarray  # (L,) int32, 1-based
    horizon: int

    @property
    def edge_count(self) -> int:
        return self.src.shape[0]

    def snapshot(self, t: int) -> "LabelGraph":
        """Edges with timestamp <= t."""
        if t < 0:
            raise ValueError("snapshot day must be >= 0")
        keep = self.day <= t
        return LabelGraph(self.src[keep], self.dst[keep], self.day[keep],
                          horizon=min(t, self.horizon))


@dataclass
class DegreeHistogram:
    bucket_edges: np.ndarray  # (b+1,) float64, log-spaced above 0
    counts: np.ndarray  # (b,) int64
    node_count: int
    max_degree: int
    mean: float
    median: float

    @property
    def skew_ratio(self) -> float:
        """Mean over median; > 1 signals a right-skewed (hub-heavy) tail."""
        if self.median == 0:
            return float("inf")
        return self.mean / self.median


@dataclass
class GrowthProfile:
    r_max: int
    sampled: int
    mean_ball_sizes: np.ndarray  # (r_max+1,) mean |B_r| over sampled nodes
    mean_ratio: np.ndarray  # (r_max,) mean |B_{r+1}| / |B_r|
    max_ratio: np.ndarray  # (r_max,)


def build_graph(src, dst, weight=None, *, num_nodes=None, node_ids=None,
                node_features=None, ingest=None) -> SocialGraph:
    """Assemble a SocialGraph from internal-id edge endpoints.

    Drops self loops, collapses duplicate edges keeping the max weight,
    and symmetrizes. Counts land in the IngestStats if one is passed.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if weight is None:
        weight = np.ones(src.shape[0], np.float64)
    else:
        weight = np.asarray(weight, dtype=np.float64)
    if src.shape != dst.shape or src.shape != weight.shape:
        raise ValueError("src/dst/weight length mismatch")
    if num_nodes is None:
        num_nodes = int(max(src.max(), dst.max())) + 1 if src.size else 0
    if src.size and (src.min() < 0 or dst.min() < 0
                     or max(src.max(), dst.max()) >= num_nodes):
        raise ValueError("endpoint outside [0, num_nodes)")

    stats = ingest if ingest is not None else IngestStats()
    loops = src == dst
    n_loops = int(loops.sum())
    if n_loops:
        keep = ~loops
        src, dst, weight = src[keep], dst[keep], weight[keep]
    stats.self_loops_dropped += n_loops

    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    key = lo * num_nodes + hi
    order = np.argsort(key, kind="stable")
    key = key[order]
    weight = weight[order]
    uniq_key, start = np.unique(key, return_index=True)
    if uniq_key.shape[0] != key.shape[0]:
        wmax = np.maximum.reduceat(weight, start) if key.size else weight
    else:
        wmax = weight
    stats.duplicates_collapsed += int(key.shape[0] - uniq_key.shape[0])
    stats.edges_kept += int(uniq_key.shape[0])
    lo = (uniq_key // num_nodes).astype(np.int32)
    hi = (uniq_key % num_nodes).astype(np.int32)

    both_src = np.concatenate([lo, hi])
    both_dst = np.concatenate([hi, lo])
    both_w = np.concatenate([wmax, wmax])
    order = np.lexsort((both_dst, both_src))
    indices = both_dst[order]
    weights = both_w[order]
    indptr = np.zeros(num_nodes + 1, np.int64)
    np.cumsum(np.bincount(both_src, minlength=num_nodes), out=indptr[1:])

    if node_ids is None:
        node_ids = np.arange(num_nodes, dtype=np.int64)
    else:
        node_ids = np.asarray(node_ids, dtype=np.int64)
    return SocialGraph(indptr=indptr, indices=indices, weights=weights,
                       node_ids=node_ids, node_features=node_features,
                       ingest=stats)


def build_label_graph(src, dst, day, horizon, num_nodes) -> LabelGraph:
    """Canonicalize and validate timestamped label edges.

    Duplicate pairs keep their earliest day. Self loops and endpoints
    outside the node universe are rejected.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    day = np.asarray(day, dtype=np.int32)
    if src.size and (src.min() < 0 or dst.min() < 0
                     or max(src.max(), dst.max()) >= num_nodes):
        raise ValueError("label edge endpoint outside node universe")
    if np.any(src == dst):
        raise ValueError("label graph contains a self loop")
    if src.size and (day.min() < 1 or day.max() > horizon):
        raise ValueError("label day outside [1, horizon]")
    lo = np.minimum(src, dst)
    hi = np.maximum(src, dst)
    key = lo * num_nodes + hi
    order = np.lexsort((day, key))
    key, day = key[order], day[order]
    uniq, start = np.unique(key, return_index=True)
    day = day[start]  # earliest stamp per pair
    return LabelGraph(src=(uniq // num_nodes).astype(np.int32),
                      dst=(uniq % num_nodes).astype(np.int32),
                      day=day, horizon=horizon)


def label_edges_in_graph(g: SocialGraph, lg: LabelGraph) -> np.ndarray:
    """Boolean mask: which label edges exist in g."""
    gs, gd, _ = g.edge_array()
    n = g.node_count
    gkey = gs.astype(np.int64) * n + gd
    lkey = lg.src.astype(np.int64) * n + lg.dst
    pos = np.searchsorted(gkey, lkey)
    pos = np.minimum(pos, gkey.shape[0] - 1) if gkey.size else pos
    if not gkey.size:
        return np.zeros(lkey.shape[0], bool)
    return gkey[pos] == lkey


def _map_external(src_ext, dst_ext):
    uniq = np.unique(np.concatenate([src_ext, dst_ext]))
    return (np.searchsorted(uniq, src_ext).astype(np.int64),
            np.searchsorted(uniq, dst_ext).astype(np.int64), uniq)


def _scan_for_error(path, kind):
    """Slow path: locate the first malformed line, 1-based.

    kind 'edges': src, dst, optional nonnegative weight.
    kind 'labels': src, dst, integer day.
    """
    lo_cols, hi_cols = (2, 3) if kind == "edges" else (3, 3)
    with open(path, "rt") as f:
        for lineno, line in enumerate(f, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split("\t")
            if len(parts) < lo_cols or len(parts) > hi_cols:
                raise EdgeListError(
                    f"{path}: line {lineno}: expected {lo_cols}..{hi_cols} "
                    f"tab-separated fields, got {len(parts)}")
            try:
                int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListError(
                    f"{path}: line {lineno}: endpoints must be integers") \
                    from None
            if kind == "edges" and len(parts) == 3:
                try:
                    w = float(parts[2])
                except ValueError:
                    raise EdgeListError(
                        f"{path}: line {lineno}: weight must be a number") \
                        from None
                if not np.isfinite(w) or w < 0:
                    raise EdgeListError(
                        f"{path}: line {lineno}: weight must be finite "
                        f"and nonnegative")
            if kind == "labels":
                try:
                    int(parts[2])
                except ValueError:
                    raise EdgeListError(
                        f"{path}: line {lineno}: day must be an integer") \
                        from None
    raise EdgeListError(f"{path}: malformed input")


def _read_chunks(path, names, dtypes, chunk_size):
    frames = []
    reader = pd.read_csv(path, sep="\t", comment="#", header=None,
                         names=names, dtype=dtypes, engine="c",
                         index_col=False, chunksize=chunk_size)
    with warnings.catch_warnings():
        # extra fields on a line only warn by default; treat as malformed
        warnings.simplefilter("error", pd.errors.ParserWarning)
        for chunk in reader:
            frames.append(chunk)
    if not frames:
        return pd.DataFrame({k: pd.Series(dtype=v) for k, v in dtypes.items()})
    return pd.concat(frames, ignore_index=True)


def load_edge_list(path, chunk_size=1_000_000) -> SocialGraph:
    """Read a tab-separated edge list: src, dst, optional weight.

    Lines starting with '#' are comments. External int64 ids are mapped
    to dense internal ids (sorted order); the mapping is kept in
    node_ids. Malformed lines raise EdgeListError with the line number.
    """
    try:
        df = _read_chunks(path, ["src", "dst", "weight"],
                          {"src": np.int64, "dst": np.int64,
                           "weight": np.float64}, chunk_size)
    except FileNotFoundError:
        raise
    except (ValueError, pd.errors.ParserError, pd.errors.ParserWarning):
        _scan_for_error(path, kind="edges")
        raise EdgeListError(f"{path}: malformed input")  # unreachable
    rows = len(df)
    w = df["weight"].to_numpy()
    w = np.where(np.isnan(w), 1.0, w)
    if w.size and (not np.all(np.isfinite(w)) or w.min() < 0):
        _scan_for_error(path, kind="edges")
    src, dst, uniq = _map_external(df["src"].to_numpy(), df["dst"].to_numpy())
    stats = IngestStats(rows_read=rows)
    return build_graph(src, dst, w, num_nodes=uniq.shape[0], node_ids=uniq,
                       ingest=stats)


def write_edge_list(g: SocialGraph, path) -> None:
    """Canonical upper-triangle edge list with external ids."""
    s, d, w = g.edge_array()
    df = pd.DataFrame({"src": g.node_ids[s], "dst": g.node_ids[d],
                       "weight": w})
    with open(path, "wt") as f:
        f.write("# src\tdst\tweight\n")
        df.to_csv(f, sep="\t", header=False, index=False,
                  float_format="%.17g")


def load_label_list(path, horizon, num_nodes, node_ids=None,
                    chunk_size=1_000_000) -> LabelGraph:
    """Read tab-separated label edges: src, dst, day.

    Endpoints are external ids when node_ids is given (the graph's
    universe), otherwise already-dense internal ids.
    """
    try:
        df = _read_chunks(path, ["src", "dst", "day"],
                          {"src": np.int64, "dst": np.int64,
                           "day": np.float64}, chunk_size)
    except FileNotFoundError:
        raise
    except (ValueError, pd.errors.ParserError, pd.errors.ParserWarning):
        _scan_for_error(path, kind="labels")
        raise EdgeListError(f"{path}: malformed input")
    day = df["day"].to_numpy()
    if day.size and (np.any(np.isnan(day))
                     or np.any(day != day.astype(np.int64))):
        _scan_for_error(path, kind="labels")
    src = df["src"].to_numpy()
    dst = df["dst"].to_numpy()
    if node_ids is not None:
        node_ids = np.asarray(node_ids, dtype=np.int64)
        order = np.argsort(node_ids, kind="stable")
        sorted_ids = node_ids[order]
        si = np.searchsorted(sorted_ids, src)
        di = np.searchsorted(sorted_ids, dst)
        si = np.minimum(si, num_nodes - 1)
        di = np.minimum(di, num_nodes - 1)
        if np.any(sorted_ids[si] != src) or np.any(sorted_ids[di] != dst):
            raise EdgeListError(f"{path}: label endpoint not in graph universe")
        src, dst = order[si], order[di]
    return build_label_graph(src, dst, day.astype(np.int32), horizon,
                             num_nodes)


def write_label_list(lg: LabelGraph, path, node_ids=None) -> None:
    src, dst = lg.src, lg.dst
    if node_ids is not None:
        ids = np.asarray(node_ids)
        src, dst = ids[src], ids[dst]
    df = pd.DataFrame({"src": src, "dst": dst, "day": lg.day})
    with open(path, "wt") as f:
        f.write("# src\tdst\tday\n")
        df.to_csv(f, sep="\t", header=False, index=False)


def degree_distribution(g: SocialGraph, num_buckets=32) -> DegreeHistogram:
    """Histogram of unweighted degrees in log-spaced buckets."""
    if g.node_count == 0:
        raise ValueError("empty graph")
    deg = g.degrees
    dmax = int(deg.max())
    top = max(dmax, 1)
    inner = np.geomspace(1.0, top + 1.0, num=num_buckets)
    edges = np.concatenate(([0.0], inner))
    counts, _ = np.histogram(deg, bins=edges)
    return DegreeHistogram(bucket_edges=edges,
                           counts=counts.astype(np.int64),
                           node_count=g.node_count, max_degree=dmax,
                           mean=float(deg.mean()),
                           median=float(np.median(deg)))


def neighborhood_growth(g: SocialGraph, r_max=3, sample_size=64,
                        seed=0) -> GrowthProfile:
    """Sampled closed-ball growth |B_{r+1}(v)| / |B_r(v)|, r < r_max."""
    if r_max < 1:
        raise ValueError("r_max must be >= 1")
    n = g.node_count
    if n == 0:
        raise ValueError("empty graph")
    rng = np.random.default_rng(seed)
    if n <= sample_size:
        nodes = np.arange(n)
    else:
        nodes = rng.choice(n, size=sample_size, replace=False)
    sizes = np.empty((nodes.shape[0], r_max + 1), np.float64)
    for i, v in enumerate(nodes):
        sizes[i] = _kernels.bfs_ball_sizes(g.indptr, g.indices, int(v), r_max)
    ratios = sizes[:, 1:] / sizes[:, :-1]
    return GrowthProfile(r_max=r_max, sampled=int(nodes.shape[0]),
                         mean_ball_sizes=sizes.mean(axis=0),
                         mean_ratio=ratios.mean(axis=0),
                         max_ratio=ratios.max(axis=0))


def induced_subgraph(g: SocialGraph, nodes) -> SocialGraph:
    """Subgraph on the given internal ids, renumbered densely in order."""
    nodes = np.asarray(nodes, dtype=np.int64)
    if nodes.size == 0:
        raise ValueError("empty node selection")
    if nodes.min() < 0 or nodes.max() >= g.node_count:
        raise ValueError("node id out of range")
    if np.unique(nodes).shape[0] != nodes.shape[0]:
        raise ValueError("duplicate node ids")
    new_id = np.full(g.node_count, -1, np.int64)
    new_id[nodes] = np.arange(nodes.shape[0])
    s, d, w = g.edge_array()
    keep = (new_id[s] >= 0) & (new_id[d] >= 0)
    feats = None
    if g.node_features is not None:
        feats = g.node_features[nodes]
    return build_graph(new_id[s[keep]], new_id[d[keep]], w[keep],
                       num_nodes=nodes.shape[0],
                       node_ids=g.node_ids[nodes], node_features=feats)
