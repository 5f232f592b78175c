"""Link scoring on enclosing subgraphs with a twin-tower GNN.

A pair (a, b) is scored from the subgraph around both endpoints: nodes
carry their input features plus a structural role, the one-hot of
(distance to a, distance to b) capped at k+1. K rounds of mean
aggregation and a relu produce endpoint embeddings, and a logistic
head reads the concatenated pair, averaged over both orderings so the
score is symmetric.

Everything trains with hand-written gradients in double precision; no
autograd dependency. For k_hops=1 with uncapped neighborhoods the
whole pipeline collapses to closed-form batched matrix algebra (the
role counts around an edge are determined by degrees and the common
neighbor count), which is what makes million-edge scoring cheap. The
general path extracts one subgraph per pair and is kept as the
reference the fast path is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy import stats as sps

from . import _kernels
from .graphs import SocialGraph, LabelGraph, label_edges_in_graph


class DivergenceError(RuntimeError):
    """Training produced a non-finite loss."""


# ---------------------------------------------------------------------------
# enclosing subgraphs and node roles


@dataclass
class EnclosingSubgraph:
    """Induced subgraph around a target pair, with role distances.

    Distances are measured in the full graph before any downsampling,
    capped at k+1 (the cap value doubles as 'far/unreached').
    """

    nodes: np.ndarray  # (s,) global ids; nodes[0] == a, nodes[1] == b
    indptr: np.ndarray  # local CSR over 0..s-1
    indices: np.ndarray
    dist_a: np.ndarray  # (s,) int32 capped at k+1
    dist_b: np.ndarray
    k_hops: int

    @property
    def size(self) -> int:
        return self.nodes.shape[0]


def node_label_index(d_a: int, d_b: int, k: int) -> int:
    """Role id of a node at capped distances (d_a, d_b) from the targets."""
    cap = k + 1
    if not (0 <= d_a <= cap and 0 <= d_b <= cap):
        raise ValueError("distance outside [0, k+1]")
    return d_a * (k + 2) + d_b


def node_label(d_a: int, d_b: int, k: int) -> np.ndarray:
    """One-hot role vector, dimension (k+2)**2."""
    v = np.zeros((k + 2) * (k + 2), np.float64)
    v[node_label_index(d_a, d_b, k)] = 1.0
    return v


def extract_enclosing_subgraph(g: SocialGraph, a: int, b: int, k_hops: int,
                               max_nodes: int | None = 512,
                               seed: int = 0) -> EnclosingSubgraph:
    """Union of the k-hop balls around a and b.

    Above max_nodes the non-target nodes are downsampled uniformly with
    a seed derived from (seed, a, b), so extraction is reproducible and
    independent of call order.
    """
    if a == b:
        raise ValueError("target endpoints must differ")
    if k_hops < 1:
        raise ValueError("k_hops must be >= 1")
    n = g.node_count
    if not (0 <= a < n and 0 <= b < n):
        raise ValueError("target endpoint out of range")
    cap = k_hops + 1
    da = _kernels.bfs_distances_capped(g.indptr, g.indices, a, cap)
    db = _kernels.bfs_distances_capped(g.indptr, g.indices, b, cap)
    member = ((da >= 0) & (da <= k_hops)) | ((db >= 0) & (db <= k_hops))
    member[a] = True
    member[b] = True
    nodes = np.flatnonzero(member)
    nodes = nodes[(nodes != a) & (nodes != b)]
    if max_nodes is not None:
        if max_nodes < 2:
            raise ValueError("max_nodes must be >= 2")
        if nodes.shape[0] > max_nodes - 2:
            rng = np.random.default_rng([seed, a, b])
            nodes = np.sort(rng.choice(nodes, size=max_nodes - 2,
                                       replace=False))
    nodes = np.concatenate(([a, b], nodes)).astype(np.int64)

    local = np.full(n, -1, np.int64)
    local[nodes] = np.arange(nodes.shape[0])
    src_l = []
    dst_l = []
    for i, v in enumerate(nodes):
        nbrs = g.indices[g.indptr[v]:g.indptr[v + 1]]
        loc = local[nbrs]
        keep = loc >= 0
        src_l.append(np.full(int(keep.sum()), i, np.int64))
        dst_l.append(loc[keep])
    src = np.concatenate(src_l) if src_l else np.empty(0, np.int64)
    dst = np.concatenate(dst_l) if dst_l else np.empty(0, np.int64)
    s = nodes.shape[0]
    order = np.lexsort((dst, src))
    indptr = np.zeros(s + 1, np.int64)
    np.cumsum(np.bincount(src, minlength=s), out=indptr[1:])
    d_a = np.where(da[nodes] < 0, cap, da[nodes]).astype(np.int32)
    d_b = np.where(db[nodes] < 0, cap, db[nodes]).astype(np.int32)
    return EnclosingSubgraph(nodes=nodes, indptr=indptr,
                             indices=dst[order].astype(np.int32),
                             dist_a=d_a, dist_b=d_b, k_hops=k_hops)


# ---------------------------------------------------------------------------
# model


@dataclass
class LinkModel:
    """Twin-tower mean-aggregation GNN with a symmetric logistic head."""

    layers: list  # W_l arrays, shape (d_l, d_{l-1})
    head_w: np.ndarray  # (2 * d_K,)
    head_b: float
    k_hops: int
    feature_dim: int
    use_labels: bool

    @property
    def label_dim(self) -> int:
        return (self.k_hops + 2) ** 2 if self.use_labels else 0

    @property
    def input_dim(self) -> int:
        return self.feature_dim + self.label_dim

    def params(self) -> list:
        return list(self.layers) + [self.head_w,
                                    np.array([self.head_b])]

    def set_params(self, params: list) -> None:
        k = len(self.layers)
        self.layers = [p.copy() for p in params[:k]]
        self.head_w = params[k].copy()
        self.head_b = float(params[k + 1][0])


@dataclass
class PairwiseMlp:
    """Feature-only baseline: an MLP on [x_a; x_b], order-averaged."""

    layers: list  # W_l (d_l, d_{l-1}) with first d_0 = 2 * feature_dim
    biases: list  # b_l (d_l,)
    head_w: np.ndarray
    head_b: float
    feature_dim: int

    def params(self) -> list:
        return list(self.layers) + list(self.biases) \
            + [self.head_w, np.array([self.head_b])]

    def set_params(self, params: list) -> None:
        k = len(self.layers)
        self.layers = [p.copy() for p in params[:k]]
        self.biases = [p.copy() for p in params[k:2 * k]]
        self.head_w = params[2 * k].copy()
        self.head_b = float(params[2 * k + 1][0])


def init_link_model(feature_dim: int, k_hops: int = 1, width: int = 32,
                    use_labels: bool = True, *, seed: int) -> LinkModel:
    if k_hops < 1:
        raise ValueError("k_hops must be >= 1")
    if width < 1:
        raise ValueError("width must be >= 1")
    rng = np.random.default_rng(seed)
    d_in = feature_dim + ((k_hops + 2) ** 2 if use_labels else 0)
    if d_in == 0:
        raise ValueError("model needs features or labels")
    dims = [d_in] + [width] * k_hops
    layers = [rng.normal(0.0, np.sqrt(2.0 / dims[i]),
                         size=(dims[i + 1], dims[i]))
              for i in range(k_hops)]
    head_w = rng.normal(0.0, 1.0 / np.sqrt(2 * width), size=2 * width)
    return LinkModel(layers=layers, head_w=head_w, head_b=0.0,
                     k_hops=k_hops, feature_dim=feature_dim,
                     use_labels=use_labels)


def init_pair_mlp(feature_dim: int, widths=(32, 16), *,
                  seed: int) -> PairwiseMlp:
    if feature_dim < 1:
        raise ValueError("pair baseline needs node features")
    rng = np.random.default_rng(seed)
    dims = [2 * feature_dim] + list(widths)
    layers = [rng.normal(0.0, np.sqrt(2.0 / dims[i]),
                         size=(dims[i + 1], dims[i]))
              for i in range(len(widths))]
    biases = [np.zeros(d) for d in dims[1:]]
    head_w = rng.normal(0.0, 1.0 / np.sqrt(dims[-1]), size=dims[-1])
    return PairwiseMlp(layers=layers, biases=biases, head_w=head_w,
                       head_b=0.0, feature_dim=feature_dim)


def _sigmoid(x):
    out = np.empty_like(x, dtype=np.float64)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _features_for(g: SocialGraph, model) -> np.ndarray:
    if model.feature_dim == 0:
        return np.zeros((g.node_count, 0), np.float64)
    if g.node_features is None:
        raise ValueError("model expects node features the graph lacks")
    if g.node_features.shape[1] != model.feature_dim:
        raise ValueError("feature dimension mismatch")
    return g.node_features.astype(np.float64, copy=False)


# ---------------------------------------------------------------------------
# reference per-subgraph forward/backward (any k)


def _subgraph_inputs(model: LinkModel, sg: EnclosingSubgraph,
                     feats: np.ndarray) -> np.ndarray:
    parts = [feats[sg.nodes]]
    if model.use_labels:
        side = model.k_hops + 2
        onehot = np.zeros((sg.size, side * side), np.float64)
        onehot[np.arange(sg.size),
               sg.dist_a.astype(np.int64) * side + sg.dist_b] = 1.0
        parts.append(onehot)
    return np.concatenate(parts, axis=1)


def _mean_agg_matrix(sg: EnclosingSubgraph) -> np.ndarray:
    s = sg.size
    m = np.zeros((s, s), np.float64)
    rows = np.repeat(np.arange(s), np.diff(sg.indptr))
    m[rows, sg.indices] = 1.0
    m[np.arange(s), np.arange(s)] = 1.0
    return m / m.sum(axis=1, keepdims=True)


def forward(model: LinkModel, sg: EnclosingSubgraph, g: SocialGraph) -> float:
    """Probability that the target pair of sg is a true link."""
    feats = _features_for(g, model)
    p, _ = _forward_cached(model, sg, feats)
    return float(p)


def _forward_cached(model: LinkModel, sg: EnclosingSubgraph,
                    feats: np.ndarray):
    x = _subgraph_inputs(model, sg, feats)
    m = _mean_agg_matrix(sg)
    hs = [x]
    zs = []
    h = x
    for w in model.layers:
        z_in = m @ h
        zs.append(z_in)
        h = np.maximum(z_in @ w.T, 0.0)
        hs.append(h)
    d_k = model.layers[-1].shape[0]
    wsum = model.head_w[:d_k] + model.head_w[d_k:]
    logit = 0.5 * float((h[0] + h[1]) @ wsum) + model.head_b
    p = _sigmoid(np.array([logit]))[0]
    return p, (m, hs, zs)


def _backward_pair(model: LinkModel, cache, dlogit: float):
    """Gradients of (dlogit * logit) w.r.t. model params, one pair."""
    m, hs, zs = cache
    d_k = model.layers[-1].shape[0]
    h_top = hs[-1]
    pair_sum = h_top[0] + h_top[1]
    g_head_w = 0.5 * dlogit * np.concatenate([pair_sum, pair_sum])
    g_head_b = dlogit
    wsum = model.head_w[:d_k] + model.head_w[d_k:]
    g_h = np.zeros_like(h_top)
    g_h[0] = 0.5 * dlogit * wsum
    g_h[1] = 0.5 * dlogit * wsum
    g_layers = [None] * len(model.layers)
    for li in range(len(model.layers) - 1, -1, -1):
        w = model.layers[li]
        dz_out = g_h * (hs[li + 1] > 0)
        g_layers[li] = dz_out.T @ zs[li]
        if li > 0:
            g_h = m.T @ (dz_out @ w)
    return g_layers, g_head_w, g_head_b


# ---------------------------------------------------------------------------
# closed-form k=1 batch path


def _feature_sums(g: SocialGraph, feats: np.ndarray) -> np.ndarray:
    """F_sum[v] = x_v + sum of x_u over G-neighbors of v."""
    if feats.shape[1] == 0:
        return np.zeros((g.node_count, 0), np.float64)
    adj = sp.csr_matrix((np.ones(g.indices.shape[0]), g.indices, g.indptr),
                        shape=(g.node_count, g.node_count))
    return feats + adj @ feats


def _k1_inputs(model: LinkModel, g: SocialGraph, feats, f_sum,
               pairs: np.ndarray):
    """Aggregated tower inputs (z_a, z_b) for G-edge pairs, k_hops=1.

    Valid because for an adjacent pair the 1-hop union subgraph keeps
    every neighbor of both endpoints, so role counts around a are
    exactly: b at (1,0), itself at (0,1), cn common neighbors at
    (1,1), and the remaining deg_a-1-cn at (1,2); symmetrically for b
    with (2,1). Distant roles never enter the mean.
    """
    a = pairs[:, 0].astype(np.int32)
    b = pairs[:, 1].astype(np.int32)
    deg = g.degrees
    cn = _kernels.common_neighbor_counts(g.indptr, g.indices, a, b)
    cn = cn.astype(np.float64)
    deg_a = deg[a].astype(np.float64)
    deg_b = deg[b].astype(np.float64)
    d_in = model.input_dim
    z_a = np.zeros((pairs.shape[0], d_in), np.float64)
    z_b = np.zeros((pairs.shape[0], d_in), np.float64)
    nf = model.feature_dim
    if nf:
        z_a[:, :nf] = f_sum[a]
        z_b[:, :nf] = f_sum[b]
    if model.use_labels:
        # role ids in the 3x3 grid: (0,1)=1 (1,0)=3 (1,1)=4 (1,2)=5 (2,1)=7
        z_a[:, nf + 1] = 1.0
        z_a[:, nf + 3] = 1.0
        z_a[:, nf + 4] = cn
        z_a[:, nf + 5] = deg_a - 1.0 - cn
        z_b[:, nf + 1] = 1.0
        z_b[:, nf + 3] = 1.0
        z_b[:, nf + 4] = cn
        z_b[:, nf + 7] = deg_b - 1.0 - cn
    z_a /= (deg_a + 1.0)[:, None]
    z_b /= (deg_b + 1.0)[:, None]
    return z_a, z_b


def _k1_logits(model: LinkModel, z_a, z_b):
    w1 = model.layers[0]
    h_a = np.maximum(z_a @ w1.T, 0.0)
    h_b = np.maximum(z_b @ w1.T, 0.0)
    d_k = w1.shape[0]
    wsum = model.head_w[:d_k] + model.head_w[d_k:]
    return 0.5 * (h_a + h_b) @ wsum + model.head_b, h_a, h_b


# ---------------------------------------------------------------------------
# scoring


def score_pairs(model, g: SocialGraph, pairs, max_nodes: int | None = None,
                seed: int = 0, chunk: int = 200_000) -> np.ndarray:
    """Link probabilities for (m, 2) node pairs.

    LinkModel with k_hops=1 and uncapped neighborhoods runs the batched
    closed form, which only applies to adjacent pairs (training and
    edge scoring only ever see G-edges); anything else walks pairs
    through per-subgraph forwards.
    """
    pairs = np.asarray(pairs)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("pairs must have shape (m, 2)")
    feats = _features_for(g, model)
    if isinstance(model, PairwiseMlp):
        out = np.empty(pairs.shape[0], np.float64)
        for s in range(0, pairs.shape[0], chunk):
            pc = pairs[s:s + chunk]
            logits, _ = _mlp_logits(model, feats[pc[:, 0]], feats[pc[:, 1]])
            out[s:s + chunk] = _sigmoid(logits)
        return out
    if model.k_hops == 1 and max_nodes is None:
        _require_edges(g, pairs)
        return _score_pairs_k1(model, g, feats, pairs, chunk)
    out = np.empty(pairs.shape[0], np.float64)
    for i, (a, b) in enumerate(pairs):
        sg = extract_enclosing_subgraph(g, int(a), int(b), model.k_hops,
                                        max_nodes=max_nodes, seed=seed)
        p, _ = _forward_cached(model, sg, feats)
        out[i] = p
    return out


def _score_pairs_k1(model: LinkModel, g, feats, pairs,
                    chunk=200_000) -> np.ndarray:
    f_sum = _feature_sums(g, feats)
    out = np.empty(pairs.shape[0], np.float64)
    for s in range(0, pairs.shape[0], chunk):
        pc = pairs[s:s + chunk]
        z_a, z_b = _k1_inputs(model, g, feats, f_sum, pc)
        logits, _, _ = _k1_logits(model, z_a, z_b)
        out[s:s + chunk] = _sigmoid(logits)
    return out


def _require_edges(g: SocialGraph, pairs) -> None:
    """The closed form only holds for adjacent pairs; reject the rest."""
    n = g.node_count
    s, d, _ = g.edge_array()
    gkey = s.astype(np.int64) * n + d
    lo = np.minimum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    hi = np.maximum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    pkey = lo * n + hi
    pos = np.searchsorted(gkey, pkey)
    bad = (pos >= gkey.shape[0]) | (gkey[np.minimum(pos, gkey.shape[0] - 1)]
                                    != pkey)
    if bad.any():
        raise ValueError("closed-form scoring needs adjacent pairs; "
                         f"{int(bad.sum())} pairs are not G-edges")


def score_edges(model, g: SocialGraph, max_nodes: int | None = None,
                seed: int = 0) -> np.ndarray:
    """Scores for every edge, aligned with g.edge_array() order."""
    s, d, _ = g.edge_array()
    pairs = np.stack([s, d], axis=1)
    if isinstance(model, LinkModel) and model.k_hops == 1 \
            and max_nodes is None:
        feats = _features_for(g, model)
        return _score_pairs_k1(model, g, feats, pairs)
    return score_pairs(model, g, pairs, max_nodes=max_nodes, seed=seed)


# ---------------------------------------------------------------------------
# pair baseline forward/backward


def _mlp_logits(model: PairwiseMlp, xa, xb):
    caches = []
    acts = []
    for x, y in ((xa, xb), (xb, xa)):
        h = np.concatenate([x, y], axis=1)
        layer_h = [h]
        for w, b in zip(model.layers, model.biases):
            h = np.maximum(h @ w.T + b, 0.0)
            layer_h.append(h)
        acts.append(layer_h)
        caches.append(h)
    logit = 0.5 * ((caches[0] + caches[1]) @ model.head_w) + model.head_b
    return logit, acts


def _mlp_backward(model: PairwiseMlp, acts, dlogit):
    g_layers = [np.zeros_like(w) for w in model.layers]
    g_biases = [np.zeros_like(b) for b in model.biases]
    top = acts[0][-1] + acts[1][-1]
    g_head_w = 0.5 * (dlogit @ top)
    g_head_b = float(dlogit.sum())
    for branch in range(2):
        layer_h = acts[branch]
        g_h = 0.5 * np.outer(dlogit, model.head_w)
        for li in range(len(model.layers) - 1, -1, -1):
            dz = g_h * (layer_h[li + 1] > 0)
            g_layers[li] += dz.T @ layer_h[li]
            g_biases[li] += dz.sum(axis=0)
            g_h = dz @ model.layers[li]
    return g_layers, g_biases, g_head_w, g_head_b


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainingSet:
    """Positive (realized) and negative (quiet) G-edges, internal ids."""

    pos: np.ndarray  # (p, 2) int32
    neg: np.ndarray  # (q, 2) int32

    @property
    def pairs(self) -> np.ndarray:
        return np.concatenate([self.pos, self.neg], axis=0)

    @property
    def labels(self) -> np.ndarray:
        return np.concatenate([np.ones(self.pos.shape[0]),
                               np.zeros(self.neg.shape[0])])


def build_training_set(g: SocialGraph, labels: LabelGraph,
                       neg_ratio: float = 1.0, *, seed: int,
                       max_pairs: int | None = None) -> TrainingSet:
    """Positives are realized label edges; negatives sample the quiet rest.

    Every label edge must exist in g. Negatives are drawn without
    replacement from G-edges that never realized, neg_ratio per
    positive (fewer when the graph runs out). max_pairs caps the
    positives (seeded subsample) to bound training cost.
    """
    if labels.edge_count == 0:
        raise ValueError("empty label graph, nothing to train on")
    in_g = label_edges_in_graph(g, labels)
    if not in_g.all():
        raise ValueError(f"{int((~in_g).sum())} label edges missing from "
                         "the social graph")
    rng = np.random.default_rng(seed)
    pos = np.stack([labels.src, labels.dst], axis=1).astype(np.int32)
    if max_pairs is not None and pos.shape[0] > max_pairs:
        pick = rng.choice(pos.shape[0], size=max_pairs, replace=False)
        pos = pos[np.sort(pick)]
    s, d, _ = g.edge_array()
    n = g.node_count
    gkey = s.astype(np.int64) * n + d
    lkey = labels.src.astype(np.int64) * n + labels.dst
    quiet = ~np.isin(gkey, lkey, assume_unique=True)
    cand = np.flatnonzero(quiet)
    want = int(round(neg_ratio * pos.shape[0]))
    want = min(want, cand.shape[0])
    if want == 0:
        raise ValueError("no negative candidates available")
    pick = rng.choice(cand, size=want, replace=False)
    pick = np.sort(pick)
    neg = np.stack([s[pick], d[pick]], axis=1).astype(np.int32)
    return TrainingSet(pos=pos, neg=neg)


def split_training_set(ts: TrainingSet, test_fraction: float, *,
                       seed: int) -> tuple[TrainingSet, TrainingSet]:
    """Seeded disjoint train/test split, stratified by class."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)

    def cut(arr):
        k = arr.shape[0]
        n_test = max(1, int(round(test_fraction * k)))
        if n_test >= k:
            raise ValueError("split leaves an empty side")
        perm = rng.permutation(k)
        return arr[np.sort(perm[n_test:])], arr[np.sort(perm[:n_test])]

    pos_tr, pos_te = cut(ts.pos)
    neg_tr, neg_te = cut(ts.neg)
    return TrainingSet(pos_tr, neg_tr), TrainingSet(pos_te, neg_te)


@dataclass
class TrainConfig:
    k_hops: int = 1
    width: int = 32
    use_labels: bool = True
    epochs: int = 5
    batch_size: int = 256
    step_size: float = 1e-3
    max_nodes: int | None = None  # None: k=1 closed form, exact
    mlp_widths: tuple = (32, 16)

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")


@dataclass
class TrainResult:
    model: object
    loss_trace: np.ndarray  # per-epoch mean training loss
    val_auc: float = float("nan")


class _Adam:
    def __init__(self, params, step):
        self.step = step
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def update(self, params, grads):
        self.t += 1
        b1, b2, eps = 0.9, 0.999, 1e-8
        c1 = 1.0 - b1 ** self.t
        c2 = 1.0 - b2 ** self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            p -= self.step * (m / c1) / (np.sqrt(v / c2) + eps)


def _bce_and_dlogit(logits, y):
    p = _sigmoid(logits)
    eps = 1e-12
    loss = -(y * np.log(p + eps) + (1 - y) * np.log(1 - p + eps)).mean()
    return loss, (p - y) / y.shape[0]


def train(ts: TrainingSet, g: SocialGraph, config: TrainConfig | None = None,
          *, seed: int) -> TrainResult:
    """Fit a LinkModel on the training set with Adam-style updates.

    Raises DivergenceError the moment a batch loss goes non-finite.
    """
    if config is None:
        config = TrainConfig()
    feats = _features_for_dim(g)
    model = init_link_model(feats.shape[1], config.k_hops, config.width,
                            config.use_labels, seed=seed)
    rng = np.random.default_rng([seed, 1])
    pairs = ts.pairs
    y = ts.labels
    fast = config.k_hops == 1 and config.max_nodes is None
    if fast:
        _require_edges(g, pairs)
        f_sum = _feature_sums(g, feats)
        z_a, z_b = _k1_inputs(model, g, feats, f_sum, pairs)
    opt = _Adam(model.params(), config.step_size)
    params = model.params()
    losses = []
    for _epoch in range(config.epochs):
        perm = rng.permutation(pairs.shape[0])
        epoch_loss = 0.0
        nb = 0
        for s in range(0, pairs.shape[0], config.batch_size):
            idx = perm[s:s + config.batch_size]
            if fast:
                loss, grads = _k1_loss_and_grads(model, z_a[idx], z_b[idx],
                                                 y[idx])
            else:
                loss, grads = _subgraph_loss_and_grads(model, g, feats,
                                                       pairs[idx], y[idx],
                                                       config.max_nodes,
                                                       seed)
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at step {opt.t}")
            opt.update(params, grads)
            _write_back(model, params)
            epoch_loss += loss
            nb += 1
        losses.append(epoch_loss / max(nb, 1))
    return TrainResult(model=model, loss_trace=np.asarray(losses))


def _features_for_dim(g: SocialGraph) -> np.ndarray:
    if g.node_features is None:
        return np.zeros((g.node_count, 0), np.float64)
    return g.node_features.astype(np.float64, copy=False)


def _write_back(model, params) -> None:
    if isinstance(model, LinkModel):
        k = len(model.layers)
        model.layers = params[:k]
        model.head_w = params[k]
        model.head_b = float(params[k + 1][0])
    else:
        k = len(model.layers)
        model.layers = params[:k]
        model.biases = params[k:2 * k]
        model.head_w = params[2 * k]
        model.head_b = float(params[2 * k + 1][0])


def _k1_loss_and_grads(model: LinkModel, z_a, z_b, y):
    w1 = model.layers[0]
    h_a = np.maximum(z_a @ w1.T, 0.0)
    h_b = np.maximum(z_b @ w1.T, 0.0)
    d_k = w1.shape[0]
    wsum = model.head_w[:d_k] + model.head_w[d_k:]
    logits = 0.5 * (h_a + h_b) @ wsum + model.head_b
    loss, dlogit = _bce_and_dlogit(logits, y)
    top = h_a + h_b
    g_head_half = 0.5 * (dlogit @ top)
    g_head_w = np.concatenate([g_head_half, g_head_half])
    g_head_b = np.array([dlogit.sum()])
    g_h = 0.5 * np.outer(dlogit, wsum)
    dza = g_h * (h_a > 0)
    dzb = g_h * (h_b > 0)
    g_w1 = dza.T @ z_a + dzb.T @ z_b
    return loss, [g_w1, g_head_w, g_head_b]


def _subgraph_loss_and_grads(model: LinkModel, g, feats, pairs, y,
                             max_nodes, seed):
    g_layers = [np.zeros_like(w) for w in model.layers]
    g_head_w = np.zeros_like(model.head_w)
    g_head_b = 0.0
    total = 0.0
    b = pairs.shape[0]
    for i in range(b):
        sg = extract_enclosing_subgraph(g, int(pairs[i, 0]),
                                        int(pairs[i, 1]), model.k_hops,
                                        max_nodes=max_nodes, seed=seed)
        p, cache = _forward_cached(model, sg, feats)
        eps = 1e-12
        total += -(y[i] * np.log(p + eps) + (1 - y[i]) * np.log(1 - p + eps))
        gl, gw, gb = _backward_pair(model, cache, (p - y[i]) / b)
        for acc, term in zip(g_layers, gl):
            acc += term
        g_head_w += gw
        g_head_b += gb
    return total / b, g_layers + [g_head_w, np.array([g_head_b])]


def train_pair_baseline(ts: TrainingSet, g: SocialGraph,
                        config: TrainConfig | None = None, *,
                        seed: int) -> TrainResult:
    """Fit the feature-only MLP baseline on the same pair task."""
    if config is None:
        config = TrainConfig()
    feats = _features_for_dim(g)
    model = init_pair_mlp(feats.shape[1], config.mlp_widths, seed=seed)
    rng = np.random.default_rng([seed, 1])
    pairs = ts.pairs
    y = ts.labels
    xa = feats[pairs[:, 0]]
    xb = feats[pairs[:, 1]]
    params = model.params()
    opt = _Adam(params, config.step_size)
    losses = []
    for _epoch in range(config.epochs):
        perm = rng.permutation(pairs.shape[0])
        epoch_loss = 0.0
        nb = 0
        for s in range(0, pairs.shape[0], config.batch_size):
            idx = perm[s:s + config.batch_size]
            logits, acts = _mlp_logits(model, xa[idx], xb[idx])
            loss, dlogit = _bce_and_dlogit(logits, y[idx])
            if not np.isfinite(loss):
                raise DivergenceError(f"non-finite loss at step {opt.t}")
            gl, gb, gw, ghb = _mlp_backward(model, acts, dlogit)
            opt.update(params, gl + gb + [gw, np.array([ghb])])
            _write_back(model, params)
            epoch_loss += loss
            nb += 1
        losses.append(epoch_loss / max(nb, 1))
    return TrainResult(model=model, loss_trace=np.asarray(losses))


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class ClassifierMetrics:
    auc: float
    f1: float
    ks: float


def evaluate_classifier(scores, y_true) -> ClassifierMetrics:
    """Rank AUC, F1 at threshold 0.5 (ties predicted positive), and the
    Kolmogorov-Smirnov separation of the two score distributions."""
    scores = np.asarray(scores, np.float64)
    y = np.asarray(y_true).astype(bool)
    if scores.shape != y.shape:
        raise ValueError("scores/labels length mismatch")
    n_pos = int(y.sum())
    n_neg = y.shape[0] - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("evaluation needs both classes")
    ranks = sps.rankdata(scores)
    auc = (ranks[y].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)
    pred = scores >= 0.5
    tp = int((pred & y).sum())
    fp = int((pred & ~y).sum())
    fn = int((~pred & y).sum())
    f1 = 2.0 * tp / (2 * tp + fp + fn) if (2 * tp + fp + fn) else 0.0
    xs = np.sort(scores[y])
    ys = np.sort(scores[~y])
    grid = np.unique(scores)
    cdf_p = np.searchsorted(xs, grid, side="right") / n_pos
    cdf_n = np.searchsorted(ys, grid, side="right") / n_neg
    ks = float(np.abs(cdf_p - cdf_n).max())
    return ClassifierMetrics(auc=float(auc), f1=float(f1), ks=ks)


# ---------------------------------------------------------------------------
# serialization


def model_to_dict(model) -> dict:
    if isinstance(model, LinkModel):
        return {
            "kind": "gnn",
            "k_hops": model.k_hops,
            "feature_dim": model.feature_dim,
            "use_labels": model.use_labels,
            "layers": [w.tolist() for w in model.layers],
            "head_w": model.head_w.tolist(),
            "head_b": model.head_b,
        }
    return {
        "kind": "pair_mlp",
        "feature_dim": model.feature_dim,
        "layers": [w.tolist() for w in model.layers],
        "biases": [b.tolist() for b in model.biases],
        "head_w": model.head_w.tolist(),
        "head_b": model.head_b,
    }


def model_from_dict(d: dict):
    kind = d.get("kind")
    if kind == "gnn":
        return LinkModel(
            layers=[np.asarray(w, np.float64) for w in d["layers"]],
            head_w=np.asarray(d["head_w"], np.float64),
            head_b=float(d["head_b"]), k_hops=int(d["k_hops"]),
            feature_dim=int(d["feature_dim"]),
            use_labels=bool(d["use_labels"]))
    if kind == "pair_mlp":
        return PairwiseMlp(
            layers=[np.asarray(w, np.float64) for w in d["layers"]],
            biases=[np.asarray(b, np.float64) for b in d["biases"]],
            head_w=np.asarray(d["head_w"], np.float64),
            head_b=float(d["head_b"]), feature_dim=int(d["feature_dim"]))
    raise ValueError(f"unknown model kind: {kind!r}")
