"""Synthetic social graphs and an invitation campaign with ground truth.

The simulator is the package's referee: it grows a graph whose
community structure and hubs are known, runs a viral invitation
campaign over it day by day, and draws counterfactual outcomes for the
two global policies (everyone treated, everyone control) with common
random numbers. That gives every experiment design a true effect to be
judged against.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from . import _kernels
from .assignment import (GroupAssignment, group_traffic_slice, merge_random,
                         user_level_randomization)
from .clustering import (Clustering, ModularityParams, clustering_from_labels,
                         label_propagation, louvain)
from .filtering import filter_by_score, remove_hotspots
from .graphs import LabelGraph, SocialGraph, build_graph, build_label_graph
from .linkpred import TrainConfig, build_training_set, score_edges, train
from .metrics import (ExperimentOutcome, cluster_stats, estimate_ate,
                      estimator_variance, exposure_fractions, interference,
                      true_ate)


def _child_seed(*entropy) -> int:
    """Stable derived seed for a named stage."""
    ints = [int(x) for x in entropy]
    return int(np.random.SeedSequence(ints).generate_state(1)[0])


@dataclass
class GraphGenSpec:
    """Recipe for a synthetic graph.

    model 'preferential_attachment': one growth process, no blocks.
    model 'planted_blocks': binomial intra/cross edges per the two rates.
    model 'hybrid': per-block preferential attachment (hubs live inside
    blocks) plus uniform cross-block noise edges at rate p_out.

    In the hybrid model, community_size > 0 turns each block into a
    coarse district subdivided into tight communities of about that
    size: attachment runs per community, p_in becomes the rate of
    diffuse edges between communities of the same block, and every
    community gets `celebrities` locally famous members each wired to a
    `celebrity_cover` fraction of their community. That layout gives a
    graph whose interaction units (communities) are much finer than its
    outcome districts (blocks), which is how city-scale populations
    behave.
    """

    model: str
    n: int
    m: int = 3  # attachment edges per node
    blocks: int = 1
    p_in: float = 0.05
    p_out: float = 1e-5
    feature_dim: int = 8
    feature_noise: float = 1.0
    community_size: int = 0
    celebrities: int = 0
    celebrity_cover: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.model not in ("preferential_attachment", "planted_blocks",
                              "hybrid"):
            raise ValueError(f"unknown graph model: {self.model!r}")
        if self.n < 3:
            raise ValueError("n must be >= 3")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.blocks < 1:
            raise ValueError("blocks must be >= 1")
        if not (0.0 <= self.p_in <= 1.0 and 0.0 <= self.p_out <= 1.0):
            raise ValueError("rates must lie in [0, 1]")
        if self.feature_dim < 0:
            raise ValueError("feature_dim must be >= 0")
        if self.community_size < 0 or self.celebrities < 0:
            raise ValueError("community_size and celebrities must be >= 0")
        if not 0.0 <= self.celebrity_cover <= 1.0:
            raise ValueError("celebrity_cover must lie in [0, 1]")
        if self.community_size and self.model != "hybrid":
            raise ValueError("community_size only applies to hybrid graphs")


@dataclass
class GeneratedGraph:
    graph: SocialGraph
    blocks: np.ndarray | None  # (n,) int32 planted block per node, or None
    communities: np.ndarray | None = None  # (n,) int32 fine units, or None

    def __post_init__(self):
        if self.communities is None:
            self.communities = self.blocks


def _block_sizes(n: int, blocks: int) -> np.ndarray:
    sizes = np.full(blocks, n // blocks, np.int64)
    sizes[:n % blocks] += 1
    return sizes


def _cross_noise_edges(n, blocks_of, p_out, rng):
    """Uniform node pairs kept when they straddle blocks."""
    sizes = np.bincount(blocks_of)
    cross_pairs = (n * (n - 1) - int((sizes * (sizes - 1)).sum())) // 2
    want = rng.binomial(cross_pairs, p_out) if cross_pairs > 0 else 0
    us, vs = [], []
    got = 0
    while got < want:
        k = int((want - got) * 1.1) + 16
        u = rng.integers(0, n, k)
        v = rng.integers(0, n, k)
        ok = (u != v) & (blocks_of[u] != blocks_of[v])
        u, v = u[ok], v[ok]
        take = min(want - got, u.shape[0])
        us.append(u[:take])
        vs.append(v[:take])
        got += take
    if not us:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(us), np.concatenate(vs)


def _intra_block_binomial(starts, sizes, p_in, rng):
    us, vs = [], []
    for b in range(sizes.shape[0]):
        s = int(sizes[b])
        if s < 2:
            continue
        pairs = s * (s - 1) // 2
        cnt = rng.binomial(pairs, p_in)
        if cnt == 0:
            continue
        u = rng.integers(0, s, cnt)
        v = rng.integers(0, s, cnt)
        ok = u != v
        us.append(u[ok] + starts[b])
        vs.append(v[ok] + starts[b])
    if not us:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(us), np.concatenate(vs)


def _celebrity_edges(start, size, count, cover, rng):
    """Wire the first `count` members of a community to random others."""
    us, vs = [], []
    members = np.arange(start, start + size, dtype=np.int64)
    fans = int(round(cover * (size - 1)))
    for c in range(min(count, size)):
        celeb = start + c
        others = members[members != celeb]
        picked = rng.choice(others, size=min(fans, others.shape[0]),
                            replace=False)
        us.append(np.full(picked.shape[0], celeb, dtype=np.int64))
        vs.append(picked)
    if not us:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    return np.concatenate(us), np.concatenate(vs)


def _hybrid_community_edges(spec, starts, sizes, rng):
    """Attachment per community plus diffuse same-block pair noise.

    Returns the edge endpoints and the global community id per node.
    """
    comms_of = np.empty(int(sizes.sum()), dtype=np.int32)
    us, vs = [], []
    next_comm = 0
    for b in range(spec.blocks):
        bsize = int(sizes[b])
        bstart = int(starts[b])
        n_comm = max(1, int(round(bsize / spec.community_size)))
        csizes = _block_sizes(bsize, n_comm)
        if int(csizes.min()) <= spec.m:
            raise ValueError("hybrid needs every community larger than m")
        cstarts = bstart + np.concatenate(([0], np.cumsum(csizes)[:-1]))
        for ci in range(n_comm):
            cs, cn = int(cstarts[ci]), int(csizes[ci])
            comms_of[cs:cs + cn] = next_comm
            next_comm += 1
            bs, bd = _kernels.ba_edges(cn, spec.m,
                                       _child_seed(spec.seed, 2, b, ci))
            us.append(bs.astype(np.int64) + cs)
            vs.append(bd.astype(np.int64) + cs)
            if spec.celebrities > 0 and spec.celebrity_cover > 0:
                fu, fv = _celebrity_edges(cs, cn, spec.celebrities,
                                          spec.celebrity_cover, rng)
                us.append(fu)
                vs.append(fv)
        # diffuse acquaintance edges between communities of this block
        cross_pairs = (bsize * (bsize - 1)
                       - int((csizes * (csizes - 1)).sum())) // 2
        want = rng.binomial(cross_pairs, spec.p_in) if cross_pairs else 0
        got = 0
        while got < want:
            k = int((want - got) * 1.2) + 16
            u = rng.integers(bstart, bstart + bsize, k)
            v = rng.integers(bstart, bstart + bsize, k)
            ok = comms_of[u] != comms_of[v]
            u, v = u[ok], v[ok]
            take = min(want - got, u.shape[0])
            us.append(u[:take])
            vs.append(v[:take])
            got += take
    return np.concatenate(us), np.concatenate(vs), comms_of


def generate_graph(spec: GraphGenSpec) -> GeneratedGraph:
    """Grow the graph, then attach features.

    Features are the node's block centroid plus isotropic noise, with
    channel 0 nudged by standardized log-degree, so they correlate with
    both the planted structure and the degree sequence.
    """
    rng = np.random.default_rng([spec.seed, 101])
    comms_of = None
    if spec.model == "preferential_attachment":
        if spec.n <= spec.m:
            raise ValueError("preferential attachment needs n > m")
        src, dst = _kernels.ba_edges(spec.n, spec.m,
                                     _child_seed(spec.seed, 1))
        blocks_of = None
        src = src.astype(np.int64)
        dst = dst.astype(np.int64)
    else:
        sizes = _block_sizes(spec.n, spec.blocks)
        starts = np.concatenate(([0], np.cumsum(sizes)[:-1]))
        blocks_of = np.repeat(np.arange(spec.blocks, dtype=np.int32), sizes)
        if spec.model == "planted_blocks":
            iu, iv = _intra_block_binomial(starts, sizes, spec.p_in, rng)
        elif spec.community_size:  # hybrid with fine communities
            iu, iv, comms_of = _hybrid_community_edges(spec, starts, sizes,
                                                       rng)
        else:  # hybrid: preferential attachment inside each block
            if int(sizes.min()) <= spec.m:
                raise ValueError("hybrid needs every block larger than m")
            ius, ivs = [], []
            for b in range(spec.blocks):
                bs, bd = _kernels.ba_edges(int(sizes[b]), spec.m,
                                           _child_seed(spec.seed, 2, b))
                ius.append(bs.astype(np.int64) + starts[b])
                ivs.append(bd.astype(np.int64) + starts[b])
            iu = np.concatenate(ius)
            iv = np.concatenate(ivs)
        cu, cv = _cross_noise_edges(spec.n, blocks_of, spec.p_out, rng)
        src = np.concatenate([iu, cu])
        dst = np.concatenate([iv, cv])
    g = build_graph(src, dst, num_nodes=spec.n)
    feats = None
    if spec.feature_dim > 0:
        frng = np.random.default_rng([spec.seed, 202])
        feats = frng.normal(0.0, spec.feature_noise,
                            size=(spec.n, spec.feature_dim))
        if blocks_of is not None:
            centers = frng.normal(0.0, 1.0,
                                  size=(spec.blocks, spec.feature_dim))
            feats += centers[blocks_of]
        logdeg = np.log1p(g.degrees.astype(np.float64))
        sd = logdeg.std()
        if sd > 0:
            feats[:, 0] += 0.5 * (logdeg - logdeg.mean()) / sd
        g = build_graph(*g.edge_array(), num_nodes=spec.n,
                        node_features=feats)
    return GeneratedGraph(graph=g, blocks=blocks_of, communities=comms_of)


@dataclass
class ResponseModel:
    """Invitation and outcome mechanics for the campaign.

    Participants invite each G-neighbor daily with probability p_t or
    p_c by their own arm, damped by cross_block_affinity on edges that
    straddle blocks. The outcome adds a direct effect tau for treated
    nodes and an exposure effect g(e) of the treated-neighbor fraction:
    'zero' none, 'linear' scale * e, 'saturating'
    scale * e / (e + shape).
    """

    beta0: float = 1.0
    tau: float = 0.5
    exposure_kind: str = "saturating"
    exposure_scale: float = 2.0
    exposure_shape: float = 0.5
    noise_sd: float = 0.5
    p_t: float = 0.1
    p_c: float = 0.02
    horizon: int = 7
    init_frac: float = 0.02
    cross_block_affinity: float = 1.0
    block_sd: float = 0.0

    def __post_init__(self):
        if self.exposure_kind not in ("zero", "linear", "saturating"):
            raise ValueError(f"unknown exposure kind: {self.exposure_kind!r}")
        for name in ("p_t", "p_c", "init_frac", "cross_block_affinity"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if self.noise_sd < 0 or self.block_sd < 0:
            raise ValueError("noise scales must be nonnegative")

    def exposure_effect(self, e: np.ndarray) -> np.ndarray:
        e = np.asarray(e, np.float64)
        if self.exposure_kind == "zero":
            return np.zeros_like(e)
        if self.exposure_kind == "linear":
            return self.exposure_scale * e
        return self.exposure_scale * e / (e + self.exposure_shape)


@dataclass
class SimRun:
    """One campaign: realized label graph, outcomes, and diagnostics."""

    label: LabelGraph
    outcome: ExperimentOutcome
    exposure: np.ndarray  # observed treated-neighbor fraction
    participants: np.ndarray  # bool, joined by the horizon

    @property
    def true_ate(self) -> float:
        return true_ate(self.outcome)


def simulate_campaign(g: SocialGraph, treated: np.ndarray,
                      response: ResponseModel, *, seed: int,
                      blocks: np.ndarray | None = None,
                      shift_blocks: np.ndarray | None = None) -> SimRun:
    """Run the invitation day loop, then draw outcomes and both arms.

    Counterfactual arms share the same unit-level noise (common random
    numbers): y1 is the everyone-treated world (exposure 1 for any node
    with neighbors), y0 the everyone-control world (exposure 0).

    `blocks` damps invitations on edges that straddle blocks, so it is
    the social-affinity granularity. `shift_blocks` (defaults to
    `blocks`) carries the block_sd baseline shifts, so outcome
    coherence can sit at a coarser level than social affinity, e.g.
    city districts over friend circles.
    """
    n = g.node_count
    treated = np.asarray(treated).astype(bool)
    if treated.shape[0] != n:
        raise ValueError("treated mask length != node count")
    if shift_blocks is None:
        shift_blocks = blocks
    rng = np.random.default_rng([seed, 11])
    participant0 = (rng.random(n) < response.init_frac).astype(np.uint8)
    blocks_arr = blocks.astype(np.int32) if blocks is not None \
        else np.empty(0, np.int32)
    ls, ld, lday, joined = _kernels.simulate_invitations(
        g.indptr, g.indices, treated.astype(np.uint8), participant0,
        blocks_arr, float(response.cross_block_affinity),
        float(response.p_t), float(response.p_c), int(response.horizon),
        _child_seed(seed, 13))
    label = build_label_graph(ls.astype(np.int64), ld.astype(np.int64), lday,
                              response.horizon, n)
    e_obs = exposure_fractions(g, treated)
    orng = np.random.default_rng([seed, 19])
    eps = orng.normal(0.0, 1.0, n)
    shift = np.zeros(n)
    if shift_blocks is not None and response.block_sd > 0:
        brng = np.random.default_rng([seed, 23])
        nblocks = int(shift_blocks.max()) + 1
        shift = response.block_sd * brng.normal(0.0, 1.0, nblocks)[shift_blocks]
    z = treated.astype(np.float64)
    base = response.beta0 + shift + response.noise_sd * eps
    y = base + response.tau * z + response.exposure_effect(e_obs)
    has_nbr = (g.degrees > 0).astype(np.float64)
    y1 = base + response.tau + response.exposure_effect(has_nbr)
    y0 = base + response.exposure_effect(np.zeros(n))
    outcome = ExperimentOutcome(treated=treated, y=y, y0=y0, y1=y1)
    return SimRun(label=label, outcome=outcome, exposure=e_obs,
                  participants=joined.astype(bool))


def geo_synthetic_assignment(g: SocialGraph, regions: int, p: int = 2, *,
                             seed: int, blocks: np.ndarray | None = None,
                             size_sigma: float = 0.0,
                             mode: str = "size_balanced") -> GroupAssignment:
    """Region-level randomization mimicking a geography split.

    Nodes are ordered by planted block (plain index order otherwise)
    and cut into contiguous regions; size_sigma > 0 draws lognormal
    region weights so region sizes spread out the way city sizes do.
    regions == n degenerates to user-level randomization.
    """
    n = g.node_count
    if not 1 <= regions <= n:
        raise ValueError("regions must lie in [1, n]")
    rng = np.random.default_rng([seed, 31])
    order = np.argsort(blocks, kind="stable") if blocks is not None \
        else np.arange(n)
    if size_sigma > 0:
        w = rng.lognormal(0.0, size_sigma, regions)
    else:
        w = np.ones(regions)
    cuts = np.floor(np.cumsum(w) / w.sum() * n).astype(np.int64)
    cuts[-1] = n
    region_of_pos = np.searchsorted(cuts, np.arange(n), side="right")
    region = np.empty(n, np.int64)
    region[order] = region_of_pos
    clustering = clustering_from_labels(region)
    if regions < p:
        raise ValueError(f"fewer regions ({regions}) than groups ({p})")
    return merge_random(clustering, p, seed=_child_seed(seed, 37), mode=mode)


# ---------------------------------------------------------------------------
# the method comparison harness


METHODS = ("user_level", "geo", "oracle_blocks", "lp_louvain",
           "lp_louvain_unit", "hotspot_louvain", "lp_labelprop")


@dataclass
class ComparisonConfig:
    """Everything one comparison sweep needs besides methods and seeds."""

    graph: GraphGenSpec
    response: ResponseModel = field(default_factory=ResponseModel)
    train: TrainConfig = field(default_factory=TrainConfig)
    gamma: float = 0.5
    theta: int = 40
    p: int = 2
    resolution: float = 1.0
    warmup_days: int = 3
    neg_ratio: float = 1.0
    max_train_pairs: int | None = 100_000
    geo_regions: int = 40
    geo_size_sigma: float = 1.5
    slice_fraction: float = 1.0
    assign_mode: str = "size_balanced"


@dataclass
class ComparisonRow:
    method: str
    seed: int
    clusters: int
    interference: float
    variance: float
    ate_hat: float
    true_ate: float
    abs_bias: float
    seconds: float


@dataclass
class ComparisonTable:
    rows: list

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([vars(r) for r in self.rows])

    def summary(self) -> pd.DataFrame:
        df = self.to_frame()
        return df.groupby("method", sort=True).agg(
            runs=("seed", "count"),
            interference=("interference", "mean"),
            variance=("variance", "mean"),
            abs_bias=("abs_bias", "mean"),
            clusters=("clusters", "mean"),
            seconds=("seconds", "mean")).reset_index()

    def to_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.10g")


def _method_assignment(method: str, gen: GeneratedGraph, scores, cfg,
                       seed: int) -> tuple[GroupAssignment, int]:
    """Build the clustering + group assignment one method prescribes."""
    g = gen.graph
    aseed = _child_seed(seed, 41)
    params = ModularityParams(resolution=cfg.resolution)
    if method == "user_level":
        return user_level_randomization(g.node_count, cfg.p,
                                        seed=aseed), g.node_count
    if method == "geo":
        a = geo_synthetic_assignment(g, cfg.geo_regions, cfg.p, seed=aseed,
                                     blocks=gen.blocks,
                                     size_sigma=cfg.geo_size_sigma,
                                     mode=cfg.assign_mode)
        return a, a.cluster_count
    if method == "oracle_blocks":
        if gen.communities is None:
            raise ValueError("oracle_blocks needs a planted-block graph")
        c = clustering_from_labels(gen.communities)
    elif method == "lp_louvain":
        c = louvain(filter_by_score(g, scores, cfg.gamma, "score"),
                    params, seed=_child_seed(seed, 43))
    elif method == "lp_louvain_unit":
        c = louvain(filter_by_score(g, scores, cfg.gamma, "unit"),
                    params, seed=_child_seed(seed, 43))
    elif method == "hotspot_louvain":
        c = louvain(remove_hotspots(g, cfg.theta), params,
                    seed=_child_seed(seed, 43))
    elif method == "lp_labelprop":
        c = label_propagation(filter_by_score(g, scores, cfg.gamma, "score"),
                              seed=_child_seed(seed, 43))
    else:
        raise ValueError(f"unknown method: {method!r}")
    a = merge_random(c, cfg.p, seed=aseed, mode=cfg.assign_mode)
    return a, c.cluster_count


def run_comparison(config: ComparisonConfig, methods=METHODS,
                   seeds=(0,)) -> ComparisonTable:
    """Evaluate each method over shared per-seed campaigns.

    Per seed: generate the graph; run an all-control warmup campaign
    whose realized edges train the link model; score every edge; then
    for each method cluster, randomize, simulate the same evaluation
    campaign (common seed), and read out interference, delta-method
    variance (averaged over groups), and bias against the true effect.
    """
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method: {m!r}")
    rows = []
    needs_scores = any(m.startswith("lp_") for m in methods)
    for seed in seeds:
        gen = generate_graph(replace(config.graph,
                                     seed=_child_seed(config.graph.seed,
                                                      seed)))
        g = gen.graph
        warm = replace(config.response, horizon=config.warmup_days)
        warm_run = simulate_campaign(
            g, np.zeros(g.node_count, bool), warm,
            seed=_child_seed(seed, 53), blocks=gen.communities,
            shift_blocks=gen.blocks)
        scores = None
        if needs_scores:
            ts = build_training_set(g, warm_run.label, config.neg_ratio,
                                    seed=_child_seed(seed, 59),
                                    max_pairs=config.max_train_pairs)
            result = train(ts, g, config.train, seed=_child_seed(seed, 61))
            scores = score_edges(result.model, g)
        eval_seed = _child_seed(seed, 67)
        for method in methods:
            t0 = time.perf_counter()
            a, n_clusters = _method_assignment(method, gen, scores, config,
                                               seed)
            elapsed = time.perf_counter() - t0
            run = simulate_campaign(g, a.treated_mask(1), config.response,
                                    seed=eval_seed, blocks=gen.communities,
                                    shift_blocks=gen.blocks)
            i_frac = interference(a, run.label)
            a_var = a
            if config.slice_fraction < 1.0:
                a_var = group_traffic_slice(a, config.slice_fraction,
                                            seed=_child_seed(seed, 71))
            variances = []
            for grp in range(config.p):
                variances.append(estimator_variance(
                    cluster_stats(a_var, run.outcome, grp)))
            ate_hat = estimate_ate(a, run.outcome, treated_groups=1,
                                   control_groups=0)
            t_ate = run.true_ate
            rows.append(ComparisonRow(
                method=method, seed=int(seed), clusters=int(n_clusters),
                interference=float(i_frac),
                variance=float(np.mean(variances)),
                ate_hat=float(ate_hat), true_ate=float(t_ate),
                abs_bias=float(abs(ate_hat - t_ate)),
                seconds=float(elapsed)))
    return ComparisonTable(rows=rows)
