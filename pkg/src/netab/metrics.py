"""Experiment readouts: effect estimates, interference, variance.

The estimand is the global average treatment effect, the difference
between everyone-treated and everyone-control worlds. Under network
interference the naive difference of group means is biased whenever
realized edges cross group boundaries; the interference fraction
measures how much of the campaign graph does so, and the delta-method
variance quantifies the price cluster randomization pays in power.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .assignment import GroupAssignment
from .graphs import LabelGraph, SocialGraph


@dataclass
class ExperimentOutcome:
    """Observed responses, with counterfactual arms when simulated.

    y0/y1 are the all-control and all-treated worlds drawn with common
    random numbers; observed y equals the matching arm only when the
    response has no exposure term.
    """

    treated: np.ndarray  # (n,) bool
    y: np.ndarray  # (n,) float64
    y0: np.ndarray | None = None
    y1: np.ndarray | None = None

    def __post_init__(self):
        if self.treated.shape != self.y.shape:
            raise ValueError("treated/y length mismatch")
        for arm in (self.y0, self.y1):
            if arm is not None and arm.shape != self.y.shape:
                raise ValueError("counterfactual arm length mismatch")

    @property
    def node_count(self) -> int:
        return self.y.shape[0]


@dataclass
class ClusterStats:
    """Per-cluster outcome sums and sizes within one group."""

    sums: np.ndarray  # (K,) float64
    sizes: np.ndarray  # (K,) int64

    @property
    def k(self) -> int:
        return self.sums.shape[0]

    @property
    def mu_s(self) -> float:
        return float(self.sums.mean())

    @property
    def mu_n(self) -> float:
        return float(self.sizes.mean())

    @property
    def sigma_s2(self) -> float:
        return float(self.sums.var(ddof=1))

    @property
    def sigma_n2(self) -> float:
        return float(self.sizes.var(ddof=1))

    @property
    def sigma_sn(self) -> float:
        ds = self.sums - self.sums.mean()
        dn = self.sizes - self.sizes.mean()
        return float((ds * dn).sum() / (self.k - 1))


def true_ate(outcome: ExperimentOutcome) -> float:
    """Mean of y1 - y0; requires simulated counterfactual arms."""
    if outcome.y0 is None or outcome.y1 is None:
        raise ValueError("true_ate needs counterfactual arms y0 and y1")
    return float((outcome.y1 - outcome.y0).mean())


def _group_mask(assignment: GroupAssignment, groups) -> np.ndarray:
    groups = np.atleast_1d(np.asarray(groups))
    if groups.size == 0:
        raise ValueError("empty group list")
    if groups.min() < 0 or groups.max() >= assignment.p:
        raise ValueError("group id out of range")
    return np.isin(assignment.node_groups, groups)


def estimate_ate(assignment: GroupAssignment, outcome: ExperimentOutcome,
                 treated_groups=1, control_groups=0) -> float:
    """Pooled difference of means between the two group unions.

    Pooling weights each node equally (cluster sums over cluster
    sizes), matching how a production dashboard averages raw logs.
    """
    tmask = _group_mask(assignment, treated_groups)
    cmask = _group_mask(assignment, control_groups)
    if not tmask.any() or not cmask.any():
        raise ValueError("a side of the contrast has no nodes")
    if (tmask & cmask).any():
        raise ValueError("treated and control groups overlap")
    return float(outcome.y[tmask].mean() - outcome.y[cmask].mean())


def estimate_ate_cluster_means(assignment: GroupAssignment,
                               outcome: ExperimentOutcome,
                               treated_groups=1, control_groups=0) -> float:
    """Unweighted mean of cluster means, then the group difference."""
    def side(groups):
        cs = cluster_stats(assignment, outcome, groups)
        return float((cs.sums / cs.sizes).mean())

    tmask = _group_mask(assignment, treated_groups)
    cmask = _group_mask(assignment, control_groups)
    if (tmask & cmask).any():
        raise ValueError("treated and control groups overlap")
    return side(treated_groups) - side(control_groups)


def interference(assignment: GroupAssignment, labels: LabelGraph,
                 t: int | None = None) -> float:
    """Fraction of realized label edges that cross group boundaries.

    Edges touching a sliced-out node (group -1) are excluded from both
    sides of the ratio. Undefined (raises) when no edges remain.
    """
    snap = labels.snapshot(t) if t is not None else labels
    if snap.edge_count == 0:
        raise ValueError("interference undefined: empty label snapshot")
    ng = assignment.node_groups
    gu = ng[snap.src]
    gv = ng[snap.dst]
    ok = (gu >= 0) & (gv >= 0)
    if not ok.any():
        raise ValueError("interference undefined: no label edge lies "
                         "inside assigned groups")
    return float((gu[ok] != gv[ok]).mean())


def cluster_stats(assignment: GroupAssignment, outcome: ExperimentOutcome,
                  groups) -> ClusterStats:
    """Sums and sizes of every cluster inside the given group union."""
    mask = _group_mask(assignment, groups)
    if not mask.any():
        raise ValueError("no nodes in the requested groups")
    cids = assignment.cluster_of[mask]
    uniq, inv = np.unique(cids, return_inverse=True)
    sums = np.bincount(inv, weights=outcome.y[mask],
                       minlength=uniq.shape[0])
    sizes = np.bincount(inv, minlength=uniq.shape[0]).astype(np.int64)
    return ClusterStats(sums=sums.astype(np.float64), sizes=sizes)


def estimator_variance(stats: ClusterStats) -> float:
    """Delta-method variance of the ratio estimator sum(S)/sum(N).

    Treats the K cluster (sum, size) pairs as iid draws; all second
    moments use the unbiased K-1 denominator.
    """
    k = stats.k
    if k < 2:
        raise ValueError("variance needs at least 2 clusters")
    mu_n = stats.mu_n
    mu_s = stats.mu_s
    r = mu_s / mu_n
    return (stats.sigma_s2 - 2.0 * r * stats.sigma_sn
            + r * r * stats.sigma_n2) / (k * mu_n * mu_n)


@dataclass
class ExposureCurve:
    bin_edges: np.ndarray  # (b+1,)
    mean_outcome: np.ndarray  # (b,) nan where empty
    counts: np.ndarray  # (b,) int64
    isolated_count: int
    isolated_mean: float  # nan when no isolated nodes


def exposure_fractions(g: SocialGraph, treated: np.ndarray) -> np.ndarray:
    """Fraction of each node's G-neighbors that are treated; 0 if isolated."""
    deg = g.degrees
    t = treated[g.indices].astype(np.float64)
    cs = np.concatenate(([0.0], np.cumsum(t)))
    tcount = cs[g.indptr[1:]] - cs[g.indptr[:-1]]
    has = deg > 0
    e = np.zeros(g.node_count)
    e[has] = tcount[has] / deg[has]
    return e


def exposure_curve(g: SocialGraph, outcome: ExperimentOutcome,
                   bins: int = 10) -> ExposureCurve:
    """Mean outcome against treated-neighbor fraction.

    Isolated nodes have no exposure and are reported separately rather
    than binned.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if outcome.node_count != g.node_count:
        raise ValueError("outcome length != node count")
    deg = g.degrees
    has = deg > 0
    e = exposure_fractions(g, outcome.treated)
    edges = np.linspace(0.0, 1.0, bins + 1)
    which = np.clip(np.digitize(e[has], edges) - 1, 0, bins - 1)
    counts = np.bincount(which, minlength=bins).astype(np.int64)
    sums = np.bincount(which, weights=outcome.y[has], minlength=bins)
    with np.errstate(invalid="ignore"):
        means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    iso = ~has
    iso_mean = float(outcome.y[iso].mean()) if iso.any() else float("nan")
    return ExposureCurve(bin_edges=edges, mean_outcome=means, counts=counts,
                         isolated_count=int(iso.sum()),
                         isolated_mean=iso_mean)


@dataclass
class MetricsReport:
    """Everything a single experiment readout needs, JSON-serializable."""

    node_count: int
    p: int
    group_nodes: list[int]
    group_clusters: list[int]
    group_means: list[float]
    group_variances: list[float]
    ate_hat: float
    ate_hat_cluster_means: float
    interference: float
    true_ate: float = float("nan")
    exposure: ExposureCurve | None = None
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {
            "node_count": self.node_count,
            "p": self.p,
            "group_nodes": [int(x) for x in self.group_nodes],
            "group_clusters": [int(x) for x in self.group_clusters],
            "group_means": [float(x) for x in self.group_means],
            "group_variances": [float(x) for x in self.group_variances],
            "ate_hat": float(self.ate_hat),
            "ate_hat_cluster_means": float(self.ate_hat_cluster_means),
            "interference": float(self.interference),
            "true_ate": float(self.true_ate),
        }
        if self.exposure is not None:
            d["exposure"] = {
                "bin_edges": [float(x) for x in self.exposure.bin_edges],
                "mean_outcome": [float(x)
                                 for x in self.exposure.mean_outcome],
                "counts": [int(x) for x in self.exposure.counts],
                "isolated_count": self.exposure.isolated_count,
                "isolated_mean": float(self.exposure.isolated_mean),
            }
        if self.extras:
            d["extras"] = self.extras
        return d

    def to_json(self, path) -> None:
        with open(path, "wt") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")


def build_report(assignment: GroupAssignment, outcome: ExperimentOutcome,
                 labels: LabelGraph | None = None,
                 g: SocialGraph | None = None,
                 treated_groups=1, control_groups=0,
                 exposure_bins: int = 10) -> MetricsReport:
    """Assemble the standard readout for one assignment and outcome."""
    group_nodes = assignment.group_node_counts()
    group_clusters = assignment.group_cluster_counts()
    means, variances = [], []
    ng = assignment.node_groups
    for grp in range(assignment.p):
        mask = ng == grp
        means.append(float(outcome.y[mask].mean()) if mask.any()
                     else float("nan"))
        try:
            variances.append(estimator_variance(
                cluster_stats(assignment, outcome, grp)))
        except ValueError:
            variances.append(float("nan"))
    inter = float("nan")
    if labels is not None and labels.edge_count > 0:
        inter = interference(assignment, labels)
    t_ate = float("nan")
    if outcome.y0 is not None and outcome.y1 is not None:
        t_ate = true_ate(outcome)
    exp_curve = None
    if g is not None:
        exp_curve = exposure_curve(g, outcome, bins=exposure_bins)
    return MetricsReport(
        node_count=outcome.node_count, p=assignment.p,
        group_nodes=[int(x) for x in group_nodes],
        group_clusters=[int(x) for x in group_clusters],
        group_means=means, group_variances=variances,
        ate_hat=estimate_ate(assignment, outcome, treated_groups,
                             control_groups),
        ate_hat_cluster_means=estimate_ate_cluster_means(
            assignment, outcome, treated_groups, control_groups),
        interference=inter, true_ate=t_ate, exposure=exp_curve)


def write_outcomes(outcome: ExperimentOutcome, path, node_ids=None) -> None:
    """TSV rows: node id, z, y, and the counterfactual arms if present."""
    ids = np.asarray(node_ids) if node_ids is not None \
        else np.arange(outcome.node_count)
    cols = {"node": ids, "z": outcome.treated.astype(np.int8),
            "y": outcome.y}
    header = "# node\tz\ty"
    if outcome.y0 is not None and outcome.y1 is not None:
        cols["y0"] = outcome.y0
        cols["y1"] = outcome.y1
        header += "\ty0\ty1"
    df = pd.DataFrame(cols)
    with open(path, "wt") as f:
        f.write(header + "\n")
        df.to_csv(f, sep="\t", header=False, index=False,
                  float_format="%.17g")


def read_outcomes(path) -> tuple[ExperimentOutcome, np.ndarray]:
    """Inverse of write_outcomes; returns (outcome, node ids)."""
    df = pd.read_csv(path, sep="\t", comment="#", header=None,
                     index_col=False,
                     names=["node", "z", "y", "y0", "y1"])
    y0 = df["y0"].to_numpy(np.float64)
    y1 = df["y1"].to_numpy(np.float64)
    have_arms = not (np.all(np.isnan(y0)) or np.all(np.isnan(y1)))
    out = ExperimentOutcome(
        treated=df["z"].to_numpy(np.int64).astype(bool),
        y=df["y"].to_numpy(np.float64),
        y0=y0 if have_arms else None, y1=y1 if have_arms else None)
    return out, df["node"].to_numpy(np.int64)
