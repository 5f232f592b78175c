"""Cluster-level randomization into experiment groups.

Clusters, not nodes, are the unit of randomization; a node's group is
its cluster's group. Traffic slicing keeps whole clusters so the
cluster-randomized structure survives subsampling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import _kernels
from .clustering import Clustering


@dataclass
class GroupAssignment:
    """Node partition into p groups via a cluster partition.

    group_of_cluster holds -1 for clusters sliced out of the
    experiment; their nodes report group -1.
    """

    cluster_of: np.ndarray  # (n,) int32
    group_of_cluster: np.ndarray  # (C,) int32 in {-1, 0..p-1}
    p: int
    seed: int

    @property
    def node_count(self) -> int:
        return self.cluster_of.shape[0]

    @property
    def cluster_count(self) -> int:
        return self.group_of_cluster.shape[0]

    @property
    def node_groups(self) -> np.ndarray:
        return self.group_of_cluster[self.cluster_of]

    def group_node_counts(self) -> np.ndarray:
        ng = self.node_groups
        return np.bincount(ng[ng >= 0], minlength=self.p)

    def group_cluster_counts(self) -> np.ndarray:
        gc = self.group_of_cluster
        return np.bincount(gc[gc >= 0], minlength=self.p)

    def treated_mask(self, treated_groups) -> np.ndarray:
        treated_groups = np.atleast_1d(np.asarray(treated_groups))
        return np.isin(self.node_groups, treated_groups)

    def validate(self) -> None:
        if self.p < 1:
            raise ValueError("p must be >= 1")
        c = self.cluster_of
        if c.min() < 0 or c.max() >= self.cluster_count:
            raise ValueError("cluster id out of range")
        g = self.group_of_cluster
        if g.min() < -1 or g.max() >= self.p:
            raise ValueError("group id out of range")
        if np.any(self.group_cluster_counts() == 0):
            raise ValueError("empty group")


def _repair_empty_groups(groups: np.ndarray, p: int) -> None:
    """Move one cluster from the most-loaded group into each empty one."""
    counts = np.bincount(groups, minlength=p)
    for g in np.flatnonzero(counts == 0):
        donor = int(np.argmax(counts))
        take = int(np.flatnonzero(groups == donor)[0])
        groups[take] = g
        counts[donor] -= 1
        counts[g] += 1


def merge_random(clustering: Clustering, p: int, *, seed: int,
                 mode: str = "size_balanced") -> GroupAssignment:
    """Randomize clusters into p groups.

    'uniform' assigns clusters independently and uniformly (with a
    deterministic repair step so no group is empty); 'size_balanced'
    walks a shuffled cluster order and gives each cluster to the group
    currently holding the fewest nodes.
    """
    if p < 2:
        raise ValueError("p must be >= 2")
    if mode not in ("uniform", "size_balanced"):
        raise ValueError("mode must be 'uniform' or 'size_balanced'")
    c = clustering.cluster_count
    if c < p:
        raise ValueError(f"fewer clusters ({c}) than groups ({p})")
    rng = np.random.default_rng(seed)
    if mode == "uniform":
        groups = rng.integers(0, p, size=c).astype(np.int32)
        _repair_empty_groups(groups, p)
    else:
        sizes = clustering.cluster_sizes
        order = rng.permutation(c)
        fill = _kernels.balanced_fill(sizes[order].astype(np.int64), p)
        groups = np.empty(c, np.int32)
        groups[order] = fill
    return GroupAssignment(cluster_of=clustering.assignment.astype(np.int32),
                           group_of_cluster=groups, p=p, seed=seed)


def user_level_randomization(n: int, p: int, *, seed: int) -> GroupAssignment:
    """Every node is its own cluster, assigned uniformly to p groups."""
    if p < 1:
        raise ValueError("p must be >= 1")
    if n < p:
        raise ValueError(f"fewer nodes ({n}) than groups ({p})")
    rng = np.random.default_rng(seed)
    groups = rng.integers(0, p, size=n).astype(np.int32)
    _repair_empty_groups(groups, p)
    return GroupAssignment(cluster_of=np.arange(n, dtype=np.int32),
                           group_of_cluster=groups, p=p, seed=seed)


def group_traffic_slice(assignment: GroupAssignment, fraction: float, *,
                        seed: int) -> GroupAssignment:
    """Keep a whole-cluster subsample of each group.

    Walks each group's clusters in a seeded shuffled order, keeping any
    cluster that still fits under the target node share and skipping
    those that would cross it. A group whose walk keeps nothing falls
    back to its smallest cluster, provided that overshoot still lands
    nearer the target than an empty pick; otherwise this raises.
    """
    if not 0.0 < fraction <= 1.0:
        raise ValueError("fraction must lie in (0, 1]")
    sizes = np.bincount(assignment.cluster_of,
                        minlength=assignment.cluster_count)
    rng = np.random.default_rng(seed)
    new_groups = np.full(assignment.cluster_count, -1, np.int32)
    for g in range(assignment.p):
        members = np.flatnonzero(assignment.group_of_cluster == g)
        if members.size == 0:
            raise ValueError(f"group {g} has no clusters")
        members = members[rng.permutation(members.size)]
        target = fraction * float(sizes[members].sum())
        running = 0.0
        kept = 0
        for cid in members:
            s = float(sizes[cid])
            if running + s <= target:
                new_groups[cid] = g
                running += s
                kept += 1
        if kept == 0:
            smallest = members[np.argmin(sizes[members])]
            s = float(sizes[smallest])
            if s - target < target:
                new_groups[smallest] = g
            else:
                raise ValueError(
                    f"group {g}: fraction {fraction} is below the smallest "
                    f"cluster's share, nothing selected")
    return GroupAssignment(cluster_of=assignment.cluster_of,
                           group_of_cluster=new_groups,
                           p=assignment.p, seed=seed)


def write_assignment(a: GroupAssignment, path, node_ids=None) -> None:
    """TSV rows: node id, cluster, group (-1 when sliced out)."""
    ids = np.asarray(node_ids) if node_ids is not None \
        else np.arange(a.node_count)
    df = pd.DataFrame({"node": ids, "cluster": a.cluster_of,
                       "group": a.node_groups})
    with open(path, "wt") as f:
        f.write("# node\tcluster\tgroup\n")
        df.to_csv(f, sep="\t", header=False, index=False)


def read_assignment(path, p=None, seed=0) -> tuple[GroupAssignment, np.ndarray]:
    """Inverse of write_assignment; returns (assignment, node ids)."""
    df = pd.read_csv(path, sep="\t", comment="#", header=None,
                     names=["node", "cluster", "group"], index_col=False,
                     dtype={"node": np.int64, "cluster": np.int32,
                            "group": np.int32})
    cluster_of = df["cluster"].to_numpy()
    ngroups = df["group"].to_numpy()
    c = int(cluster_of.max()) + 1 if cluster_of.size else 0
    group_of_cluster = np.full(c, -1, np.int32)
    group_of_cluster[cluster_of] = ngroups
    if p is None:
        p = int(ngroups.max()) + 1
    a = GroupAssignment(cluster_of=cluster_of,
                        group_of_cluster=group_of_cluster, p=p, seed=seed)
    return a, df["node"].to_numpy()
