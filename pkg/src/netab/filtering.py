"""Edge filtering ahead of clustering.

Two strategies: keep edges whose link score clears a threshold
(optionally carrying the score forward as the edge weight), or drop
every edge incident to a high-degree hotspot. Both preserve the node
universe, so downstream assignment still covers isolated nodes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import SocialGraph, build_graph


@dataclass
class FilterConfig:
    gamma: float = 0.5
    weight_mode: str = "score"  # or "unit"
    theta: int = 40  # hotspot degree threshold

    def __post_init__(self):
        if self.weight_mode not in ("score", "unit"):
            raise ValueError("weight_mode must be 'score' or 'unit'")
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")


def filter_by_score(g: SocialGraph, scores: np.ndarray, gamma: float,
                    weight_mode: str = "score") -> SocialGraph:
    """Keep edges with score >= gamma.

    scores aligns with g.edge_array() canonical order. weight_mode
    'score' writes the score onto the surviving edge, 'unit' writes 1.
    """
    if weight_mode not in ("score", "unit"):
        raise ValueError("weight_mode must be 'score' or 'unit'")
    scores = np.asarray(scores, dtype=np.float64)
    if scores.shape[0] != g.edge_count:
        raise ValueError("scores length != edge count")
    if scores.size and (not np.all(np.isfinite(scores))
                        or scores.min() < 0 or scores.max() > 1):
        raise ValueError("scores must lie in [0, 1]")
    src, dst, _ = g.edge_array()
    keep = scores >= gamma
    w = scores[keep] if weight_mode == "score" \
        else np.ones(int(keep.sum()), np.float64)
    return build_graph(src[keep], dst[keep], w, num_nodes=g.node_count,
                       node_ids=g.node_ids, node_features=g.node_features)


def remove_hotspots(g: SocialGraph, theta: int) -> SocialGraph:
    """Drop every edge incident to a node with original degree > theta.

    A single pass against the input degrees; the cascade is not
    iterated, so a node can end up below theta yet keep no edges.
    """
    if theta < 0:
        raise ValueError("theta must be nonnegative")
    hot = g.degrees > theta
    src, dst, w = g.edge_array()
    keep = ~(hot[src] | hot[dst])
    return build_graph(src[keep], dst[keep], w[keep], num_nodes=g.node_count,
                       node_ids=g.node_ids, node_features=g.node_features)
