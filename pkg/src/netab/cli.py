"""Command line driver for the experiment-design pipeline.

One executable, one subcommand per pipeline stage:

    ingest | train-lp | score | filter | cluster | assign | metrics |
    simulate | compare | report

Stages communicate through plain-file artifacts so any of them can be
replaced by an external implementation:

graph directory
    edges.tsv       canonical tab-separated edge list (src, dst, weight)
    nodes.tsv       one external node id per line, row = dense id
    meta.json       counts and which optional files exist
    features.csv    optional header-less CSV, row i = features of node i
    blocks.tsv      optional planted coarse district per node
    communities.tsv optional planted fine community per node
scores.tsv      one row per canonical edge: src, dst, score
model.json      serialized link model plus training metadata
clusters.tsv    node id, cluster id
assignment.tsv  node id, cluster id, group id (-1 = sliced out)
outcomes.tsv    node id, arm, outcome, counterfactual arms if known
report.json     metrics readout (group stats, ATE, interference, curve)

Every run prints a resolved-config line that is sufficient to replay it
exactly; given identical inputs and seed, every stage writes
byte-identical outputs. Exit codes: 0 ok, 2 config error, 3 missing
input, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .assignment import (GroupAssignment, group_traffic_slice, merge_random,
                         read_assignment, user_level_randomization,
                         write_assignment)
from .clustering import (Clustering, ModularityParams, clustering_from_labels,
                         label_propagation, louvain, modularity)
from .filtering import filter_by_score, remove_hotspots
from .graphs import (EdgeListError, SocialGraph, build_graph,
                     degree_distribution, load_edge_list, load_label_list,
                     write_edge_list, write_label_list)
from .linkpred import (DivergenceError, TrainConfig, build_training_set,
                       evaluate_classifier, model_from_dict, model_to_dict,
                       score_edges, split_training_set, train)
from .metrics import (build_report, read_outcomes, write_outcomes)
from .sim import (ComparisonConfig, GraphGenSpec, ResponseModel,
                  generate_graph, run_comparison, simulate_campaign)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_MISSING = 3
EXIT_NUMERIC = 4


class CliError(Exception):
    """Carries the intended process exit code."""

    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# config plumbing


def _parse_scalar(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def load_config_file(path: str) -> dict:
    """Read a config file: JSON object, or key = value lines.

    Dotted keys in the line format nest (graph.n = 100 puts 100 under
    config["graph"]["n"]); '#' starts a comment.
    """
    if not os.path.exists(path):
        raise CliError(EXIT_MISSING, f"config file not found: {path}")
    with open(path, "rt") as f:
        text = f.read()
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            cfg = json.loads(text)
        except json.JSONDecodeError as e:
            raise CliError(EXIT_CONFIG, f"{path}: invalid JSON ({e})")
        if not isinstance(cfg, dict):
            raise CliError(EXIT_CONFIG, f"{path}: top level must be an object")
        return cfg
    cfg: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(EXIT_CONFIG,
                           f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        node = cfg
        parts = key.strip().split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise CliError(EXIT_CONFIG,
                               f"{path}:{lineno}: key {key.strip()!r} "
                               "conflicts with an earlier scalar")
        node[parts[-1]] = _parse_scalar(value.strip())
    return cfg


def resolve_config(args: argparse.Namespace, keys: list[str]) -> dict:
    """Merge the config file under the flags; flags win when given.

    Unknown keys in the file are rejected so typos cannot silently fall
    back to defaults.
    """
    cfg = {}
    if getattr(args, "config", None):
        cfg = load_config_file(args.config)
        for key in cfg:
            if key not in keys:
                raise CliError(EXIT_CONFIG, f"unknown config key: {key!r}")
    resolved = {}
    for key in keys:
        flag_val = getattr(args, key, None)
        if flag_val is not None:
            resolved[key] = flag_val
        elif key in cfg:
            resolved[key] = cfg[key]
        else:
            resolved[key] = None
    return resolved


def echo_config(command: str, resolved: dict) -> None:
    payload = {"command": command}
    payload.update({k: v for k, v in sorted(resolved.items())
                    if v is not None})
    print("resolved-config " + json.dumps(payload, sort_keys=True))


def _require(resolved: dict, *keys: str) -> None:
    for key in keys:
        if resolved.get(key) is None:
            raise CliError(EXIT_CONFIG, f"missing required option: --"
                           + key.replace("_", "-"))


def _need_file(path: str, what: str) -> str:
    if not os.path.exists(path):
        raise CliError(EXIT_MISSING, f"{what} not found: {path}")
    return path


# ---------------------------------------------------------------------------
# graph directory artifacts


def _write_int_column(path: str, values: np.ndarray) -> None:
    np.savetxt(path, values.astype(np.int64), fmt="%d")


def _read_int_column(path: str) -> np.ndarray:
    out = np.loadtxt(path, dtype=np.int64, comments="#")
    return np.atleast_1d(out)


def save_graph_dir(g: SocialGraph, out_dir: str, blocks=None,
                   communities=None, extra_meta: dict | None = None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_edge_list(g, os.path.join(out_dir, "edges.tsv"))
    _write_int_column(os.path.join(out_dir, "nodes.tsv"), g.node_ids)
    meta = {
        "nodes": int(g.node_count),
        "edges": int(g.edge_count),
        "feature_dim": int(g.node_features.shape[1])
        if g.node_features is not None else 0,
        "has_blocks": blocks is not None,
        "has_communities": communities is not None,
    }
    if extra_meta:
        meta.update(extra_meta)
    if g.node_features is not None:
        np.savetxt(os.path.join(out_dir, "features.csv"), g.node_features,
                   delimiter=",", fmt="%.17g")
    if blocks is not None:
        _write_int_column(os.path.join(out_dir, "blocks.tsv"), blocks)
    if communities is not None:
        _write_int_column(os.path.join(out_dir, "communities.tsv"),
                          communities)
    with open(os.path.join(out_dir, "meta.json"), "wt") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def load_graph_dir(path: str):
    """Returns (graph, meta dict, blocks or None, communities or None)."""
    _need_file(path, "graph directory")
    edges_path = _need_file(os.path.join(path, "edges.tsv"), "edge list")
    nodes_path = os.path.join(path, "nodes.tsv")
    meta_path = os.path.join(path, "meta.json")
    meta = {}
    if os.path.exists(meta_path):
        with open(meta_path, "rt") as f:
            meta = json.load(f)
    loaded = load_edge_list(edges_path)
    if os.path.exists(nodes_path):
        roster = _read_int_column(nodes_path)
        pos = {int(ext): i for i, ext in enumerate(roster)}
        s, d, w = loaded.edge_array()
        try:
            src = np.fromiter((pos[int(x)] for x in loaded.node_ids[s]),
                              np.int64, count=s.shape[0])
            dst = np.fromiter((pos[int(x)] for x in loaded.node_ids[d]),
                              np.int64, count=d.shape[0])
        except KeyError as e:
            raise CliError(EXIT_CONFIG,
                           f"{edges_path}: endpoint {e} missing from "
                           "nodes.tsv")
        g = build_graph(src, dst, w, num_nodes=roster.shape[0],
                        node_ids=roster)
    else:
        g = loaded
    feat_path = os.path.join(path, "features.csv")
    if os.path.exists(feat_path):
        feats = np.loadtxt(feat_path, delimiter=",", ndmin=2)
        if feats.shape[0] != g.node_count:
            raise CliError(EXIT_CONFIG,
                           f"{feat_path}: {feats.shape[0]} rows for "
                           f"{g.node_count} nodes")
        g = build_graph(*g.edge_array(), num_nodes=g.node_count,
                        node_ids=g.node_ids, node_features=feats)
    blocks = communities = None
    bpath = os.path.join(path, "blocks.tsv")
    cpath = os.path.join(path, "communities.tsv")
    if os.path.exists(bpath):
        blocks = _read_int_column(bpath).astype(np.int32)
    if os.path.exists(cpath):
        communities = _read_int_column(cpath).astype(np.int32)
    return g, meta, blocks, communities


def _dense_ids(g: SocialGraph, ext: np.ndarray, what: str) -> np.ndarray:
    """Map external ids back to dense row numbers of this graph."""
    order = np.argsort(g.node_ids, kind="stable")
    sorted_ids = g.node_ids[order]
    pos = np.searchsorted(sorted_ids, ext)
    bad = (pos >= sorted_ids.shape[0]) | (sorted_ids[np.minimum(
        pos, sorted_ids.shape[0] - 1)] != ext)
    if bad.any():
        raise CliError(EXIT_CONFIG,
                       f"{what}: node id {int(ext[bad][0])} is not in the "
                       "graph")
    return order[pos]


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args) -> int:
    keys = ["edges", "features", "out"]
    cfg = resolve_config(args, keys)
    _require(cfg, "edges", "out")
    echo_config("ingest", cfg)
    _need_file(cfg["edges"], "edge list")
    g = load_edge_list(cfg["edges"])
    if cfg["features"]:
        _need_file(cfg["features"], "feature file")
        feats = np.loadtxt(cfg["features"], delimiter=",", ndmin=2)
        if feats.shape[0] != g.node_count:
            raise CliError(EXIT_CONFIG,
                           f"{cfg['features']}: {feats.shape[0]} rows for "
                           f"{g.node_count} nodes")
        g = build_graph(*g.edge_array(), num_nodes=g.node_count,
                        node_ids=g.node_ids, node_features=feats)
    stats = g.ingest
    save_graph_dir(g, cfg["out"])
    print(f"ingest: {g.node_count} nodes, {g.edge_count} edges "
          f"({stats.rows_read} rows read, "
          f"{stats.duplicates_collapsed} duplicates collapsed, "
          f"{stats.self_loops_dropped} self loops dropped)")
    return EXIT_OK


def _train_config(cfg: dict) -> TrainConfig:
    fields = {}
    for key in ("k_hops", "width", "epochs", "batch_size", "step_size",
                "max_nodes"):
        if cfg.get(key) is not None:
            fields[key] = cfg[key]
    if cfg.get("use_labels") is not None:
        fields["use_labels"] = bool(cfg["use_labels"])
    try:
        return TrainConfig(**fields)
    except (TypeError, ValueError) as e:
        raise CliError(EXIT_CONFIG, f"bad training config: {e}")


def cmd_train_lp(args) -> int:
    keys = ["graph", "labels", "horizon", "seed", "out", "k_hops", "width",
            "epochs", "batch_size", "step_size", "max_nodes", "use_labels",
            "neg_ratio", "max_pairs", "test_fraction"]
    cfg = resolve_config(args, keys)
    _require(cfg, "graph", "labels", "seed", "out")
    if cfg["horizon"] is None:
        cfg["horizon"] = 10 ** 9  # accept every labeled day
    if cfg["neg_ratio"] is None:
        cfg["neg_ratio"] = 1.0
    if cfg["test_fraction"] is None:
        cfg["test_fraction"] = 0.2
    echo_config("train-lp", cfg)
    g, _meta, _b, _c = load_graph_dir(cfg["graph"])
    _need_file(cfg["labels"], "label list")
    lg = load_label_list(cfg["labels"], horizon=cfg["horizon"],
                         num_nodes=g.node_count, node_ids=g.node_ids)
    ts = build_training_set(g, lg, cfg["neg_ratio"], seed=cfg["seed"],
                            max_pairs=cfg["max_pairs"])
    tc = _train_config(cfg)
    if cfg["test_fraction"] > 0:
        tr, te = split_training_set(ts, cfg["test_fraction"],
                                    seed=cfg["seed"] + 1)
    else:
        tr, te = ts, None
    result = train(tr, g, tc, seed=cfg["seed"])
    payload = model_to_dict(result.model)
    payload["train_loss"] = float(result.loss_trace[-1])
    if te is not None and te.pairs.shape[0] > 0:
        from .linkpred import score_pairs
        holdout = score_pairs(result.model, g, te.pairs)
        payload["holdout_auc"] = evaluate_classifier(holdout, te.labels).auc
    with open(cfg["out"], "wt") as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write("\n")
    msg = f"train-lp: final loss {payload['train_loss']:.4f}"
    if "holdout_auc" in payload:
        msg += f", holdout AUC {payload['holdout_auc']:.4f}"
    print(msg)
    return EXIT_OK


def _load_model(path: str):
    _need_file(path, "model file")
    with open(path, "rt") as f:
        payload = json.load(f)
    payload.pop("train_loss", None)
    payload.pop("holdout_auc", None)
    try:
        return model_from_dict(payload)
    except (KeyError, ValueError, TypeError) as e:
        raise CliError(EXIT_CONFIG, f"{path}: not a model file ({e})")


def cmd_score(args) -> int:
    keys = ["graph", "model", "out", "max_nodes"]
    cfg = resolve_config(args, keys)
    _require(cfg, "graph", "model", "out")
    echo_config("score", cfg)
    g, _meta, _b, _c = load_graph_dir(cfg["graph"])
    model = _load_model(cfg["model"])
    scores = score_edges(model, g, max_nodes=cfg["max_nodes"])
    s, d, _w = g.edge_array()
    with open(cfg["out"], "wt") as f:
        f.write("# src\tdst\tscore\n")
        for a, b, sc in zip(g.node_ids[s], g.node_ids[d], scores):
            f.write(f"{a}\t{b}\t{sc:.17g}\n")
    print(f"score: {scores.shape[0]} edges, "
          f"mean score {scores.mean():.4f}")
    return EXIT_OK


def _read_scores(path: str, g: SocialGraph) -> np.ndarray:
    import pandas as pd
    _need_file(path, "score file")
    df = pd.read_csv(path, sep="\t", comment="#", header=None,
                     names=["src", "dst", "score"], index_col=False)
    if len(df) != g.edge_count:
        raise CliError(EXIT_CONFIG,
                       f"{path}: {len(df)} rows for {g.edge_count} edges")
    s, d, _w = g.edge_array()
    su = _dense_ids(g, df["src"].to_numpy(np.int64), path)
    dv = _dense_ids(g, df["dst"].to_numpy(np.int64), path)
    lo = np.minimum(su, dv)
    hi = np.maximum(su, dv)
    if not (np.array_equal(lo, s) and np.array_equal(hi, d)):
        order = np.lexsort((hi, lo))
        if not (np.array_equal(lo[order], s) and np.array_equal(hi[order],
                                                                d)):
            raise CliError(EXIT_CONFIG,
                           f"{path}: edges do not match the graph")
        return df["score"].to_numpy(np.float64)[order]
    return df["score"].to_numpy(np.float64)


def cmd_filter(args) -> int:
    keys = ["graph", "scores", "gamma", "theta", "weight_mode", "out"]
    cfg = resolve_config(args, keys)
    _require(cfg, "graph", "out")
    if (cfg["gamma"] is None) == (cfg["theta"] is None):
        raise CliError(EXIT_CONFIG,
                       "pass exactly one of --gamma (score filter) or "
                       "--theta (hotspot removal)")
    if cfg["weight_mode"] is None:
        cfg["weight_mode"] = "score"
    echo_config("filter", cfg)
    g, meta, blocks, communities = load_graph_dir(cfg["graph"])
    if cfg["gamma"] is not None:
        _require(cfg, "scores")
        scores = _read_scores(cfg["scores"], g)
        try:
            fg = filter_by_score(g, scores, cfg["gamma"], cfg["weight_mode"])
        except ValueError as e:
            raise CliError(EXIT_CONFIG, str(e))
    else:
        try:
            fg = remove_hotspots(g, cfg["theta"])
        except ValueError as e:
            raise CliError(EXIT_CONFIG, str(e))
    save_graph_dir(fg, cfg["out"], blocks=blocks, communities=communities)
    print(f"filter: kept {fg.edge_count} of {g.edge_count} edges")
    return EXIT_OK


def cmd_cluster(args) -> int:
    keys = ["graph", "algo", "seed", "resolution", "max_sweeps", "out"]
    cfg = resolve_config(args, keys)
    _require(cfg, "graph", "seed", "out")
    if cfg["algo"] is None:
        cfg["algo"] = "louvain"
    if cfg["resolution"] is None:
        cfg["resolution"] = 1.0
    if cfg["max_sweeps"] is None:
        cfg["max_sweeps"] = 100
    echo_config("cluster", cfg)
    g, _meta, _b, _c = load_graph_dir(cfg["graph"])
    if cfg["algo"] == "louvain":
        try:
            c = louvain(g, ModularityParams(resolution=cfg["resolution"]),
                        seed=cfg["seed"])
        except ValueError as e:
            raise CliError(EXIT_CONFIG, str(e))
        q = modularity(g, c, cfg["resolution"])
        note = f", modularity {q:.4f}"
    elif cfg["algo"] == "labelprop":
        c = label_propagation(g, seed=cfg["seed"],
                              max_sweeps=cfg["max_sweeps"])
        note = ""
    else:
        raise CliError(EXIT_CONFIG,
                       f"unknown clustering algo: {cfg['algo']!r}")
    with open(cfg["out"], "wt") as f:
        f.write("# node\tcluster\n")
        for ext, lab in zip(g.node_ids, c.assignment):
            f.write(f"{ext}\t{lab}\n")
    print(f"cluster: {c.cluster_count} clusters over {g.node_count} nodes"
          + note)
    return EXIT_OK


def _read_clusters(path: str) -> tuple[Clustering, np.ndarray]:
    import pandas as pd
    _need_file(path, "cluster file")
    df = pd.read_csv(path, sep="\t", comment="#", header=None,
                     names=["node", "cluster"], index_col=False,
                     dtype={"node": np.int64, "cluster": np.int64})
    return clustering_from_labels(df["cluster"].to_numpy()), \
        df["node"].to_numpy()


def cmd_assign(args) -> int:
    keys = ["clusters", "groups", "seed", "mode", "slice", "out"]
    cfg = resolve_config(args, keys)
    _require(cfg, "clusters", "seed", "out")
    if cfg["groups"] is None:
        cfg["groups"] = 2
    if cfg["mode"] is None:
        cfg["mode"] = "size_balanced"
    echo_config("assign", cfg)
    c, ids = _read_clusters(cfg["clusters"])
    try:
        a = merge_random(c, cfg["groups"], seed=cfg["seed"],
                         mode=cfg["mode"])
        if cfg["slice"] is not None:
            a = group_traffic_slice(a, cfg["slice"],
                                    seed=cfg["seed"] + 1)
    except ValueError as e:
        raise CliError(EXIT_CONFIG, str(e))
    write_assignment(a, cfg["out"], node_ids=ids)
    counts = ", ".join(f"g{i}={n}" for i, n in
                       enumerate(a.group_node_counts()))
    print(f"assign: {a.cluster_count} clusters into {a.p} groups ({counts})")
    return EXIT_OK


def cmd_metrics(args) -> int:
    keys = ["assignment", "outcomes", "labels", "horizon", "graph",
            "exposure_bins", "out"]
    cfg = resolve_config(args, keys)
    _require(cfg, "assignment", "outcomes", "out")
    if cfg["exposure_bins"] is None:
        cfg["exposure_bins"] = 10
    echo_config("metrics", cfg)
    _need_file(cfg["assignment"], "assignment file")
    a, aids = read_assignment(cfg["assignment"])
    _need_file(cfg["outcomes"], "outcome file")
    outcome, oids = read_outcomes(cfg["outcomes"])
    if outcome.node_count != a.node_count:
        raise CliError(EXIT_CONFIG,
                       f"outcomes cover {outcome.node_count} nodes, "
                       f"assignment covers {a.node_count}")
    if not np.array_equal(aids, oids):
        raise CliError(EXIT_CONFIG,
                       "assignment and outcomes list nodes in different "
                       "orders")
    lg = None
    g = None
    if cfg["graph"]:
        g, _meta, _b, _c = load_graph_dir(cfg["graph"])
    if cfg["labels"]:
        _need_file(cfg["labels"], "label list")
        horizon = cfg["horizon"] if cfg["horizon"] is not None else 10 ** 9
        lg = load_label_list(cfg["labels"], horizon=horizon,
                             num_nodes=a.node_count,
                             node_ids=g.node_ids if g is not None else None)
    report = build_report(a, outcome, labels=lg, g=g,
                          exposure_bins=cfg["exposure_bins"])
    report.to_json(cfg["out"])
    print(f"metrics: ate_hat {report.ate_hat:+.4f}"
          + (f", interference {report.interference:.4f}"
             if lg is not None else ""))
    return EXIT_OK


def _response_from(cfg: dict) -> ResponseModel:
    mapping = {"tau": "tau", "beta0": "beta0",
               "exposure_kind": "exposure_kind",
               "exposure_scale": "exposure_scale",
               "exposure_shape": "exposure_shape", "noise_sd": "noise_sd",
               "p_t": "p_t", "p_c": "p_c", "horizon": "horizon",
               "init_frac": "init_frac",
               "affinity": "cross_block_affinity", "block_sd": "block_sd"}
    fields = {dest: cfg[key] for key, dest in mapping.items()
              if cfg.get(key) is not None}
    try:
        return ResponseModel(**fields)
    except (TypeError, ValueError) as e:
        raise CliError(EXIT_CONFIG, f"bad response model: {e}")


def cmd_simulate(args) -> int:
    keys = ["graph", "out_graph", "assignment", "treated_groups", "seed",
            "out",
            # generator
            "model", "n", "m", "blocks", "p_in", "p_out", "community_size",
            "celebrities", "celebrity_cover", "feature_dim", "feature_noise",
            # response
            "tau", "beta0", "exposure_kind", "exposure_scale",
            "exposure_shape", "noise_sd", "p_t", "p_c", "horizon",
            "init_frac", "affinity", "block_sd"]
    cfg = resolve_config(args, keys)
    _require(cfg, "seed", "out")
    if (cfg["graph"] is None) == (cfg["model"] is None):
        raise CliError(EXIT_CONFIG,
                       "pass exactly one of --graph (existing graph "
                       "directory) or --model (generator family)")
    echo_config("simulate", cfg)
    if cfg["graph"]:
        g, meta, blocks, communities = load_graph_dir(cfg["graph"])
    else:
        _require(cfg, "n")
        gen_fields = {}
        for key in ("model", "n", "m", "blocks", "p_in", "p_out",
                    "community_size", "celebrities", "celebrity_cover",
                    "feature_dim", "feature_noise"):
            if cfg.get(key) is not None:
                gen_fields[key] = cfg[key]
        try:
            gen = generate_graph(GraphGenSpec(seed=cfg["seed"], **gen_fields))
        except (TypeError, ValueError) as e:
            raise CliError(EXIT_CONFIG, f"bad generator spec: {e}")
        g, blocks, communities = gen.graph, gen.blocks, gen.communities
        if cfg["out_graph"]:
            save_graph_dir(g, cfg["out_graph"], blocks=blocks,
                           communities=communities)
    response = _response_from(cfg)
    if cfg["assignment"]:
        _need_file(cfg["assignment"], "assignment file")
        a, ids = read_assignment(cfg["assignment"])
        if a.node_count != g.node_count:
            raise CliError(EXIT_CONFIG,
                           f"assignment covers {a.node_count} nodes, graph "
                           f"has {g.node_count}")
        groups = cfg["treated_groups"] if cfg["treated_groups"] is not None \
            else [1]
        treated = a.treated_mask(groups)
        if not np.array_equal(ids, g.node_ids):
            treated = treated[np.argsort(_dense_ids(g, ids,
                                                    cfg["assignment"]))]
    else:
        treated = np.zeros(g.node_count, bool)
    run = simulate_campaign(g, treated, response, seed=cfg["seed"],
                            blocks=communities, shift_blocks=blocks)
    os.makedirs(cfg["out"], exist_ok=True)
    write_outcomes(run.outcome, os.path.join(cfg["out"], "outcomes.tsv"),
                   node_ids=g.node_ids)
    write_label_list(run.label, os.path.join(cfg["out"], "labels.tsv"),
                     node_ids=g.node_ids)
    meta = {"true_ate": run.true_ate,
            "participants": int(run.participants.sum()),
            "label_edges": int(run.label.edge_count),
            "horizon": response.horizon}
    with open(os.path.join(cfg["out"], "meta.json"), "wt") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")
    print(f"simulate: {meta['label_edges']} realized invitation edges, "
          f"{meta['participants']} participants, "
          f"true ATE {run.true_ate:+.4f}")
    return EXIT_OK


DEMO_COMPARE = {
    "graph": {"model": "hybrid", "n": 4000, "m": 2, "blocks": 4,
              "p_in": 5e-4, "p_out": 5e-5, "community_size": 200,
              "celebrities": 2, "celebrity_cover": 0.6, "feature_dim": 8,
              "feature_noise": 1.0, "seed": 7},
    "response": {"tau": 0.5, "exposure_kind": "saturating",
                 "exposure_scale": 3.0, "exposure_shape": 0.5,
                 "noise_sd": 0.5, "p_t": 0.1, "p_c": 0.06, "horizon": 5,
                 "init_frac": 0.05, "cross_block_affinity": 0.08,
                 "block_sd": 0.25},
    "train": {"k_hops": 1, "width": 16, "epochs": 40, "step_size": 5e-3},
    "gamma": 0.5, "theta": 40, "p": 2, "warmup_days": 4,
    "geo_regions": 4, "geo_size_sigma": 0.0,
}


def _comparison_config(cfg: dict) -> ComparisonConfig:
    cfg = dict(cfg)
    try:
        graph = GraphGenSpec(**cfg.pop("graph"))
        response = ResponseModel(**cfg.pop("response", {}))
        train_cfg = TrainConfig(**cfg.pop("train", {}))
        return ComparisonConfig(graph=graph, response=response,
                                train=train_cfg, **cfg)
    except (KeyError, TypeError, ValueError) as e:
        raise CliError(EXIT_CONFIG, f"bad comparison config: {e}")


def _parse_seeds(spec: str) -> list[int]:
    try:
        if ":" in spec:
            lo, hi = spec.split(":", 1)
            return list(range(int(lo), int(hi)))
        return [int(s) for s in spec.split(",") if s.strip() != ""]
    except ValueError:
        raise CliError(EXIT_CONFIG, f"bad seed spec: {spec!r} "
                       "(use lo:hi or a comma list)")


def cmd_compare(args) -> int:
    if args.config is None:
        raise CliError(EXIT_CONFIG, "compare needs --config FILE or "
                       "--config demo")
    if args.config == "demo":
        raw = DEMO_COMPARE
    else:
        raw = load_config_file(args.config)
    seeds = _parse_seeds(args.seeds) if args.seeds else [0]
    methods = tuple(args.methods.split(",")) if args.methods else None
    echo_config("compare", {"config": args.config, "seeds": args.seeds,
                            "methods": args.methods, "out": args.out})
    config = _comparison_config(raw)
    kwargs = {"seeds": seeds}
    if methods:
        kwargs["methods"] = methods
    try:
        table = run_comparison(config, **kwargs)
    except ValueError as e:
        raise CliError(EXIT_CONFIG, str(e))
    if args.out:
        table.to_csv(args.out)
    summary = table.summary()
    print(summary.to_string())
    return EXIT_OK


def _plot_degree_distribution(g: SocialGraph, out_dir: str) -> list[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    hist = degree_distribution(g)
    centers = 0.5 * (hist.bucket_edges[:-1] + hist.bucket_edges[1:])
    csv_path = os.path.join(out_dir, "degree_distribution.csv")
    with open(csv_path, "wt") as f:
        f.write("bucket_low,bucket_high,count\n")
        for lo, hi, c in zip(hist.bucket_edges[:-1], hist.bucket_edges[1:],
                             hist.counts):
            f.write(f"{lo:.17g},{hi:.17g},{c}\n")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    pos = hist.counts > 0
    ax.loglog(centers[pos], hist.counts[pos], "o-")
    ax.set_xlabel("degree")
    ax.set_ylabel("nodes")
    ax.set_title(f"degree distribution (mean/median "
                 f"{hist.skew_ratio:.2f}, max {hist.max_degree})")
    fig.tight_layout()
    png_path = os.path.join(out_dir, "degree_distribution.png")
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def _plot_exposure_curve(exposure: dict, out_dir: str) -> list[str]:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    edges = np.asarray(exposure["bin_edges"])
    means = np.asarray(exposure["mean_outcome"], dtype=np.float64)
    counts = np.asarray(exposure["counts"])
    centers = 0.5 * (edges[:-1] + edges[1:])
    csv_path = os.path.join(out_dir, "exposure_curve.csv")
    with open(csv_path, "wt") as f:
        f.write("exposure_bin_center,mean_outcome,count\n")
        for c, m, k in zip(centers, means, counts):
            f.write(f"{c:.17g},{m:.17g},{k}\n")
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ok = ~np.isnan(means)
    ax.plot(centers[ok], means[ok], "o-")
    ax.set_xlabel("treated-neighbor fraction")
    ax.set_ylabel("mean outcome")
    ax.set_title("exposure-response curve")
    fig.tight_layout()
    png_path = os.path.join(out_dir, "exposure_curve.png")
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
    return [csv_path, png_path]


def _format_report(d: dict) -> str:
    lines = ["experiment readout", "==================", ""]
    lines.append(f"nodes: {d['node_count']}   groups: {d['p']}")
    lines.append("")
    lines.append(f"{'group':>5} {'nodes':>10} {'clusters':>10} "
                 f"{'mean y':>12} {'variance':>12}")
    for i in range(d["p"]):
        lines.append(f"{i:>5} {d['group_nodes'][i]:>10} "
                     f"{d['group_clusters'][i]:>10} "
                     f"{d['group_means'][i]:>12.5f} "
                     f"{d['group_variances'][i]:>12.5g}")
    lines.append("")
    lines.append(f"ate_hat (pooled ratio): {d['ate_hat']:+.5f}")
    lines.append(f"ate_hat (cluster means): {d['ate_hat_cluster_means']:+.5f}")
    if not np.isnan(d.get("true_ate", float("nan"))):
        lines.append(f"true ATE: {d['true_ate']:+.5f}")
        lines.append(f"bias: {d['ate_hat'] - d['true_ate']:+.5f}")
    if not np.isnan(d.get("interference", float("nan"))):
        lines.append(f"interference (crossing label edges): "
                     f"{d['interference']:.5f}")
    return "\n".join(lines) + "\n"


def cmd_report(args) -> int:
    keys = ["metrics", "graph", "table", "out"]
    cfg = resolve_config(args, keys)
    _require(cfg, "metrics", "out")
    echo_config("report", cfg)
    _need_file(cfg["metrics"], "metrics file")
    with open(cfg["metrics"], "rt") as f:
        d = json.load(f)
    os.makedirs(cfg["out"], exist_ok=True)
    written = []
    text = _format_report(d)
    if cfg["table"]:
        import pandas as pd
        _need_file(cfg["table"], "comparison table")
        frame = pd.read_csv(cfg["table"])
        text += "\nmethod comparison\n-----------------\n"
        text += frame.groupby("method")[
            ["interference", "variance", "abs_bias"]].mean().to_string()
        text += "\n"
    report_path = os.path.join(cfg["out"], "report.txt")
    with open(report_path, "wt") as f:
        f.write(text)
    written.append(report_path)
    if cfg["graph"]:
        g, _meta, _b, _c = load_graph_dir(cfg["graph"])
        written += _plot_degree_distribution(g, cfg["out"])
    if d.get("exposure"):
        written += _plot_exposure_curve(d["exposure"], cfg["out"])
    print("report: wrote " + ", ".join(written))
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(sub, config=True):
    if config:
        sub.add_argument("--config", help="config file (JSON or key=value "
                         "lines); flags override file values")
    sub.add_argument("--threads", type=int, default=None,
                     help="cap worker threads (default: leave library "
                     "defaults)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="netab",
        description="Network experiment design pipeline: score social "
        "edges, filter, cluster, randomize, and measure.")
    sp = ap.add_subparsers(dest="command", required=True)

    p = sp.add_parser("ingest", help="load a raw edge list into a graph "
                      "directory")
    p.add_argument("--edges", help="tab-separated src dst [weight] file")
    p.add_argument("--features", help="header-less CSV, row i = node i")
    p.add_argument("--out", help="output graph directory")
    _add_common(p)
    p.set_defaults(func=cmd_ingest)

    p = sp.add_parser("train-lp", help="train the link model on realized "
                      "invitation edges")
    p.add_argument("--graph", help="graph directory")
    p.add_argument("--labels", help="label list (src dst day)")
    p.add_argument("--horizon", type=int, help="keep label edges with day "
                   "< horizon (default: all)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output model JSON")
    p.add_argument("--k-hops", dest="k_hops", type=int)
    p.add_argument("--width", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--step-size", dest="step_size", type=float)
    p.add_argument("--max-nodes", dest="max_nodes", type=int)
    p.add_argument("--use-labels", dest="use_labels", type=int,
                   help="1 (default) = structural-role inputs on, 0 = off")
    p.add_argument("--neg-ratio", dest="neg_ratio", type=float)
    p.add_argument("--max-pairs", dest="max_pairs", type=int)
    p.add_argument("--test-fraction", dest="test_fraction", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_train_lp)

    p = sp.add_parser("score", help="score every graph edge with a trained "
                      "model")
    p.add_argument("--graph")
    p.add_argument("--model")
    p.add_argument("--out", help="output scores.tsv")
    p.add_argument("--max-nodes", dest="max_nodes", type=int)
    _add_common(p)
    p.set_defaults(func=cmd_score)

    p = sp.add_parser("filter", help="keep edges by score threshold, or "
                      "drop hotspot edges")
    p.add_argument("--graph")
    p.add_argument("--scores")
    p.add_argument("--gamma", type=float, help="keep edges with score >= "
                   "gamma")
    p.add_argument("--theta", type=int, help="drop edges at nodes with "
                   "degree > theta")
    p.add_argument("--weight-mode", dest="weight_mode",
                   choices=("score", "unit"))
    p.add_argument("--out", help="output graph directory")
    _add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sp.add_parser("cluster", help="community detection on the filtered "
                      "graph")
    p.add_argument("--graph")
    p.add_argument("--algo", choices=("louvain", "labelprop"))
    p.add_argument("--seed", type=int)
    p.add_argument("--resolution", type=float)
    p.add_argument("--max-sweeps", dest="max_sweeps", type=int)
    p.add_argument("--out", help="output clusters.tsv")
    _add_common(p)
    p.set_defaults(func=cmd_cluster)

    p = sp.add_parser("assign", help="randomize clusters into test groups")
    p.add_argument("--clusters")
    p.add_argument("--groups", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mode", choices=("uniform", "size_balanced"))
    p.add_argument("--slice", type=float, help="keep this traffic fraction "
                   "per group (whole clusters)")
    p.add_argument("--out", help="output assignment.tsv")
    _add_common(p)
    p.set_defaults(func=cmd_assign)

    p = sp.add_parser("metrics", help="experiment readout for an assignment "
                      "and outcomes")
    p.add_argument("--assignment")
    p.add_argument("--outcomes")
    p.add_argument("--labels")
    p.add_argument("--horizon", type=int)
    p.add_argument("--graph", help="graph directory (enables the exposure "
                   "curve)")
    p.add_argument("--exposure-bins", dest="exposure_bins", type=int)
    p.add_argument("--out", help="output report.json")
    _add_common(p)
    p.set_defaults(func=cmd_metrics)

    p = sp.add_parser("simulate", help="run an invitation campaign on a "
                      "real or generated graph")
    p.add_argument("--graph", help="existing graph directory")
    p.add_argument("--out-graph", dest="out_graph", help="where to save a "
                   "generated graph")
    p.add_argument("--assignment", help="assignment.tsv; omit for an "
                   "all-control run")
    p.add_argument("--treated-groups", dest="treated_groups", type=int,
                   nargs="+", help="group ids treated (default: 1)")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="output directory (outcomes, labels, meta)")
    p.add_argument("--model", choices=("preferential_attachment",
                                       "planted_blocks", "hybrid"),
                   help="generator family (instead of --graph)")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--blocks", type=int)
    p.add_argument("--p-in", dest="p_in", type=float)
    p.add_argument("--p-out", dest="p_out", type=float)
    p.add_argument("--community-size", dest="community_size", type=int)
    p.add_argument("--celebrities", type=int)
    p.add_argument("--celebrity-cover", dest="celebrity_cover", type=float)
    p.add_argument("--feature-dim", dest="feature_dim", type=int)
    p.add_argument("--feature-noise", dest="feature_noise", type=float)
    p.add_argument("--tau", type=float)
    p.add_argument("--beta0", type=float)
    p.add_argument("--exposure-kind", dest="exposure_kind",
                   choices=("zero", "linear", "saturating"))
    p.add_argument("--exposure-scale", dest="exposure_scale", type=float)
    p.add_argument("--exposure-shape", dest="exposure_shape", type=float)
    p.add_argument("--noise-sd", dest="noise_sd", type=float)
    p.add_argument("--p-t", dest="p_t", type=float)
    p.add_argument("--p-c", dest="p_c", type=float)
    p.add_argument("--horizon", type=int)
    p.add_argument("--init-frac", dest="init_frac", type=float)
    p.add_argument("--affinity", type=float,
                   help="invitation damping on cross-community edges")
    p.add_argument("--block-sd", dest="block_sd", type=float)
    _add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sp.add_parser("compare", help="evaluate randomization methods on "
                      "the simulator")
    p.add_argument("--config", help="comparison config (JSON), or 'demo'")
    p.add_argument("--seeds", help="lo:hi range or comma list (default 0)")
    p.add_argument("--methods", help="comma list; default all")
    p.add_argument("--out", help="output CSV, one row per method per seed")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_compare)

    p = sp.add_parser("report", help="render a metrics JSON into text and "
                      "plots")
    p.add_argument("--metrics", help="report.json from the metrics stage")
    p.add_argument("--graph", help="graph directory for the degree plot")
    p.add_argument("--table", help="compare CSV to append method means")
    p.add_argument("--out", help="output directory")
    _add_common(p)
    p.set_defaults(func=cmd_report)
    return ap


def _apply_threads(args) -> None:
    threads = getattr(args, "threads", None)
    if threads is None:
        return
    if threads < 1:
        raise CliError(EXIT_CONFIG, "--threads must be >= 1")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMBA_NUM_THREADS"):
        os.environ[var] = str(threads)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _apply_threads(args)
        return args.func(args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.code
    except FileNotFoundError as e:
        print(f"error: missing input: {e}", file=sys.stderr)
        return EXIT_MISSING
    except EdgeListError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        # library-level rejection of inconsistent inputs
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as e:
        print(f"error: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except (FloatingPointError, np.linalg.LinAlgError) as e:
        print(f"error: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
