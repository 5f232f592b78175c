"""Cluster-randomized network A/B testing toolkit.

Pipeline: score each social edge with a link model trained on realized
campaign edges, drop low-scoring edges, cluster what remains, randomize
whole clusters into experiment groups, and read out effect estimates
with interference and variance diagnostics, all validated against a
campaign simulator that knows the true effect.
"""

from .graphs import (DegreeHistogram, EdgeListError, GrowthProfile,
                     IngestStats, LabelGraph, SocialGraph, build_graph,
                     build_label_graph, degree_distribution,
                     induced_subgraph, label_edges_in_graph, load_edge_list,
                     load_label_list, neighborhood_growth, write_edge_list,
                     write_label_list)
from .linkpred import (ClassifierMetrics, DivergenceError, EnclosingSubgraph,
                       LinkModel, PairwiseMlp, TrainConfig, TrainResult,
                       TrainingSet, build_training_set, evaluate_classifier,
                       extract_enclosing_subgraph, forward, init_link_model,
                       init_pair_mlp, model_from_dict, model_to_dict,
                       node_label, node_label_index, score_edges,
                       score_pairs, split_training_set, train,
                       train_pair_baseline)
from .filtering import FilterConfig, filter_by_score, remove_hotspots
from .clustering import (Clustering, ModularityParams,
                         brute_force_best_partition, clustering_from_labels,
                         label_propagation, louvain, modularity,
                         singleton_clustering)
from .assignment import (GroupAssignment, group_traffic_slice, merge_random,
                         read_assignment, user_level_randomization,
                         write_assignment)
from .metrics import (ClusterStats, ExperimentOutcome, ExposureCurve,
                      MetricsReport, build_report, cluster_stats,
                      estimate_ate, estimate_ate_cluster_means,
                      estimator_variance, exposure_curve, exposure_fractions,
                      interference, read_outcomes, true_ate, write_outcomes)
from .sim import (ComparisonConfig, ComparisonTable, GeneratedGraph,
                  GraphGenSpec, METHODS, ResponseModel, SimRun,
                  generate_graph, geo_synthetic_assignment, run_comparison,
                  simulate_campaign)

__version__ = "0.1.0"
