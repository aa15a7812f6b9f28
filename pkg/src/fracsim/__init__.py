"""Fractional simulation scores between labeled directed graphs.

Computes, for every candidate node pair of two graphs, how nearly one
node is simulated by the other under four simulation variants (simple,
degree-preserving, bi-, bijective), together with exact-relation
oracles, classic-measure presets (SimRank, RoleSim), and an analysis
toolkit.
"""
from .analysis import AlignmentResult, align, ndcg, pearson, top_k
from .compat import (CompatPreset, fsim_b_at_generation, run_rolesim,
                     run_simrank, verify_kbisim_theorem)
from .config import FSimConfig
from .engine import (FSimEngine, NeighborMapping, initialize_scores,
                     iterate_to_convergence, lookup_score, map_neighbors,
                     normalizer, set_score, update_pair, upper_bound)
from .errors import (ConfigError, FracsimError, GraphParseError,
                     ResourceBudgetError, ValidationError)
from .exact import (SignatureMap, SimulationRelation, WLColoring, check_pair,
                    exact_maximal_relation, kbisim_signatures, wl_colors)
from .graph import (DegreeStats, LabeledDigraph, build_graph, degree_stats,
                    inject_noise, load_graph, serialize_graph,
                    symmetric_closure, write_graph)
from .labels import LabelSimilarity, label_sim
from .scores import ConvergenceReport, ScoreTable, read_scores, write_scores

__version__ = "0.1.0"

__all__ = [
    "AlignmentResult", "CompatPreset", "ConfigError", "ConvergenceReport",
    "DegreeStats", "FSimConfig", "FSimEngine", "FracsimError",
    "GraphParseError", "LabelSimilarity", "LabeledDigraph",
    "NeighborMapping", "ResourceBudgetError", "ScoreTable", "SignatureMap",
    "SimulationRelation", "ValidationError", "WLColoring", "align",
    "build_graph", "check_pair", "degree_stats", "exact_maximal_relation",
    "fsim_b_at_generation", "initialize_scores", "inject_noise",
    "iterate_to_convergence", "kbisim_signatures", "label_sim", "load_graph",
    "lookup_score", "map_neighbors", "ndcg", "normalizer", "pearson",
    "read_scores", "run_rolesim", "run_simrank", "serialize_graph",
    "set_score", "symmetric_closure", "top_k", "update_pair", "upper_bound",
    "verify_kbisim_theorem", "wl_colors", "write_graph", "write_scores",
]
