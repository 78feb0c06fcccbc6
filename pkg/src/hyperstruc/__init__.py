"""Structural-role node embeddings in the hyperboloid model of hyperbolic space."""

from .evaluate import cross_validate, mirror_metric, role_separation
from .graph import Graph, generate_barbell, generate_mirrored, hop_rings, load_edge_list, mirrored_karate
from .multilayer import MultilayerGraph, WalkState, build_multilayer, transition_distribution
from .manifold import exp_map, hyperbolic_distance, to_poincare
from .pipeline import embed_graph
from .structdist import StructuralDistanceTable, all_pair_distances, exact_dtw, fast_dtw
from .trainer import TrainConfig, train
from .walker import PairMultiset, WalkConfig, extract_pairs, generate_corpus

__version__ = "0.1.0"
