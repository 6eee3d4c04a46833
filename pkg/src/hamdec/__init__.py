"""Edge-disjoint Hamilton cycles in dense regular bipartite digraphs."""

from .digraph import A, B, BipartiteDigraph, Digraph, Side, VertexId
from .errors import ConstructionFailure, DomainError, HamdecError, InvariantViolation
from .generators import (complete_bipartite, directed_four_cycle, diregular_tournament,
                         ham_decompose_complete, ham_paths_complete,
                         random_regular_bipartite_digraph)
from .hampath import ghouila_houri_cycle, ham_st_path, ham_st_path_cross
from .matchings import extract_matching_collection, hall_violator, max_matching
from .partition import PartitionConfig, build_partition_plan, random_equipartitions, verify_plan
from .pathcover import PathCover, PathCoverConfig, build_path_covers
from .pipeline import DecompositionConfig, DecompositionResult, decompose, stage_stats
from .verify import (brute_force_max_disjoint_ham_cycles, enumerate_ham_st_paths, is_ham_cycle,
                     is_ham_path, pairwise_edge_disjoint)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
