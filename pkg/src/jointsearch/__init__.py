"""Joint accuracy/latency architecture search with multi-fidelity successive halving."""

from .engine import (OracleTable, ResourceUnit, SearchTrace, ThresholdConfig, num_rounds,
                     proxy_front, run_brute_force, run_pareto, run_threshold)
from .metrics import gap_curve, hypervolume_2d, kendall_tau
from .pareto import (NdsRanking, ObjectivePoint, dominates, nds, pareto_front,
                     select_pareto_halving, select_threshold)
from .simbench import BUILTIN_PROFILES, GroundTruth, HardwareProfile, generate_ground_truth
from .space import ArchitectureSpec, SearchSpaceConfig, SubgraphKey, decompose, enumerate_space, flops

__all__ = [
    "ArchitectureSpec", "BUILTIN_PROFILES", "GroundTruth", "HardwareProfile", "NdsRanking",
    "ObjectivePoint", "OracleTable", "ResourceUnit", "SearchSpaceConfig", "SearchTrace",
    "SubgraphKey", "ThresholdConfig", "decompose", "dominates", "enumerate_space", "flops",
    "gap_curve", "generate_ground_truth", "hypervolume_2d", "kendall_tau", "nds", "num_rounds", "pareto_front", "proxy_front",
    "run_brute_force", "run_pareto", "run_threshold", "select_pareto_halving",
    "select_threshold",
]
