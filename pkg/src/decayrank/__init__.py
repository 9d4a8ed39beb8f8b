"""Decayed heavy-hitter ranking and the random walks behind it."""
__version__ = "0.1.0"

from .errors import BudgetExceededError, HypothesisViolationError, ParameterError, SnapshotFormatError
from .ranker import DecayParams, DecayRankTable, DenseRanker, half_life_to_alpha
from .walk import INFINITE, SampleStats, VertexSet, WalkConfig, enumerate_exact, reciprocal_probe, run_walk

__all__ = [
    "INFINITE",
    "BudgetExceededError",
    "DecayParams",
    "DecayRankTable",
    "DenseRanker",
    "HypothesisViolationError",
    "ParameterError",
    "SampleStats",
    "SnapshotFormatError",
    "VertexSet",
    "WalkConfig",
    "enumerate_exact",
    "half_life_to_alpha",
    "reciprocal_probe",
    "run_walk",
]
