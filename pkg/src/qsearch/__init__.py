"""Exact state-vector simulations of quantum database search."""

from .errors import (
    AccuracyError,
    DomainError,
    InfeasibleError,
    NoSolutionError,
    SearchError,
)
from .state import BlockLayout, QueryCounter, SearchSpace, uniform_state

__all__ = [
    "AccuracyError",
    "BlockLayout",
    "DomainError",
    "InfeasibleError",
    "NoSolutionError",
    "QueryCounter",
    "SearchError",
    "SearchSpace",
    "uniform_state",
]

__version__ = "0.1.0"
