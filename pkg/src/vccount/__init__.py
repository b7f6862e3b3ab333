"""Exact counting of minimum vertex covers through reduced solution graphs."""

__version__ = "0.1.0"

from .graph import ErdosRenyi, GenSpec, Graph, ScaleFree, generate, read_graph  # noqa: E402
from .rsg import (  # noqa: E402
    CoverState,
    EdgeKind,
    Exactness,
    ReducedSolutionGraph,
    build_rsg_heuristic,
    build_rsg_oracle,
    verify_rsg,
)
from .counter import CountBudget, count_solutions  # noqa: E402

__all__ = [
    "__version__",
    "Graph",
    "GenSpec",
    "ErdosRenyi",
    "ScaleFree",
    "generate",
    "read_graph",
    "CoverState",
    "EdgeKind",
    "Exactness",
    "ReducedSolutionGraph",
    "build_rsg_heuristic",
    "build_rsg_oracle",
    "verify_rsg",
    "CountBudget",
    "count_solutions",
]
