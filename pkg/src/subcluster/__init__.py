"""Sublinear-time graph clustering toolkit.

A robust clustering oracle and a local cluster-structure reconstructor
for bounded-degree graphs, built on seeded lazy random walks, plus exact
desk-scale verification oracles (spectra, conductances, stochastic
complements, mixing profiles) and planted-instance generators.
"""

from .graph_core import (
    Graph,
    QueryCounter,
    GraphFormatError,
    load_graph,
    store_graph,
    outer_conductance,
)
from .walks import WalkKind, exact_p, exact_pbar, exact_qbar, lazy_step, sample_walk

__all__ = [
    "Graph",
    "QueryCounter",
    "GraphFormatError",
    "load_graph",
    "store_graph",
    "outer_conductance",
    "WalkKind",
    "exact_p",
    "exact_pbar",
    "exact_qbar",
    "lazy_step",
    "sample_walk",
]

__version__ = "0.1.0"
