"""Measurement-based QAOA for weighted MAX K-CUT.

Binary-encoded Z-Hamiltonians, cluster-state measurement patterns, a
statevector simulator for those patterns, the classical QAOA loop and
closed-form cluster-size accounting.
"""

from mbqaoa.graph import Graph, brute_force_max_kcut, complete_graph, cut_value, parse_graph, read_graph
from mbqaoa.hamiltonian import (
    EncodingParams,
    PauliZPolynomial,
    build_penalized_target,
    build_penalty,
    build_projector,
    build_target,
    spectrum,
)
from mbqaoa.pattern import assemble_pattern, export_pattern, load_pattern
from mbqaoa.qaoa import OptimizerConfig, QaoaResult, optimize
from mbqaoa.simulator import QuantumState, fidelity, reference_evolution, run_pattern

__version__ = "0.1.0"

__all__ = [
    "EncodingParams",
    "Graph",
    "OptimizerConfig",
    "PauliZPolynomial",
    "QaoaResult",
    "QuantumState",
    "assemble_pattern",
    "brute_force_max_kcut",
    "build_penalized_target",
    "build_penalty",
    "build_projector",
    "build_target",
    "complete_graph",
    "cut_value",
    "export_pattern",
    "fidelity",
    "load_pattern",
    "optimize",
    "parse_graph",
    "read_graph",
    "reference_evolution",
    "run_pattern",
    "spectrum",
]
