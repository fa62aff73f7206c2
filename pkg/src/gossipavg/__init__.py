"""Average-case consensus on random k-regular graphs.

Graph sampling and the gossip operator live in :mod:`gossipavg.graph`, the
Kesten-McKay law in :mod:`gossipavg.spectrum`, residual polynomials in
:mod:`gossipavg.poly`, the six solvers in :mod:`gossipavg.solvers` and the
expected-error analysis in :mod:`gossipavg.analysis`.
"""
from .graph import GossipOperator, RegularGraph, apply_gossip, dense_eigenvalues, generate_regular
from .poly import ResidualEvaluator, delta_sequence
from .solvers import ConvergenceTrace, MethodConfig, consensus_error, initial_state, run
from .spectrum import KestenMcKay, kesten_mckay_density, support_bounds

__all__ = [
    "ConvergenceTrace",
    "GossipOperator",
    "KestenMcKay",
    "MethodConfig",
    "RegularGraph",
    "ResidualEvaluator",
    "apply_gossip",
    "consensus_error",
    "delta_sequence",
    "dense_eigenvalues",
    "generate_regular",
    "initial_state",
    "kesten_mckay_density",
    "run",
    "support_bounds",
]
