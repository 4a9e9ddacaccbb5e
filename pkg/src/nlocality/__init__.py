"""Maximal n-local violations of star and chain networks with two-qubit sources.

Closed-form maxima over local qubit observables live in :mod:`closedform`;
:mod:`optimizer` is an independent numerical oracle for them, and
:mod:`sampling` simulates finite-shot experiments.
"""

from .closedform import (
    max_chain_local,
    max_chain_mub,
    max_chsh,
    max_star_local,
    max_star_mub,
    report,
)
from .networks import correlation_table, score, strategy_score
from .optimizer import OptimizerConfig, grid_oracle, optimize
from .states import (
    SingularTriple,
    bell_state,
    classical_gamma,
    colored,
    random_state,
    singular_triple,
    werner,
)
from .topology import NetworkStrategy, Topology

__version__ = "0.1.0"
