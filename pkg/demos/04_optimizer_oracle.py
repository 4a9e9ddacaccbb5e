"""The closed forms checked against a blind numerical search.

For random mixed states the optimizer knows nothing about singular values: it
moves Bloch angles to maximize the score. Its best value should match the
closed form from below, and restarting from random points alone should
already get there.
"""

import time

import numpy as np

from nlocality import closedform as cf
from nlocality.optimizer import OptimizerConfig, optimize_many
from nlocality.states import random_state
from nlocality.topology import Topology

TARGETS = {
    ("star", "free"): cf.max_star_local,
    ("star", "mub_central"): cf.max_star_mub,
    ("chain", "free"): cf.max_chain_local,
    ("chain", "mub_central"): cf.max_chain_mub,
}

ensembles = [[random_state(100 * t + i) for i in range(3)] for t in range(10)]
for (kind, restriction), closed in TARGETS.items():
    start = time.perf_counter()
    results = optimize_many(Topology(kind, 3), ensembles, OptimizerConfig(restarts=16, restriction=restriction))
    target = np.array([closed(e) for e in ensembles])
    best = np.array([r.best_score for r in results])
    random_only = np.array([r.random_best for r in results])
    print(
        f"{kind:5} {restriction:11}: max |best - closed| {np.max(np.abs(best - target)):.1e}, "
        f"random restarts only {np.max(target - random_only):.1e}  ({time.perf_counter() - start:.1f}s)"
    )
