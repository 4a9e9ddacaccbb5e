"""Chains do not need entangled middle sources.

The maximal chain score only uses tau0 of each middle source, so a shared coin
flip in the middle is as good as a Bell pair. Restricting the central parties
to z/x products removes that loophole: the score drops to at most 1.
"""

import numpy as np

from nlocality import closedform as cf
from nlocality.networks import strategy_score
from nlocality.observables import mub_chain_strategy, theorem2_chain_strategy
from nlocality.states import bell_state, classical_gamma
from nlocality.sweeps import SweepConfig, sweep_rows

for middle in range(1, 4):
    ens = [bell_state()] + [classical_gamma()] * middle + [bell_state()]
    print(
        f"n={len(ens)}: S*={strategy_score(ens, theorem2_chain_strategy(ens)):.6f} "
        f"S^*={strategy_score(ens, mub_chain_strategy(ens)):.6f} "
        f"corollary flags={cf.corollary3_conditions(ens)}"
    )

print("\ncolored noise on every source, tau1^2 = 0.5")
for n in range(2, 8):
    row = sweep_rows(SweepConfig("chain_colored", n=n, grid_points=3))[1][1]
    print(f"n={n}: S*={row[1]:.5f} S^*={row[2]:.5f} gap={row[1] - row[2]:.5f}")
